#include <gtest/gtest.h>

#include "stokes/stokes_lagrange.hpp"
#include "support.hpp"

using namespace stokes;
using namespace stokes::testing;

namespace {

struct RodParams {
    Rational k{2}, T{3}, rhoA{5}, mu{1, 20};
};

OneVarPolyMat symplectic_S(const RodParams& r) {
    return OneVarPolyMat(2, 2, {QMatrix{{r.k, 0}, {0, Rational(1) / r.rhoA}}, QMatrix(2, 2), QMatrix{{-r.T, 0}, {0, 0}}});
}

OneVarPolyMat nonlocal_P(const RodParams& r) { return OneVarPolyMat(3, 3, {QMatrix::identity(3), QMatrix(3, 3), QMatrix::diag({0, -r.mu, 0})}); }
OneVarPolyMat local_S(const RodParams& r) { return OneVarPolyMat(QMatrix::diag({r.k, r.T, Rational(1) / r.rhoA})); }

OneVarPolyMat scalar(std::vector<Rational> c) {
    std::vector<QMatrix> m;
    for (auto& v : c) m.push_back(QMatrix{{v}});
    return OneVarPolyMat(1, 1, m);
}

/// Random reciprocal pair of degree <= 2: (U·diag(d_i(s)), U^{-T}·diag(c_i)) with d_i even polynomials,
/// roles of the two factors swapped at random.
std::pair<OneVarPolyMat, OneVarPolyMat> random_reciprocal(std::mt19937& rng, std::size_t n) {
    std::vector<QMatrix> d(3, QMatrix(n, n));
    QMatrix c(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        d[0](i, i) = small_rational(rng, false);
        d[2](i, i) = small_rational(rng);
        c(i, i) = small_rational(rng, false);
    }
    QMatrix U = random_invertible(rng, n);
    OneVarPolyMat A = OneVarPolyMat(QMatrix(U)) * OneVarPolyMat(n, n, d);
    OneVarPolyMat B(inverse(U).transpose() * c);
    std::uniform_int_distribution<int> coin(0, 1);
    if (coin(rng)) return {A, B};
    return {B, A};
}

}  // namespace

TEST(CheckReciprocity, Examples) {
    RodParams r;
    EXPECT_TRUE(check_reciprocity(OneVarPolyMat(QMatrix::identity(2)), symplectic_S(r)).ok);
    EXPECT_TRUE(check_reciprocity(nonlocal_P(r), local_S(r)).ok);
    ReciprocityReport bad = check_reciprocity(scalar({1}), scalar({0, 1}));
    EXPECT_FALSE(bad.ok);
    EXPECT_EQ(bad.residual, scalar({0, -2}));
}

TEST(CheckReciprocity, ShapeMismatch) { EXPECT_THROW(check_reciprocity(OneVarPolyMat(QMatrix::identity(2)), scalar({1})), DimensionError); }

TEST(CheckMaximality, Examples) {
    RodParams r;
    EXPECT_TRUE(check_maximality(OneVarPolyMat(QMatrix::identity(2)), symplectic_S(r)));
    EXPECT_TRUE(check_maximality(nonlocal_P(r), local_S(r)));
    EXPECT_FALSE(check_maximality(scalar({0, 1}), scalar({0, 0, 1})));
    EXPECT_THROW(ReciprocalOperator(scalar({0, 1}), scalar({0, 0, 1})), std::invalid_argument);
}

TEST(ReciprocalOperator, RejectsViolation) {
    try {
        ReciprocalOperator(scalar({1}), scalar({0, 1}));
        FAIL() << "expected ReciprocityViolation";
    } catch (const ReciprocityViolation& e) {
        EXPECT_EQ(e.residual, scalar({0, -2}));
    }
}

TEST(BoundaryOperator, SymplecticRod) {
    RodParams r;
    ReciprocalOperator R(OneVarPolyMat(QMatrix::identity(2)), symplectic_S(r));
    LagrangeStructure lb = boundary_operator(R);
    EXPECT_EQ(lb.p, 1u);
    OneVarPolyMat printed(2, 2, {QMatrix{{1, 0}, {0, 0}}, QMatrix{{0, 0}, {-r.T, 0}}});
    LagrangeStructure pinned = boundary_operator(R, printed);
    EXPECT_EQ(pinned.Rb(), printed);
    EXPECT_EQ(pinned.H, lb.H);

    TwoVarPolyMat H(2, 2);
    H.add_block(0, 0, QMatrix{{r.k, 0}, {0, Rational(1) / r.rhoA}});
    H.add_block(1, 1, QMatrix{{r.T, 0}, {0, 0}});
    EXPECT_EQ(lb.H, H);

    TwoVarPolyMat H0(2, 2);
    H0.add_block(0, 0, QMatrix{{r.k, 0}, {0, Rational(1) / r.rhoA}});
    H0.add_block(2, 0, QMatrix{{-r.T / 2, 0}, {0, 0}});
    H0.add_block(0, 2, QMatrix{{-r.T / 2, 0}, {0, 0}});
    EXPECT_EQ(lb.H0, H0);
    EXPECT_EQ(reflect_diagonal(lb.H), symplectic_S(r));
}

TEST(BoundaryOperator, NonlocalRod) {
    RodParams r;
    ReciprocalOperator R(nonlocal_P(r), local_S(r));
    EXPECT_EQ(boundary_operator(R).p, 1u);
    OneVarPolyMat printed(2, 3, {QMatrix{{0, r.T, 0}, {0, 0, 0}}, QMatrix{{0, 0, 0}, {0, r.mu, 0}}});
    EXPECT_EQ(boundary_operator(R, printed).Rb(), printed);

    // The canonical density depends on the symplectic gauge through R∂^T Ξ R∂. The gauge
    // (P∂; S∂) = ([0, μs, 0]; [0, -T, 0]) yields diag(k, T + Tμζη, 1/ρA).
    OneVarPolyMat pinned(2, 3, {QMatrix{{0, 0, 0}, {0, -r.T, 0}}, QMatrix{{0, r.mu, 0}, {0, 0, 0}}});
    LagrangeStructure lb = boundary_operator(R, pinned);
    TwoVarPolyMat H(3, 3);
    H.add_block(0, 0, QMatrix::diag({r.k, r.T, Rational(1) / r.rhoA}));
    H.add_block(1, 1, QMatrix::diag({0, r.T * r.mu, 0}));
    EXPECT_EQ(lb.H, H);

    LagrangeStructure other = boundary_operator(R, printed);
    EXPECT_FALSE(other.H == lb.H);
    EXPECT_TRUE(verify_hamiltonian_compatibility(other.H, R));
    EXPECT_EQ(reflect_diagonal(other.H), reflect_diagonal(lb.H));
}

TEST(BoundaryOperator, UnrelatedGaugeRejected) {
    RodParams r;
    ReciprocalOperator R(OneVarPolyMat(QMatrix::identity(2)), symplectic_S(r));
    OneVarPolyMat wrong(2, 2, {QMatrix{{0, 1}, {0, 0}}, QMatrix{{0, 0}, {-r.T, 0}}});
    EXPECT_THROW(boundary_operator(R, wrong), std::invalid_argument);
}

TEST(BoundaryOperator, DegreeZeroHasNoEnergyPorts) {
    QMatrix S0{{2, 1}, {1, 3}};
    ReciprocalOperator R(OneVarPolyMat(QMatrix::identity(2)), OneVarPolyMat(S0));
    LagrangeStructure lb = boundary_operator(R);
    EXPECT_EQ(lb.p, 0u);
    EXPECT_TRUE(lb.PhiBar.is_zero());
    EXPECT_EQ(lb.H, lb.H0);
    EXPECT_EQ(lb.H.degree(), 0);
    EXPECT_EQ(lb.H.block(0, 0), S0);
}

TEST(NaturalHamiltonian, DegreeZeroIsSymmetrizedProduct) {
    QMatrix P0{{1, 1}, {0, 1}};
    QMatrix S0 = inverse(P0).transpose() * QMatrix{{2, 0}, {0, 5}};
    ReciprocalOperator R{OneVarPolyMat(P0), OneVarPolyMat(S0)};
    TwoVarPolyMat h0 = natural_hamiltonian(R);
    EXPECT_EQ(h0.block(0, 0), S0.transpose() * P0);
    EXPECT_EQ(h0.block(0, 0), Rational(1, 2) * (P0.transpose() * S0 + S0.transpose() * P0));
}

TEST(VerifyHamiltonianCompatibility, Examples) {
    RodParams r;
    ReciprocalOperator R(OneVarPolyMat(QMatrix::identity(2)), symplectic_S(r));
    LagrangeStructure lb = boundary_operator(R);
    EXPECT_TRUE(verify_hamiltonian_compatibility(lb.H, R));
    EXPECT_TRUE(verify_hamiltonian_compatibility(lb.H0, R));
    TwoVarPolyMat shifted = lb.H0;
    shifted.add_block(0, 0, QMatrix{{1, 0}, {0, 0}});
    EXPECT_FALSE(verify_hamiltonian_compatibility(shifted, R));
    EXPECT_TRUE(divide_by_sum(lb.H - lb.H0).is_symmetric());
}

TEST(EnergyBoundaryValues, SymplecticRod) {
    RodParams r;
    ReciprocalOperator R(OneVarPolyMat(QMatrix::identity(2)), symplectic_S(r));
    OneVarPolyMat printed(2, 2, {QMatrix{{1, 0}, {0, 0}}, QMatrix{{0, 0}, {-r.T, 0}}});
    LagrangeStructure lb = boundary_operator(R, printed);
    // ξ = (u, p); jets [ξ, ξ'] at each end.
    BoundaryJets j{{{0.5, 1.0}, {2.0, -1.0}}, {{-0.25, 3.0}, {0.75, 4.0}}};
    EnergyPorts e = energy_boundary_values(lb, j);
    double T = r.T.to_double();
    EXPECT_EQ(e.chi, (std::vector<double>{0.5, -0.25}));
    EXPECT_DOUBLE_EQ(e.eps[0], -T * 2.0);
    EXPECT_DOUBLE_EQ(e.eps[1], -T * 0.75);
    BoundaryJets zero{{{0, 0}, {0, 0}}, {{0, 0}, {0, 0}}};
    EnergyPorts z = energy_boundary_values(lb, zero);
    for (double v : z.chi) EXPECT_EQ(v, 0.0);
    for (double v : z.eps) EXPECT_EQ(v, 0.0);
    EXPECT_THROW(energy_boundary_values(lb, BoundaryJets{{{0.5, 1.0}}, {{0.5, 1.0}}}), std::invalid_argument);
}

TEST(EnergyBoundaryValues, NonlocalRod) {
    RodParams r;
    ReciprocalOperator R(nonlocal_P(r), local_S(r));
    OneVarPolyMat printed(2, 3, {QMatrix{{0, r.T, 0}, {0, 0, 0}}, QMatrix{{0, 0, 0}, {0, r.mu, 0}}});
    LagrangeStructure lb = boundary_operator(R, printed);
    // ξ = (u, λ, p)
    BoundaryJets j{{{1, 0.5, 2}, {0, -2.0, 0}}, {{1, 1.5, 2}, {0, 4.0, 0}}};
    EnergyPorts e = energy_boundary_values(lb, j);
    double T = r.T.to_double(), mu = r.mu.to_double();
    EXPECT_DOUBLE_EQ(e.chi[0], T * 0.5);
    EXPECT_DOUBLE_EQ(e.chi[1], T * 1.5);
    EXPECT_DOUBLE_EQ(e.eps[0], mu * -2.0);
    EXPECT_DOUBLE_EQ(e.eps[1], mu * 4.0);
}

// ---------------------------------------------------------------------------
// Randomized properties, 200 instances each.

TEST(LagrangeProperty, SecondOrderConditionsAgree) {
    std::mt19937 rng(51);
    std::uniform_int_distribution<int> dim(1, 3), coin(0, 1);
    int satisfied = 0, violated = 0;
    for (int i = 0; i < 200; ++i) {
        std::size_t n = static_cast<std::size_t>(dim(rng));
        auto [P, S] = random_reciprocal(rng, n);
        if (coin(rng)) {
            std::uniform_int_distribution<int> k(0, 2);
            std::vector<QMatrix> c;
            for (int d = 0; d <= 2; ++d) c.push_back(S.coeff(d));
            c[static_cast<std::size_t>(k(rng))] += random_matrix(rng, n, n);
            S = OneVarPolyMat(n, n, c);
        }
        bool exact = (formal_adjoint(S) * P - formal_adjoint(P) * S).is_zero();
        ASSERT_EQ(reciprocity_conditions_second_order(P, S), exact) << "instance " << i;
        ASSERT_EQ(check_reciprocity(P, S).ok, exact) << "instance " << i;
        (exact ? satisfied : violated)++;
    }
    EXPECT_GT(satisfied, 60);
    EXPECT_GT(violated, 60);
}

TEST(LagrangeProperty, BoundaryIdentityAndVariationalDerivative) {
    std::mt19937 rng(52);
    std::uniform_int_distribution<int> dim(1, 3);
    for (int i = 0; i < 200; ++i) {
        std::size_t n = static_cast<std::size_t>(dim(rng));
        auto [P, S] = random_reciprocal(rng, n);
        ReciprocalOperator R(P, S);
        LagrangeStructure lb = boundary_operator(R);
        TwoVarPolyMat lhs = outer_product(R.R(), theta(n), R.R());
        if (lb.p)
            ASSERT_EQ(lhs, outer_product(lb.Rb(), theta(lb.p), lb.Rb()).times_sum()) << "instance " << i;
        else
            ASSERT_TRUE(lhs.is_zero()) << "instance " << i;
        OneVarPolyMat q = formal_adjoint(S) * P;
        ASSERT_EQ(reflect_diagonal(lb.H), q) << "instance " << i;
        ASSERT_EQ(reflect_diagonal(lb.H0), q) << "instance " << i;
        ASSERT_TRUE(lb.H.is_symmetric());
        ASSERT_TRUE(verify_hamiltonian_compatibility(lb.H, R));
        if (P.degree() <= 0 && S.degree() <= 0) {
            ASSERT_EQ(lb.p, 0u);
            ASSERT_EQ(lb.H, lb.H0);
        }
    }
}
