#include <gtest/gtest.h>

#include "stokes/minors.hpp"
#include "support.hpp"

using namespace stokes;
using namespace stokes::testing;

namespace {

OneVarPolyMat scalar(std::vector<Rational> c) {
    std::vector<QMatrix> m;
    for (auto& v : c) m.push_back(QMatrix{{v}});
    return OneVarPolyMat(1, 1, m);
}

Poly poly(std::vector<Rational> c) { return Poly(std::move(c)); }

TwoVarPolyMat scalar2(std::initializer_list<std::tuple<int, int, Rational>> terms) {
    TwoVarPolyMat h(1, 1);
    for (auto& [k, l, v] : terms) h.add_block(k, l, QMatrix{{v}});
    return h;
}

OneVarPolyMat J1() {
    return OneVarPolyMat(3, 3, {QMatrix{{0, 0, 1}, {0, 0, 0}, {-1, 0, 0}}, QMatrix{{0, 0, 0}, {0, 0, 1}, {0, 1, 0}}});
}

}  // namespace

TEST(FormalAdjoint, FirstOrderScalarFlipsSign) { EXPECT_EQ(formal_adjoint(scalar({0, 1})), scalar({0, -1})); }

TEST(FormalAdjoint, NonlocalElasticityOperatorIsSelfAdjoint) {
    OneVarPolyMat a = scalar({1, 0, Rational(-3, 2)});
    EXPECT_EQ(formal_adjoint(a), a);
}

TEST(FormalAdjoint, RodOperatorJ1IsNegated) { EXPECT_EQ(formal_adjoint(J1()), -J1()); }

TEST(ClassifyAdjointness, Examples) {
    EXPECT_EQ(classify_adjointness(scalar({0, 1})), Adjointness::skew_adjoint);
    Rational k(2), T(3), inv(1, 5);
    OneVarPolyMat q(2, 2, {QMatrix{{k, 0}, {0, inv}}, QMatrix(2, 2), QMatrix{{-T, 0}, {0, 0}}});
    EXPECT_EQ(classify_adjointness(q), Adjointness::self_adjoint);
    EXPECT_EQ(classify_adjointness(scalar({1, 1})), Adjointness::neither);
}

TEST(OuterProduct, ScalarOne) {
    TwoVarPolyMat h = outer_product(scalar({1}), QMatrix{{1}}, scalar({1}));
    EXPECT_EQ(h, scalar2({{0, 0, Rational(1)}}));
}

TEST(OuterProduct, SymplecticRodBoundaryForm) {
    Rational T(7, 3);
    OneVarPolyMat rb(2, 2, {QMatrix{{1, 0}, {0, 0}}, QMatrix{{0, 0}, {-T, 0}}});
    TwoVarPolyMat psi = outer_product(rb, theta(1), rb);
    TwoVarPolyMat expected(2, 2);
    expected.add_block(1, 0, QMatrix{{-T, 0}, {0, 0}});
    expected.add_block(0, 1, QMatrix{{T, 0}, {0, 0}});
    EXPECT_EQ(psi, expected);
}

TEST(OuterProduct, NonlocalRodVanishesOnAntidiagonal) {
    Rational mu(1, 20), k(1), T(2), inv(1, 3);
    OneVarPolyMat P(3, 3, {QMatrix::identity(3), QMatrix(3, 3), QMatrix::diag({0, -mu, 0})});
    OneVarPolyMat S(QMatrix::diag({k, T, inv}));
    OneVarPolyMat R = vstack(P, S);
    EXPECT_TRUE(outer_product(R, theta(3), R).eval_antidiagonal().is_zero());
}

TEST(OuterProduct, ShapeMismatchThrows) { EXPECT_THROW(outer_product(scalar({1}), QMatrix::identity(2), scalar({1})), DimensionError); }

TEST(DivideBySum, SumGivesOne) {
    EXPECT_EQ(divide_by_sum(scalar2({{1, 0, Rational(1)}, {0, 1, Rational(1)}})), scalar2({{0, 0, Rational(1)}}));
}

TEST(DivideBySum, RodOperatorGivesP1) {
    OneVarPolyMat j = J1();
    TwoVarPolyMat phi = TwoVarPolyMat::in_eta(j) + TwoVarPolyMat::in_zeta(j.transpose());
    TwoVarPolyMat psi = divide_by_sum(phi);
    EXPECT_EQ(psi.degree(), 0);
    EXPECT_EQ(psi.block(0, 0), j.coeff(1));
}

TEST(DivideBySum, ConstantIsNotDivisible) {
    try {
        divide_by_sum(scalar2({{0, 0, Rational(1)}}));
        FAIL() << "expected NotDivisible";
    } catch (const NotDivisible& e) {
        EXPECT_EQ(e.residual, scalar({1}));
    }
}

TEST(ConstantFullRank, Examples) {
    Rational k(1), T(1);
    EXPECT_TRUE(constant_full_rank(vstack(scalar({1}), scalar({k, 0, -T}))));
    OneVarPolyMat S(2, 2, {QMatrix{{k, 0}, {0, Rational(1)}}, QMatrix(2, 2), QMatrix{{-T, 0}, {0, 0}}});
    EXPECT_TRUE(constant_full_rank(vstack(OneVarPolyMat(QMatrix::identity(2)), S)));
    EXPECT_FALSE(constant_full_rank(vstack(scalar({0, 1}), scalar({0, 0, 1}))));
}

TEST(ConstantFullRank, CommonFactorOfMinorsIsDetected) {
    // Every 2x2 minor carries the factor (s - 1).
    OneVarPolyMat R = from_entries({{poly({-1, 1}), poly({})}, {poly({}), poly({1})}, {poly({1, -2, 1}), poly({})}, {poly({}), poly({})}});
    EXPECT_FALSE(constant_full_rank(R));
    EXPECT_EQ(maximal_minor_gcd(R).degree(), 1);
}

TEST(ReflectDiagonal, Examples) {
    Rational k(2), T(3), inv(1, 5), mu(1, 20);
    TwoVarPolyMat h(2, 2);
    h.add_block(0, 0, QMatrix{{k, 0}, {0, inv}});
    h.add_block(1, 1, QMatrix{{T, 0}, {0, 0}});
    EXPECT_EQ(reflect_diagonal(h), OneVarPolyMat(2, 2, {QMatrix{{k, 0}, {0, inv}}, QMatrix(2, 2), QMatrix{{-T, 0}, {0, 0}}}));

    QMatrix c{{1, 2}, {2, 5}};
    TwoVarPolyMat hc(2, 2);
    hc.add_block(0, 0, c);
    EXPECT_EQ(reflect_diagonal(hc), OneVarPolyMat(c));

    TwoVarPolyMat hn(3, 3);
    hn.add_block(0, 0, QMatrix::diag({k, T, inv}));
    hn.add_block(1, 1, QMatrix::diag({0, T * mu, 0}));
    EXPECT_EQ(reflect_diagonal(hn), OneVarPolyMat(3, 3, {QMatrix::diag({k, T, inv}), QMatrix(3, 3), QMatrix::diag({0, -T * mu, 0})}));
}

TEST(BoundaryRemainder, Examples) {
    TwoVarPolyMat hc(1, 1);
    hc.add_block(0, 0, QMatrix{{3}});
    EXPECT_TRUE(boundary_remainder(hc).is_zero());

    EXPECT_EQ(boundary_remainder(scalar2({{1, 1, Rational(1)}})), scalar2({{0, 1, Rational(1)}}));

    Rational k(2), T(3), inv(1, 5);
    TwoVarPolyMat h(2, 2);
    h.add_block(0, 0, QMatrix{{k, 0}, {0, inv}});
    h.add_block(1, 1, QMatrix{{T, 0}, {0, 0}});
    TwoVarPolyMat expected(2, 2);
    expected.add_block(0, 1, QMatrix{{T, 0}, {0, 0}});
    EXPECT_EQ(boundary_remainder(h), expected);
}

TEST(PolyMat2, CoefficientMatrixRoundTrip) {
    std::mt19937 rng(11);
    for (int i = 0; i < 50; ++i) {
        TwoVarPolyMat h = random_symmetric_two_var(rng, 2, 2);
        EXPECT_EQ(TwoVarPolyMat::from_coefficient_matrix(h.coefficient_matrix(), 2, 2), h);
        EXPECT_TRUE(h.is_symmetric());
    }
}

// ---------------------------------------------------------------------------
// Randomized properties, 200 instances each.

TEST(PolymatProperty, AdjointInvolution) {
    std::mt19937 rng(1);
    std::uniform_int_distribution<int> dim(1, 4), deg(0, 6);
    for (int i = 0; i < 200; ++i) {
        std::size_t r = static_cast<std::size_t>(dim(rng)), c = static_cast<std::size_t>(dim(rng));
        OneVarPolyMat a = random_polymat(rng, r, c, deg(rng));
        ASSERT_EQ(formal_adjoint(formal_adjoint(a)), a) << "instance " << i;
    }
}

TEST(PolymatProperty, DivisibilityRoundTrip) {
    std::mt19937 rng(2);
    std::uniform_int_distribution<int> dim(1, 4), deg(0, 5);
    for (int i = 0; i < 200; ++i) {
        OneVarPolyMat j = random_skew_adjoint(rng, static_cast<std::size_t>(dim(rng)), deg(rng));
        ASSERT_EQ(classify_adjointness(j) != Adjointness::neither, true);
        TwoVarPolyMat phi = TwoVarPolyMat::in_eta(j) + TwoVarPolyMat::in_zeta(j.transpose());
        ASSERT_TRUE(phi.eval_antidiagonal().is_zero()) << "instance " << i;
        ASSERT_EQ(divide_by_sum(phi).times_sum(), phi) << "instance " << i;
    }
}

TEST(PolymatProperty, NotDivisibleWhenNotSkewAdjoint) {
    std::mt19937 rng(3);
    int rejected = 0;
    for (int i = 0; i < 200; ++i) {
        OneVarPolyMat j = random_polymat(rng, 2, 2, 2);
        TwoVarPolyMat phi = TwoVarPolyMat::in_eta(j) + TwoVarPolyMat::in_zeta(j.transpose());
        bool skew = classify_adjointness(j) == Adjointness::skew_adjoint || j.is_zero();
        if (skew) continue;
        // Φ(-s,s) = J(s) + J^T(-s) vanishes exactly for skew-adjoint J.
        EXPECT_THROW(divide_by_sum(phi), NotDivisible) << "instance " << i;
        ++rejected;
    }
    EXPECT_GT(rejected, 150);
}

TEST(PolymatProperty, ReflectDiagonalOfSymmetricIsSelfAdjoint) {
    std::mt19937 rng(4);
    std::uniform_int_distribution<int> dim(1, 3), deg(0, 3);
    for (int i = 0; i < 200; ++i) {
        TwoVarPolyMat h = random_symmetric_two_var(rng, static_cast<std::size_t>(dim(rng)), deg(rng));
        OneVarPolyMat q = reflect_diagonal(h);
        ASSERT_EQ(formal_adjoint(q), q) << "instance " << i;
    }
}

TEST(PolymatProperty, BoundaryRemainderIdentity) {
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> dim(1, 3), deg(0, 3);
    for (int i = 0; i < 200; ++i) {
        std::size_t n = static_cast<std::size_t>(dim(rng));
        TwoVarPolyMat h = TwoVarPolyMat::from_coefficient_matrix(random_matrix(rng, n * 3, n * 3), n, n);
        TwoVarPolyMat hb = boundary_remainder(h);
        ASSERT_EQ(h - TwoVarPolyMat::in_eta(reflect_diagonal(h)), hb.times_sum()) << "instance " << i;
    }
}
