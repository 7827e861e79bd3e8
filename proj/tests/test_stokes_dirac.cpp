#include <gtest/gtest.h>

#include <cmath>

#include "stokes/fd.hpp"
#include "stokes/stokes_dirac.hpp"
#include "support.hpp"

using namespace stokes;
using namespace stokes::testing;

namespace {

const double r2 = 1.0 / std::sqrt(2.0);

HamiltonianOperator shift() { return HamiltonianOperator(OneVarPolyMat(1, 1, {QMatrix{{0}}, QMatrix{{1}}})); }

HamiltonianOperator rod_J1() {
    return HamiltonianOperator(OneVarPolyMat(3, 3, {QMatrix{{0, 0, 1}, {0, 0, 0}, {-1, 0, 0}}, QMatrix{{0, 0, 0}, {0, 0, 1}, {0, 1, 0}}}));
}

/// T(∂z)e at one end for a degree-0 T.
std::vector<double> apply_constant(const DiracStructure& d, const std::vector<double>& e) {
    PolyMat1<double> t = d.numeric_T();
    std::vector<double> out(t.rows(), 0.0);
    for (std::size_t i = 0; i < t.rows(); ++i)
        for (std::size_t j = 0; j < t.cols(); ++j) out[i] += t.coeff(0)(i, j) * e[j];
    return out;
}

std::vector<double> random_vector(std::mt19937& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

}  // namespace

TEST(BuildStokesDirac, ScalarShift) {
    DiracStructure d = build_stokes_dirac(shift());
    EXPECT_EQ(d.delta(), 1u);
    EXPECT_EQ(d.sig.sigma(), QMatrix{{1}});
    EXPECT_EQ(d.T, OneVarPolyMat(QMatrix{{1}}));
    EXPECT_EQ(d.scale, std::vector<Rational>{Rational(1)});
}

TEST(BuildStokesDirac, RodOperator) {
    DiracStructure d = build_stokes_dirac(rod_J1());
    EXPECT_EQ(d.sig, (Signature{1, 1}));
    QMatrix both(4, 3);
    both.set_block(0, 0, d.T.coeff(0));
    both.set_block(2, 0, QMatrix{{0, 0, 1}, {0, 1, 0}});
    EXPECT_EQ(rank(both), 2u);
    EXPECT_EQ(outer_product(d.T, QMatrix::diag({d.scale[0], -d.scale[1]}), d.T).times_sum(), d.Phi);
}

TEST(BuildStokesDirac, ConstantSymplecticHasNoPorts) {
    DiracStructure d = build_stokes_dirac(HamiltonianOperator(OneVarPolyMat(QMatrix{{0, 1}, {-1, 0}})));
    EXPECT_TRUE(d.Phi.is_zero());
    EXPECT_EQ(d.delta(), 0u);
    PowerPorts p = boundary_port_values(d, BoundaryTrace{});
    EXPECT_TRUE(p.f.empty());
    EXPECT_TRUE(p.e.empty());
}

TEST(BuildStokesDirac, RejectsNonSkewAdjoint) {
    try {
        HamiltonianOperator(OneVarPolyMat(1, 1, {QMatrix{{1}}, QMatrix{{1}}}));
        FAIL() << "expected NotSkewAdjoint";
    } catch (const NotSkewAdjoint& e) {
        EXPECT_EQ(e.block, 0);
    }
}

TEST(BoundaryPortValues, ScalarShift) {
    DiracStructure d = build_stokes_dirac(shift());
    double ea = 0.3, eb = -1.7;
    PowerPorts p = boundary_port_values(d, {{ea}, {eb}});
    EXPECT_NEAR(p.f[0], (eb + ea) * r2, 1e-15);
    EXPECT_NEAR(p.e[0], (eb - ea) * r2, 1e-15);
}

TEST(BoundaryPortValues, ZeroTrace) {
    DiracStructure d = build_stokes_dirac(rod_J1());
    PowerPorts p = boundary_port_values(d, {{0, 0}, {0, 0}});
    for (double v : p.f) EXPECT_EQ(v, 0.0);
    for (double v : p.e) EXPECT_EQ(v, 0.0);
}

TEST(BoundaryPortValues, LengthMismatch) {
    DiracStructure d = build_stokes_dirac(rod_J1());
    EXPECT_THROW(boundary_port_values(d, {{1.0}, {1.0}}), DimensionError);
}

TEST(BoundaryPortValues, RodPairingIsBoundaryPower) {
    // e = (F, σ, v); f∂^T e∂ = [vσ]_a^b.
    DiracStructure d = build_stokes_dirac(rod_J1());
    std::vector<double> ea{0.4, 1.5, -0.7}, eb{-0.2, 0.9, 2.1};
    PowerPorts p = boundary_port_values(d, {apply_constant(d, ea), apply_constant(d, eb)});
    double fe = p.f[0] * p.e[0] + p.f[1] * p.e[1];
    EXPECT_NEAR(fe, eb[1] * eb[2] - ea[1] * ea[2], 1e-14);
}

TEST(EvenPortSplit, RodPairingMatches) {
    DiracStructure d = build_stokes_dirac(rod_J1());
    std::mt19937 rng(41);
    for (int i = 0; i < 20; ++i) {
        BoundaryTrace t1{random_vector(rng, 2), random_vector(rng, 2)}, t2{random_vector(rng, 2), random_vector(rng, 2)};
        double full = port_pairing(boundary_port_values(d, t1), boundary_port_values(d, t2));
        double split = port_pairing(even_port_split(d, t1), even_port_split(d, t2));
        EXPECT_NEAR(full, split, 1e-13);
        EXPECT_NEAR(full, boundary_form(d, t1, t2), 1e-13);
    }
}

TEST(EvenPortSplit, ZeroTrace) {
    DiracStructure d = build_stokes_dirac(rod_J1());
    PowerPorts p = even_port_split(d, {{0, 0}, {0, 0}});
    for (double v : p.f) EXPECT_EQ(v, 0.0);
    for (double v : p.e) EXPECT_EQ(v, 0.0);
}

TEST(EvenPortSplit, OddSignatureRejected) {
    DiracStructure d = build_stokes_dirac(shift());
    EXPECT_THROW(even_port_split(d, {{1.0}, {2.0}}), OddSignature);
}

TEST(PairingResidual, ZeroEffort) {
    DiracStructure d = build_stokes_dirac(shift());
    Grid g(0, 1, 16);
    std::vector<double> zero(g.size(), 0.0);
    EXPECT_EQ(pairing_residual(zero, zero, boundary_port_values(d, {{0.0}, {0.0}}), sbp_norm(g, 2)), 0.0);
}

TEST(PairingResidual, LinearEffortOnShift) {
    // e(z) = z, f = ∂z e = 1: ∫ e f = 1/2 = f∂ e∂.
    DiracStructure d = build_stokes_dirac(shift());
    Grid g(0, 1, 32);
    std::vector<double> e(g.size()), f(g.size(), 1.0);
    for (std::size_t i = 0; i < g.size(); ++i) e[i] = g.z(i);
    PowerPorts p = boundary_port_values(d, {{0.0}, {1.0}});
    EXPECT_NEAR(pairing_residual(f, e, p, sbp_norm(g, 2)), 0.0, 1e-15);
    EXPECT_THROW(pairing_residual(f, e, p, std::vector<double>(5, 0.1)), DimensionError);
}

TEST(PairingResidual, RodConvergesUnderRefinement) {
    // e = (sin z, cos 2z, e^z), f = J1(∂z)e; traces exact at z = 0, 1.
    DiracStructure d = build_stokes_dirac(rod_J1());
    auto run = [&](std::size_t N, int q) {
        Grid g(0, 1, N);
        std::size_t m = g.size();
        std::vector<double> e(3 * m), f(3 * m);
        for (std::size_t i = 0; i < m; ++i) {
            double z = g.z(i);
            double e0 = std::sin(z), e1 = std::cos(2 * z), e2 = std::exp(z);
            e[i] = e0;
            e[m + i] = e1;
            e[2 * m + i] = e2;
            f[i] = e2;
            f[m + i] = std::exp(z);
            f[2 * m + i] = -e0 - 2 * std::sin(2 * z);
        }
        auto at = [](double z) { return std::vector<double>{std::sin(z), std::cos(2 * z), std::exp(z)}; };
        PowerPorts p = boundary_port_values(d, {apply_constant(d, at(0.0)), apply_constant(d, at(1.0))});
        return pairing_residual(f, e, p, sbp_norm(g, q));
    };
    for (int q : {2, 4}) {
        double r1 = run(50, q), r2v = run(100, q);
        EXPECT_NEAR(std::log2(r1 / r2v), q, 0.4) << "q=" << q;
    }
}

TEST(StokesDiracProperty, PairingIdentityAndRank) {
    std::mt19937 rng(42);
    std::uniform_int_distribution<int> dim(1, 3), deg(1, 3);
    for (int i = 0; i < 200; ++i) {
        std::size_t n = static_cast<std::size_t>(dim(rng));
        HamiltonianOperator op(random_skew_adjoint(rng, n, deg(rng)));
        DiracStructure d = build_stokes_dirac(op);
        ASSERT_EQ(d.delta(), d.Psi.is_zero() ? 0u : rank(d.Psi.coefficient_matrix())) << "instance " << i;
        DiracStructure again = build_stokes_dirac(op);
        ASSERT_EQ(again.T, d.T);
        if (d.delta() == 0) continue;
        BoundaryTrace t1{random_vector(rng, d.delta()), random_vector(rng, d.delta())};
        BoundaryTrace t2{random_vector(rng, d.delta()), random_vector(rng, d.delta())};
        double lhs = port_pairing(boundary_port_values(d, t1), boundary_port_values(d, t2));
        double rhs = boundary_form(d, t1, t2);
        ASSERT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(rhs))) << "instance " << i;
        if (d.sig.alpha == d.sig.beta) {
            ASSERT_NEAR(port_pairing(even_port_split(d, t1), even_port_split(d, t2)), rhs, 1e-12 * std::max(1.0, std::abs(rhs)));
        }
    }
}
