#pragma once

#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "factorization.hpp"
#include "minors.hpp"

namespace stokes {

struct ReciprocityViolation : std::invalid_argument {
    ReciprocityViolation(const std::string& what, OneVarPolyMat r) : std::invalid_argument(what), residual(std::move(r)) {}
    OneVarPolyMat residual;
};

struct NotMaximal : std::invalid_argument {
    NotMaximal(const std::string& what, Poly g) : std::invalid_argument(what), minor_gcd(std::move(g)) {}
    Poly minor_gcd;
};

struct ReciprocityReport {
    bool ok = false;
    OneVarPolyMat residual;  ///< S^T(-s)P(s) - P^T(-s)S(s)
};

/// Explicit coefficient conditions for operators of degree at most two.
inline bool reciprocity_conditions_second_order(const OneVarPolyMat& P, const OneVarPolyMat& S) {
    if (P.degree() > 2 || S.degree() > 2) throw std::invalid_argument("second-order conditions need degree <= 2");
    QMatrix P0 = P.coeff(0), P1 = P.coeff(1), P2 = P.coeff(2);
    QMatrix S0 = S.coeff(0), S1 = S.coeff(1), S2 = S.coeff(2);
    auto t = [](const QMatrix& m) { return m.transpose(); };
    QMatrix a = t(S0) * P0, b = t(S2) * P2;
    QMatrix c = t(P0) * S1 - t(S0) * P1, d = t(P1) * S2 - t(S1) * P2;
    QMatrix e = t(P0) * S2 - t(S0) * P2 + t(S1) * P1;
    return is_symmetric(a) && is_symmetric(b) && is_skew(c) && is_skew(d) && is_symmetric(e);
}

inline ReciprocityReport check_reciprocity(const OneVarPolyMat& P, const OneVarPolyMat& S) {
    if (P.rows() != P.cols() || S.rows() != S.cols() || P.rows() != S.rows())
        throw DimensionError("check_reciprocity: P and S must be square of equal size");
    ReciprocityReport r;
    r.residual = formal_adjoint(S) * P - formal_adjoint(P) * S;
    r.ok = r.residual.is_zero();
    if (P.degree() <= 2 && S.degree() <= 2 && reciprocity_conditions_second_order(P, S) != r.ok)
        throw std::logic_error("check_reciprocity: disagreement with the second-order coefficient conditions");
    return r;
}

inline bool check_maximality(const OneVarPolyMat& P, const OneVarPolyMat& S) { return constant_full_rank(vstack(P, S)); }

namespace detail {
inline std::string first_nonzero(const OneVarPolyMat& r) {
    for (int k = 0; k <= r.degree(); ++k) {
        const QMatrix& m = r.coeffs()[static_cast<std::size_t>(k)];
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (std::size_t j = 0; j < m.cols(); ++j)
                if (!m(i, j).is_zero())
                    return "entry (" + std::to_string(i) + "," + std::to_string(j) + ") of the s^" + std::to_string(k) +
                           " coefficient is " + m(i, j).str();
    }
    return "none";
}
}  // namespace detail

/// R = (P; S), validated for reciprocity and maximality at construction.
class ReciprocalOperator {
public:
    ReciprocalOperator() = default;
    ReciprocalOperator(OneVarPolyMat P, OneVarPolyMat S) : P_(std::move(P)), S_(std::move(S)) {
        ReciprocityReport rep = check_reciprocity(P_, S_);
        if (!rep.ok)
            throw ReciprocityViolation("reciprocity residual nonzero: " + detail::first_nonzero(rep.residual), rep.residual);
        if (P_.rows() > 0) {
            Poly g = maximal_minor_gcd(R());
            if (g.degree() != 0) {
                std::ostringstream os;
                os << "R(s) = (P; S) is not maximal: gcd of the maximal minors has degree " << g.degree();
                throw NotMaximal(os.str(), g);
            }
        }
    }
    const OneVarPolyMat& P() const { return P_; }
    const OneVarPolyMat& S() const { return S_; }
    OneVarPolyMat R() const { return vstack(P_, S_); }
    std::size_t n() const { return P_.rows(); }
    int order() const { return std::max(P_.degree(), S_.degree()); }

private:
    OneVarPolyMat P_, S_;
};

struct LagrangeStructure {
    OneVarPolyMat Pb, Sb;
    std::size_t p = 0;
    TwoVarPolyMat PhiBar, PsiBar;
    TwoVarPolyMat H, H0;

    OneVarPolyMat Rb() const { return vstack(Pb, Sb); }
};

inline TwoVarPolyMat natural_hamiltonian(const ReciprocalOperator& r) {
    OneVarPolyMat R = r.R();
    return Rational(1, 2) * outer_product(R, xi(r.n()), R);
}

inline TwoVarPolyMat canonical_hamiltonian(const ReciprocalOperator& r, const LagrangeStructure& lb) {
    TwoVarPolyMat h0 = natural_hamiltonian(r);
    if (lb.p == 0) return h0;
    OneVarPolyMat Rb = lb.Rb();
    if (Rb.cols() != r.n()) throw DimensionError("canonical_hamiltonian: boundary operator width mismatch");
    TwoVarPolyMat corr = Rational(1, 2) * outer_product(Rb, xi(lb.p), Rb).times_sum();
    TwoVarPolyMat h = h0 - corr;
    if (!h.is_symmetric()) throw std::logic_error("canonical_hamiltonian: result is not symmetric");
    if (!(reflect_diagonal(h) == formal_adjoint(r.S()) * r.P()))
        throw std::logic_error("canonical_hamiltonian: variational derivative mismatch");
    return h;
}

/// Derives R∂ = (P∂; S∂) and both Hamiltonian densities. When gauge is given, R∂ is re-expressed
/// in that gauge (the two must differ by a symplectic left factor).
inline LagrangeStructure boundary_operator(const ReciprocalOperator& r, const std::optional<OneVarPolyMat>& gauge = std::nullopt) {
    OneVarPolyMat R = r.R();
    LagrangeStructure lb;
    lb.PhiBar = outer_product(R, theta(r.n()), R);
    lb.PsiBar = divide_by_sum(lb.PhiBar);
    SymplecticFactorization f = symplectic_factorization(lb.PsiBar);
    if (gauge && !align_gauge(f, *gauge)) throw std::invalid_argument("boundary_operator: requested gauge is not symplectically equivalent");
    lb.p = f.p;
    lb.Pb = f.p ? f.Pb() : OneVarPolyMat(0, r.n());
    lb.Sb = f.p ? f.Sb() : OneVarPolyMat(0, r.n());
    // S^T(ζ)P(η) - P^T(ζ)S(η) = (ζ+η)[S∂^T(ζ)P∂(η) - P∂^T(ζ)S∂(η)]
    if (f.p) {
        TwoVarPolyMat lhs = outer_product(R, theta(r.n()), R);
        TwoVarPolyMat rhs = outer_product(lb.Rb(), theta(f.p), lb.Rb()).times_sum();
        if (!(lhs == rhs)) throw std::logic_error("boundary_operator: boundary identity failed");
    } else if (!lb.PhiBar.is_zero()) {
        throw std::logic_error("boundary_operator: nonzero boundary form with p = 0");
    }
    lb.H0 = natural_hamiltonian(r);
    lb.H = canonical_hamiltonian(r, lb);
    return lb;
}

/// H belongs to the family H0 + (ζ+η)Γ with Γ symmetric of degree at most M-1.
inline bool verify_hamiltonian_compatibility(const TwoVarPolyMat& h, const ReciprocalOperator& r) {
    if (!h.is_symmetric()) return false;
    TwoVarPolyMat diff = h - natural_hamiltonian(r);
    try {
        TwoVarPolyMat gamma = divide_by_sum(diff);
        return gamma.is_symmetric() && gamma.degree() <= r.order() - 1;
    } catch (const NotDivisible&) {
        return false;
    }
}

/// Derivatives ∂^k ξ at the ends: at_a[k], at_b[k] are state vectors of length n.
struct BoundaryJets {
    std::vector<std::vector<double>> at_a, at_b;
};

/// χ∂ = (P∂ξ(a); P∂ξ(b)), ε∂ = (S∂ξ(a); S∂ξ(b)).
struct EnergyPorts {
    std::vector<double> chi, eps;
};

inline std::vector<double> apply_at(const PolyMat1<double>& op, const std::vector<std::vector<double>>& jet) {
    std::vector<double> out(op.rows(), 0.0);
    if (op.degree() >= static_cast<int>(jet.size()))
        throw std::invalid_argument("insufficient jet order: need derivatives up to " + std::to_string(op.degree()));
    for (int k = 0; k <= op.degree(); ++k) {
        const Matrix<double>& m = op.coeffs()[static_cast<std::size_t>(k)];
        const std::vector<double>& v = jet[static_cast<std::size_t>(k)];
        if (v.size() != m.cols()) throw DimensionError("apply_at: jet width mismatch");
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (std::size_t j = 0; j < m.cols(); ++j) out[i] += m(i, j) * v[j];
    }
    return out;
}

inline EnergyPorts energy_boundary_values(const LagrangeStructure& lb, const BoundaryJets& jets) {
    PolyMat1<double> pb = to_double(lb.Pb), sb = to_double(lb.Sb);
    EnergyPorts e;
    auto ca = apply_at(pb, jets.at_a), cb = apply_at(pb, jets.at_b);
    auto ea = apply_at(sb, jets.at_a), eb = apply_at(sb, jets.at_b);
    e.chi = ca;
    e.chi.insert(e.chi.end(), cb.begin(), cb.end());
    e.eps = ea;
    e.eps.insert(e.eps.end(), eb.begin(), eb.end());
    return e;
}

}  // namespace stokes
