#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "factorization.hpp"

namespace stokes {

struct NotSkewAdjoint : std::invalid_argument {
    NotSkewAdjoint(int k, const std::string& what) : std::invalid_argument(what), block(k) {}
    int block;  ///< offending coefficient index
};

struct OddSignature : std::invalid_argument {
    OddSignature(std::size_t a, std::size_t b)
        : std::invalid_argument("even port split needs alpha == beta, got alpha=" + std::to_string(a) +
                                ", beta=" + std::to_string(b)) {}
};

/// Formally skew-adjoint J(s) = -J^T(-s).
class HamiltonianOperator {
public:
    HamiltonianOperator() = default;
    explicit HamiltonianOperator(OneVarPolyMat j) : j_(std::move(j)) {
        if (j_.rows() != j_.cols()) throw DimensionError("Hamiltonian operator must be square");
        for (int k = 0; k <= j_.degree(); ++k) {
            const QMatrix& jk = j_.coeffs()[static_cast<std::size_t>(k)];
            bool ok = (k % 2) ? is_symmetric(jk) : is_skew(jk);
            if (!ok)
                throw NotSkewAdjoint(k, "J is not formally skew-adjoint: coefficient J_" + std::to_string(k) + " must be " +
                                            ((k % 2) ? "symmetric" : "skew-symmetric"));
        }
    }
    const OneVarPolyMat& J() const { return j_; }
    int order() const { return j_.degree(); }
    std::size_t state_dim() const { return j_.rows(); }

private:
    OneVarPolyMat j_;
};

struct DiracStructure {
    TwoVarPolyMat Phi;  ///< J(η) + J^T(ζ)
    TwoVarPolyMat Psi;  ///< Φ / (ζ+η)
    OneVarPolyMat T;
    Signature sig;
    std::vector<Rational> scale;

    std::size_t delta() const { return sig.delta(); }

    /// T with sqrt(scale) folded into its rows, so that T^T Σ T = Ψ in floating point.
    PolyMat1<double> numeric_T() const {
        PolyMat1<double> t = to_double(T);
        std::vector<Matrix<double>> c = t.coeffs();
        for (auto& m : c)
            for (std::size_t i = 0; i < m.rows(); ++i) {
                double s = std::sqrt(scale[i].to_double());
                for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) *= s;
            }
        return PolyMat1<double>(t.rows(), t.cols(), std::move(c));
    }
};

inline DiracStructure build_stokes_dirac(const HamiltonianOperator& op) {
    const OneVarPolyMat& j = op.J();
    DiracStructure d;
    d.Phi = TwoVarPolyMat::in_eta(j) + TwoVarPolyMat::in_zeta(j.transpose());
    d.Psi = divide_by_sum(d.Phi);
    SignatureFactorization f = signature_factorization(d.Psi);
    d.T = f.T;
    d.sig = f.sig;
    d.scale = f.scale;
    if (!(outer_product(d.T, f.weighted_sigma(), d.T).times_sum() == d.Phi))
        throw std::logic_error("build_stokes_dirac: defining identity failed");
    return d;
}

/// T(∂z)e evaluated at both ends, each of length δ.
struct BoundaryTrace {
    std::vector<double> at_a, at_b;
};

struct PowerPorts {
    std::vector<double> f, e;
};

namespace detail {
inline void check_trace(const DiracStructure& d, const BoundaryTrace& tr) {
    if (tr.at_a.size() != d.delta() || tr.at_b.size() != d.delta())
        throw DimensionError("boundary trace length " + std::to_string(tr.at_a.size()) + "/" +
                             std::to_string(tr.at_b.size()) + " does not match delta=" + std::to_string(d.delta()));
}
}  // namespace detail

/// f∂ = Σ(tr_a + tr_b)/√2, e∂ = (tr_b − tr_a)/√2.
inline PowerPorts boundary_port_values(const DiracStructure& d, const BoundaryTrace& tr) {
    detail::check_trace(d, tr);
    const double r = 1.0 / std::sqrt(2.0);
    PowerPorts p;
    for (std::size_t i = 0; i < d.delta(); ++i) {
        double s = i < d.sig.alpha ? 1.0 : -1.0;
        p.f.push_back(s * (tr.at_a[i] + tr.at_b[i]) * r);
        p.e.push_back((tr.at_b[i] - tr.at_a[i]) * r);
    }
    return p;
}

/// Endpoint-local ports for α = β: f = (f^a, f^b), e = (e^a, e^b), each block of length α.
inline PowerPorts even_port_split(const DiracStructure& d, const BoundaryTrace& tr) {
    if (d.sig.alpha != d.sig.beta) throw OddSignature(d.sig.alpha, d.sig.beta);
    detail::check_trace(d, tr);
    const double r = 1.0 / std::sqrt(2.0);
    std::size_t a = d.sig.alpha;
    PowerPorts p;
    p.f.resize(2 * a);
    p.e.resize(2 * a);
    for (std::size_t i = 0; i < a; ++i) {
        double xa = tr.at_a[i], ya = tr.at_a[a + i], xb = tr.at_b[i], yb = tr.at_b[a + i];
        p.f[i] = (xa + ya) * r;
        p.e[i] = (ya - xa) * r;  // outward orientation at the left end
        p.f[a + i] = (xb + yb) * r;
        p.e[a + i] = (xb - yb) * r;
    }
    return p;
}

/// [D_Ψ(e1, e2)]_a^b computed from traces of T(∂z)e1 and T(∂z)e2.
inline double boundary_form(const DiracStructure& d, const BoundaryTrace& t1, const BoundaryTrace& t2) {
    detail::check_trace(d, t1);
    detail::check_trace(d, t2);
    double v = 0.0;
    for (std::size_t i = 0; i < d.delta(); ++i) {
        double s = i < d.sig.alpha ? 1.0 : -1.0;
        v += s * (t1.at_b[i] * t2.at_b[i] - t1.at_a[i] * t2.at_a[i]);
    }
    return v;
}

/// f2^T e1 + e2^T f1
inline double port_pairing(const PowerPorts& p1, const PowerPorts& p2) {
    if (p1.f.size() != p2.f.size() || p1.e.size() != p2.e.size()) throw DimensionError("port_pairing: length mismatch");
    double v = 0.0;
    for (std::size_t i = 0; i < p1.f.size(); ++i) v += p2.f[i] * p1.e[i] + p2.e[i] * p1.f[i];
    return v;
}

/// |∫ e^T f dz − f∂^T e∂| with f, e given component-major on the quadrature nodes.
inline double pairing_residual(const std::vector<double>& f, const std::vector<double>& e, const PowerPorts& ports,
                               const std::vector<double>& weights) {
    std::size_t m = weights.size();
    if (m == 0 || f.size() != e.size() || f.size() % m != 0) throw DimensionError("pairing_residual: grid mismatch");
    double integral = 0.0;
    for (std::size_t c = 0; c < f.size() / m; ++c)
        for (std::size_t i = 0; i < m; ++i) integral += weights[i] * e[c * m + i] * f[c * m + i];
    double boundary = 0.0;
    for (std::size_t i = 0; i < ports.f.size(); ++i) boundary += ports.f[i] * ports.e[i];
    return std::abs(integral - boundary);
}

}  // namespace stokes
