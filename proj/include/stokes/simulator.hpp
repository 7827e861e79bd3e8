#pragma once

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "banded.hpp"
#include "fd.hpp"
#include "system.hpp"

namespace stokes {

struct InconsistentInitialData : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct LinearSolveFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Boundary data entering the right-hand side b of a step. Rate entries contribute
/// weight·(g(t1) − g(t0))/dt, Value entries weight·g((t0 + t1)/2).
struct Forcing {
    enum class Kind { rate, value };
    Eigen::Index row = 0;
    Kind kind = Kind::rate;
    double weight = 0.0;
    TimeProfile profile;
};

struct DirichletRow {
    Eigen::Index row = 0;
    double inv_coefficient = 1.0;
    TimeProfile profile;
};

struct DiscreteSystem {
    Grid grid;
    std::size_t n = 0;
    int order = 2;
    SpMat Ph, Ah;
    std::vector<double> quad;
    SpMat eliminated;  ///< entries of Ph moved to the right-hand side (Dirichlet columns)
    std::vector<DirichletRow> dirichlet;
    std::vector<Forcing> forcing;

    // audit data
    std::vector<SpMat> Dk;                 ///< powers of the Fornberg first derivative, k = 0..kmax
    std::vector<TraceStencil> traces;      ///< trace stencils, k = 0..kmax
    PolyMat1<double> S, T, Pb, Sb;
    PolyMat2<double> H, H0;
    std::size_t delta = 0, p = 0;
    DiracStructure dirac;
    LagrangeStructure lagrange;

    Eigen::Index index(std::size_t node, std::size_t comp) const { return static_cast<Eigen::Index>(node * n + comp); }
    Eigen::Index size() const { return static_cast<Eigen::Index>(grid.size() * n); }

    /// Right-hand side boundary contribution for the step [t0, t1].
    Eigen::VectorXd forcing_vector(double t0, double t1) const {
        Eigen::VectorXd b = Eigen::VectorXd::Zero(size());
        double dt = t1 - t0, tm = 0.5 * (t0 + t1);
        for (const Forcing& f : forcing) {
            double g = f.kind == Forcing::Kind::rate ? (f.profile.value(t1) - f.profile.value(t0)) / dt : f.profile.value(tm);
            b(f.row) += f.weight * g;
        }
        return b;
    }
};

namespace detail {

inline void kron_add(std::vector<Triplet>& t, const SpMat& D, const Matrix<double>& C, std::size_t n, std::optional<std::size_t> only_col = {}) {
    for (int i = 0; i < D.outerSize(); ++i)
        for (SpMat::InnerIterator it(D, i); it; ++it)
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < n; ++c) {
                    if (only_col && c != *only_col) continue;
                    double v = C(r, c);
                    if (v == 0.0) continue;
                    t.emplace_back(static_cast<int>(static_cast<std::size_t>(i) * n + r), static_cast<int>(static_cast<std::size_t>(it.col()) * n + c),
                                   it.value() * v);
                }
}

inline bool column_nonzero(const Matrix<double>& m, std::size_t c) {
    for (std::size_t r = 0; r < m.rows(); ++r)
        if (m(r, c) != 0.0) return true;
    return false;
}

inline SpMat assemble(const Grid& g, int q, const PolyMat1<double>& C, std::size_t n, const std::vector<bool>& neu_a,
                      const std::vector<bool>& neu_b) {
    std::vector<Triplet> t;
    std::optional<SecondDerivative> d2;
    for (int m = 0; m <= C.degree(); ++m) {
        const Matrix<double>& Cm = C.coeffs()[static_cast<std::size_t>(m)];
        if (Cm.is_zero()) continue;
        if (m == 0) {
            SpMat I(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(g.size()));
            I.setIdentity();
            kron_add(t, I, Cm, n);
        } else if (m == 1) {
            kron_add(t, sbp_d1(g, q), Cm, n);
        } else if (m == 2) {
            if (!d2) d2 = sbp_d2(g, q);
            for (std::size_t c = 0; c < n; ++c) {
                SpMat Dc = d2->interior;
                if (!neu_a[c]) Dc += d2->left;
                if (!neu_b[c]) Dc += d2->right;
                kron_add(t, Dc, Cm, n, c);
            }
        } else {
            kron_add(t, derivative_matrix(g, m, q), Cm, n);
        }
    }
    SpMat A(static_cast<Eigen::Index>(g.size() * n), static_cast<Eigen::Index>(g.size() * n));
    A.setFromTriplets(t.begin(), t.end());
    A.prune(0.0);
    return A;
}

inline SpMat replace_rows_with_unit(const SpMat& A, const std::vector<bool>& is_dir, bool unit) {
    std::vector<Triplet> t;
    for (int i = 0; i < A.outerSize(); ++i) {
        if (is_dir[static_cast<std::size_t>(i)]) {
            if (unit) t.emplace_back(i, i, 1.0);
            continue;
        }
        for (SpMat::InnerIterator it(A, i); it; ++it) t.emplace_back(i, static_cast<int>(it.col()), it.value());
    }
    SpMat B(A.rows(), A.cols());
    B.setFromTriplets(t.begin(), t.end());
    return B;
}

}  // namespace detail

/// Spatial discretization with boundary conditions woven into the rows of Ph and Ah.
inline DiscreteSystem discretize(const SystemDefinition& sys, const DerivedStructures& ds, std::size_t N, int q) {
    if (q != 2 && q != 4) throw ValidationError("scheme order must be 2 or 4");
    DiscreteSystem D;
    D.grid = Grid(sys.a, sys.b, N);
    D.n = sys.n();
    D.order = q;
    const std::size_t n = D.n, nodes = D.grid.size();
    if (sys.J.state_dim() != n) throw ValidationError("J and R have different state dimensions");

    OneVarPolyMat Cq = sys.J.J() * sys.R.S();
    PolyMat1<double> C = to_double(Cq), P = to_double(sys.R.P());
    D.S = to_double(sys.R.S());
    D.T = ds.dirac.delta() ? ds.dirac.numeric_T() : PolyMat1<double>(0, n);
    D.Pb = to_double(ds.lagrange.Pb);
    D.Sb = to_double(ds.lagrange.Sb);
    D.H = to_double(ds.lagrange.H);
    D.H0 = to_double(ds.lagrange.H0);
    D.delta = ds.dirac.delta();
    D.p = ds.lagrange.p;
    D.dirac = ds.dirac;
    D.lagrange = ds.lagrange;

    std::vector<bool> neu_a(n, false), neu_b(n, false);
    for (const BoundaryCondition& bc : sys.bcs) {
        if (bc.component >= n) throw ValidationError("boundary condition component out of range");
        if (bc.coefficient.is_zero()) throw ValidationError("boundary condition coefficient must be nonzero");
        if (bc.kind != BoundaryCondition::Kind::neumann) continue;
        if (!detail::column_nonzero(C.coeff(2), bc.component))
            throw ValidationError("neumann condition on component " + std::to_string(bc.component) + " without a second-derivative term");
        if (detail::column_nonzero(P.coeff(2), bc.component))
            throw ValidationError("neumann condition on component " + std::to_string(bc.component) + " where P has a second-derivative term");
        for (int m = 3; m <= C.degree(); ++m)
            if (detail::column_nonzero(C.coeff(m), bc.component))
                throw ValidationError("neumann condition on component " + std::to_string(bc.component) + " with derivatives above order two");
        (bc.end == BoundaryCondition::End::a ? neu_a : neu_b)[bc.component] = true;
    }

    SpMat Ah = detail::assemble(D.grid, q, C, n, neu_a, neu_b);
    SpMat Ph = detail::assemble(D.grid, q, P, n, neu_a, neu_b);

    std::vector<bool> is_dir(static_cast<std::size_t>(D.size()), false);
    for (const BoundaryCondition& bc : sys.bcs) {
        std::size_t node = bc.end == BoundaryCondition::End::a ? 0 : nodes - 1;
        Eigen::Index row = D.index(node, bc.component);
        if (bc.kind == BoundaryCondition::Kind::dirichlet) {
            if (is_dir[static_cast<std::size_t>(row)]) throw ValidationError("duplicate boundary condition on one component and end");
            is_dir[static_cast<std::size_t>(row)] = true;
            D.dirichlet.push_back({row, 1.0 / bc.coefficient.to_double(), bc.data});
            D.forcing.push_back({row, Forcing::Kind::rate, 1.0 / bc.coefficient.to_double(), bc.data});
        }
    }
    for (const BoundaryCondition& bc : sys.bcs) {
        if (bc.kind != BoundaryCondition::Kind::neumann || bc.data.is_zero()) continue;
        bool at_a = bc.end == BoundaryCondition::End::a;
        std::size_t node = at_a ? 0 : nodes - 1;
        double w = sbp_norm(D.grid, q)[node];
        double sgn = at_a ? -1.0 : 1.0;
        Matrix<double> C2 = C.coeff(2);
        for (std::size_t r = 0; r < n; ++r) {
            Eigen::Index row = D.index(node, r);
            if (C2(r, bc.component) == 0.0 || is_dir[static_cast<std::size_t>(row)]) continue;
            D.forcing.push_back({row, Forcing::Kind::value, sgn * C2(r, bc.component) / (bc.coefficient.to_double() * w), bc.data});
        }
    }

    Ah = detail::replace_rows_with_unit(Ah, is_dir, false);
    Ph = detail::replace_rows_with_unit(Ph, is_dir, true);

    // move Dirichlet columns of Ph to the right-hand side
    std::vector<Triplet> keep, moved;
    for (int i = 0; i < Ph.outerSize(); ++i)
        for (SpMat::InnerIterator it(Ph, i); it; ++it) {
            auto j = static_cast<std::size_t>(it.col());
            if (is_dir[j] && static_cast<std::size_t>(i) != j)
                moved.emplace_back(i, static_cast<int>(j), it.value());
            else
                keep.emplace_back(i, static_cast<int>(j), it.value());
        }
    D.Ph = SpMat(Ph.rows(), Ph.cols());
    D.Ph.setFromTriplets(keep.begin(), keep.end());
    D.eliminated = SpMat(Ph.rows(), Ph.cols());
    D.eliminated.setFromTriplets(moved.begin(), moved.end());
    std::vector<double> inv_coef(static_cast<std::size_t>(D.size()), 0.0);
    std::vector<const TimeProfile*> prof(static_cast<std::size_t>(D.size()), nullptr);
    for (const DirichletRow& d : D.dirichlet) {
        inv_coef[static_cast<std::size_t>(d.row)] = d.inv_coefficient;
        prof[static_cast<std::size_t>(d.row)] = &d.profile;
    }
    for (const Triplet& m : moved)
        D.forcing.push_back({m.row(), Forcing::Kind::rate, -m.value() * inv_coef[static_cast<std::size_t>(m.col())], *prof[static_cast<std::size_t>(m.col())]});
    D.Ah = Ah;

    D.quad = sbp_norm(D.grid, q);

    int jet = std::max({D.S.degree() + std::max(D.T.degree(), 0), D.Pb.degree(), D.Sb.degree(), D.H.degree(), D.H0.degree(), 1});
    // D_k = D_1^k, so that the discrete H and H0 differ by boundary terms as their densities do
    for (int k = 0; k <= jet; ++k) {
        D.Dk.push_back(k < 2 ? derivative_matrix(D.grid, k, q) : SpMat(D.Dk[1] * D.Dk[static_cast<std::size_t>(k - 1)]));
        D.traces.push_back(trace_stencil(D.grid, k, q));
    }
    return D;
}

inline DiscreteSystem discretize(const SystemDefinition& sys, std::size_t N, int q) { return discretize(sys, derive(sys), N, q); }

/// Quadrature of Σ_kl (D_k ξ)^T H_kl (D_l ξ)/2.
inline double hamiltonian_value(const DiscreteSystem& D, const PolyMat2<double>& H, const Eigen::VectorXd& xi) {
    if (H.is_zero()) return 0.0;
    const std::size_t n = D.n, nodes = D.grid.size();
    std::vector<Eigen::VectorXd> v;
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> X(xi.data(), static_cast<Eigen::Index>(nodes),
                                                                                                static_cast<Eigen::Index>(n));
    std::vector<Eigen::MatrixXd> dv;
    for (int k = 0; k <= H.degree(); ++k) dv.push_back(D.Dk[static_cast<std::size_t>(k)] * Eigen::MatrixXd(X));
    double total = 0.0;
    for (int k = 0; k <= H.degree(); ++k)
        for (int l = 0; l <= H.degree(); ++l) {
            Matrix<double> B = H.block(k, l);
            if (B.is_zero()) continue;
            Eigen::MatrixXd Be(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < n; ++c) Be(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = B(r, c);
            Eigen::MatrixXd Y = dv[static_cast<std::size_t>(l)] * Be.transpose();
            for (std::size_t i = 0; i < nodes; ++i)
                total += 0.5 * D.quad[i] * dv[static_cast<std::size_t>(k)].row(static_cast<Eigen::Index>(i)).dot(Y.row(static_cast<Eigen::Index>(i)));
        }
    return total;
}

/// ∂^k ξ at both ends for k = 0..kmax from the trace stencils.
inline BoundaryJets boundary_jets(const DiscreteSystem& D, const Eigen::VectorXd& xi) {
    BoundaryJets j;
    const std::size_t n = D.n, nodes = D.grid.size();
    for (const TraceStencil& ts : D.traces) {
        std::vector<double> a(n, 0.0), b(n, 0.0);
        std::size_t off = nodes - ts.right.size();
        for (std::size_t c = 0; c < n; ++c) {
            for (std::size_t i = 0; i < ts.left.size(); ++i) a[c] += ts.left[i] * xi(D.index(i, c));
            for (std::size_t i = 0; i < ts.right.size(); ++i) b[c] += ts.right[i] * xi(D.index(off + i, c));
        }
        j.at_a.push_back(std::move(a));
        j.at_b.push_back(std::move(b));
    }
    return j;
}

/// T(∂z)S(∂z)ξ at both ends.
inline BoundaryTrace power_trace(const DiscreteSystem& D, const BoundaryJets& jets) {
    BoundaryTrace tr;
    auto one = [&](const std::vector<std::vector<double>>& jet) {
        std::vector<std::vector<double>> ejet;
        for (int k = 0; k <= std::max(D.T.degree(), 0); ++k) {
            std::vector<double> e(D.n, 0.0);
            for (int m = 0; m <= D.S.degree(); ++m) {
                const Matrix<double>& Sm = D.S.coeffs()[static_cast<std::size_t>(m)];
                const std::vector<double>& v = jet[static_cast<std::size_t>(m + k)];
                for (std::size_t r = 0; r < D.n; ++r)
                    for (std::size_t c = 0; c < D.n; ++c) e[r] += Sm(r, c) * v[c];
            }
            ejet.push_back(std::move(e));
        }
        return D.delta ? apply_at(D.T, ejet) : std::vector<double>{};
    };
    tr.at_a = one(jets.at_a);
    tr.at_b = one(jets.at_b);
    return tr;
}

inline EnergyPorts energy_ports(const DiscreteSystem& D, const BoundaryJets& jets) {
    EnergyPorts e;
    auto ca = apply_at(D.Pb, jets.at_a), cb = apply_at(D.Pb, jets.at_b);
    auto ea = apply_at(D.Sb, jets.at_a), eb = apply_at(D.Sb, jets.at_b);
    e.chi = ca;
    e.chi.insert(e.chi.end(), cb.begin(), cb.end());
    e.eps = ea;
    e.eps.insert(e.eps.end(), eb.begin(), eb.end());
    return e;
}

/// Quantities for one step [t_n, t_{n+1}] evaluated at the time midpoint.
struct StepAudit {
    double t = 0.0;  ///< t_{n+1}
    double H = 0.0, H0 = 0.0, dHdt = 0.0, dH0dt = 0.0;
    double power_pairing = 0.0;   ///< e∂^T f∂
    double energy_pairing = 0.0;  ///< [ε∂ Δχ∂/Δt]_a^b
    double energy_pairing_H0 = 0.0;
    double residual = 0.0, residual_H0 = 0.0;
    PowerPorts power;
    EnergyPorts energy;
};

struct BalanceReport {
    std::vector<StepAudit> steps;
    double max_abs_residual = 0.0, max_abs_residual_H0 = 0.0;
    double max_H = 0.0, max_abs_H0 = 0.0;
    double max_rel_residual = 0.0, max_rel_residual_H0 = 0.0;
    double initial_H = 0.0;
};

struct AuditOptions {
    bool include_energy_term = true;  ///< false drops [ε∂ dχ∂/dt]_a^b (negative control)
};

inline StepAudit audit_step(const DiscreteSystem& D, const Eigen::VectorXd& x0, const Eigen::VectorXd& x1, double t0, double t1, double H_0,
                            double H0_0, const AuditOptions& opt = {}) {
    StepAudit s;
    double dt = t1 - t0;
    s.t = t1;
    s.H = hamiltonian_value(D, D.H, x1);
    s.H0 = hamiltonian_value(D, D.H0, x1);
    s.dHdt = (s.H - H_0) / dt;
    s.dH0dt = (s.H0 - H0_0) / dt;
    Eigen::VectorXd mid = 0.5 * (x0 + x1);
    BoundaryJets jm = boundary_jets(D, mid);
    if (D.delta) {
        BoundaryTrace tr = power_trace(D, jm);
        s.power = boundary_port_values(D.dirac, tr);
        for (std::size_t i = 0; i < D.delta; ++i) s.power_pairing += s.power.e[i] * s.power.f[i];
    }
    if (D.p) {
        EnergyPorts e0 = energy_ports(D, boundary_jets(D, x0)), e1 = energy_ports(D, boundary_jets(D, x1));
        s.energy = energy_ports(D, jm);
        for (std::size_t i = 0; i < D.p; ++i) {
            double dchi_a = (e1.chi[i] - e0.chi[i]) / dt, dchi_b = (e1.chi[D.p + i] - e0.chi[D.p + i]) / dt;
            double deps_a = (e1.eps[i] - e0.eps[i]) / dt, deps_b = (e1.eps[D.p + i] - e0.eps[D.p + i]) / dt;
            s.energy_pairing += s.energy.eps[D.p + i] * dchi_b - s.energy.eps[i] * dchi_a;
            s.energy_pairing_H0 += 0.5 * ((s.energy.eps[D.p + i] * dchi_b - deps_b * s.energy.chi[D.p + i]) -
                                          (s.energy.eps[i] * dchi_a - deps_a * s.energy.chi[i]));
        }
    }
    double ew = opt.include_energy_term ? 1.0 : 0.0;
    s.residual = s.dHdt - (s.power_pairing - ew * s.energy_pairing);
    s.residual_H0 = s.dH0dt - (s.power_pairing - ew * s.energy_pairing_H0);
    return s;
}

/// Implicit midpoint: (Ph − dt/2 Ah) ξ_{n+1} = (Ph + dt/2 Ah) ξ_n + dt·b_mid, factored once.
class MidpointStepper {
public:
    MidpointStepper(const DiscreteSystem& D, double dt) : D_(&D), dt_(dt) {
        if (!(dt > 0.0)) throw ValidationError("dt must be positive");
        A_ = SpMat(D.Ph - (0.5 * dt) * D.Ah);
        B_ = SpMat(D.Ph + (0.5 * dt) * D.Ah);
        lu_.factor(A_);
        anorm_ = 0.0;
        for (int i = 0; i < A_.outerSize(); ++i) {
            double r = 0.0;
            for (SpMat::InnerIterator it(A_, i); it; ++it) r += std::abs(it.value());
            anorm_ = std::max(anorm_, r);
        }
    }

    double dt() const { return dt_; }
    double smallest_pivot() const { return lu_.smallest_pivot(); }

    Eigen::VectorXd step(const Eigen::VectorXd& xi, double t) const {
        Eigen::VectorXd rhs = B_ * xi + dt_ * D_->forcing_vector(t, t + dt_);
        Eigen::VectorXd x = lu_.solve(rhs);
        double err = backward_error(x, rhs);
        if (err > 1e-12) {
            x += lu_.solve(Eigen::VectorXd(rhs - A_ * x));
            err = backward_error(x, rhs);
            if (err > 1e-12) throw LinearSolveFailure("linear solve residual " + std::to_string(err) + " exceeds 1e-12");
        }
        return x;
    }

private:
    double backward_error(const Eigen::VectorXd& x, const Eigen::VectorXd& rhs) const {
        double r = (rhs - A_ * x).lpNorm<Eigen::Infinity>();
        double scale = anorm_ * x.lpNorm<Eigen::Infinity>() + rhs.lpNorm<Eigen::Infinity>();
        return scale > 0.0 ? r / scale : r;
    }

    const DiscreteSystem* D_;
    double dt_;
    SpMat A_, B_;
    BandedLU lu_;
    double anorm_ = 0.0;
};

inline Eigen::VectorXd step_midpoint(const DiscreteSystem& D, const Eigen::VectorXd& xi, double dt, double t) {
    return MidpointStepper(D, dt).step(xi, t);
}

/// Energy variable x0 = P(∂z)ξ0 on the grid. Rod presets read the profile as the displacement
/// u0 and set the strain to u0' and the momentum to zero; generic systems place it in one component.
inline Eigen::VectorXd initial_energy_variable(const SystemDefinition& sys, const Grid& g, const InitialProfile& ip) {
    const std::size_t n = sys.n();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.size() * n));
    for (std::size_t i = 0; i < g.size(); ++i) {
        double z = g.z(i);
        double u = ip.value(z, g.a, g.b), du = ip.derivative(z, g.a, g.b);
        auto at = [&](std::size_t c) -> double& { return x(static_cast<Eigen::Index>(i * n + c)); };
        switch (sys.preset) {
            case Preset::rod_symplectic: at(0) = u; break;
            case Preset::rod_first_order:
            case Preset::rod_nonlocal:
                at(0) = u;
                at(1) = du;
                break;
            default:
                if (ip.component >= n) throw ValidationError("initial profile component out of range");
                at(ip.component) = u;
        }
    }
    return x;
}

/// Solves Ph ξ0 = x0 with Dirichlet rows set from the boundary data at t0.
inline Eigen::VectorXd initial_state(const DiscreteSystem& D, const Eigen::VectorXd& x0, double t0 = 0.0) {
    Eigen::VectorXd rhs = x0, g = Eigen::VectorXd::Zero(D.size());
    for (const DirichletRow& d : D.dirichlet) g(d.row) = d.profile.value(t0) * d.inv_coefficient;
    rhs -= D.eliminated * g;
    for (const DirichletRow& d : D.dirichlet) rhs(d.row) = g(d.row);
    BandedLU lu(D.Ph);
    return lu.solve(rhs);
}

struct SimulationOptions {
    std::size_t N = 100;
    double dt = 5e-3;
    double t_end = 1.0;
    int order = 2;
    InitialProfile initial;
    AuditOptions audit;
    bool audit_enabled = true;
    bool keep_states = false;

    static SimulationOptions from(const SimSettings& s) {
        SimulationOptions o;
        o.N = s.N;
        o.dt = s.dt;
        o.t_end = s.t_end;
        o.order = s.scheme_order;
        o.initial = s.initial;
        return o;
    }
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;  ///< filled when keep_states is set
};

struct SimulationResult {
    DiscreteSystem discrete;
    Trajectory trajectory;
    BalanceReport report;
};

using StepObserver = std::function<void(std::size_t step, double t, const Eigen::VectorXd& state)>;

inline std::size_t step_count(double t_end, double dt) {
    if (!(dt > 0.0) || !(t_end > 0.0)) throw ValidationError("dt and t_end must be positive");
    auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
    return std::max<std::size_t>(steps, 1);
}

inline SimulationResult simulate(const SystemDefinition& sys, const DerivedStructures& ds, const SimulationOptions& opt,
                                 const StepObserver& observe = {}) {
    SimulationResult res;
    res.discrete = discretize(sys, ds, opt.N, opt.order);
    const DiscreteSystem& D = res.discrete;
    std::size_t steps = step_count(opt.t_end, opt.dt);
    MidpointStepper stepper(D, opt.dt);
    Eigen::VectorXd xi = initial_state(D, initial_energy_variable(sys, D.grid, opt.initial));

    BalanceReport& rep = res.report;
    double H = 0.0, H0 = 0.0;
    if (opt.audit_enabled) {
        H = hamiltonian_value(D, D.H, xi);
        H0 = hamiltonian_value(D, D.H0, xi);
        rep.initial_H = H;
        rep.max_H = std::abs(H);
        rep.max_abs_H0 = std::abs(H0);
    }
    res.trajectory.times.push_back(0.0);
    if (opt.keep_states) res.trajectory.states.push_back(xi);
    if (observe) observe(0, 0.0, xi);
    for (std::size_t k = 0; k < steps; ++k) {
        double t0 = static_cast<double>(k) * opt.dt, t1 = static_cast<double>(k + 1) * opt.dt;
        Eigen::VectorXd next = stepper.step(xi, t0);
        if (!next.allFinite()) throw LinearSolveFailure("non-finite state at t=" + std::to_string(t1));
        if (opt.audit_enabled) {
            StepAudit a = audit_step(D, xi, next, t0, t1, H, H0, opt.audit);
            H = a.H;
            H0 = a.H0;
            rep.max_H = std::max(rep.max_H, std::abs(a.H));
            rep.max_abs_H0 = std::max(rep.max_abs_H0, std::abs(a.H0));
            rep.max_abs_residual = std::max(rep.max_abs_residual, std::abs(a.residual));
            rep.max_abs_residual_H0 = std::max(rep.max_abs_residual_H0, std::abs(a.residual_H0));
            rep.steps.push_back(std::move(a));
        }
        xi = std::move(next);
        res.trajectory.times.push_back(t1);
        if (opt.keep_states) res.trajectory.states.push_back(xi);
        if (observe) observe(k + 1, t1, xi);
    }
    const double floor = 1e-12;
    rep.max_rel_residual = rep.max_abs_residual / std::max(rep.max_H, floor);
    rep.max_rel_residual_H0 = rep.max_abs_residual_H0 / std::max(rep.max_abs_H0, floor);
    return res;
}

inline SimulationResult simulate(const SystemDefinition& sys, const SimulationOptions& opt, const StepObserver& observe = {}) {
    return simulate(sys, derive(sys), opt, observe);
}

/// Replaces the port-level boundary conditions of a rod preset.
inline void set_port_conditions(SystemDefinition& sys, const PortCondition& a, const PortCondition& b) {
    sys.port_a = a;
    sys.port_b = b;
    sys.bcs = expand_port_conditions(sys);
}

enum class CrossPair { symplectic_vs_first_order, nonlocal_vs_first_order };

/// Max over time of the L2 distance between the displacement fields of two rod models started
/// from the same initial displacement (at rest). The symplectic pair uses clamped ends, the
/// nonlocal pair stress-free ends.
inline double cross_formulation_check(CrossPair pair, const std::map<std::string, Rational>& params, std::size_t N, double dt, double horizon,
                                      const InitialProfile& u0, int order = 2, double a = 0.0, double b = 1.0) {
    std::map<std::string, Rational> local = params;
    std::map<std::string, Rational> nl_params = params;
    local.erase("mu");
    SystemDefinition lhs, rhs = builtin_system(Preset::rod_first_order, local, a, b);
    double scale = 0.0;
    for (int i = 0; i <= 64; ++i) scale = std::max(scale, std::abs(u0.value(a + (b - a) * i / 64.0, a, b)));
    double tol = 1e-8 * std::max(scale, 1.0);
    if (pair == CrossPair::symplectic_vs_first_order) {
        lhs = builtin_system(Preset::rod_symplectic, local, a, b);
        if (std::abs(u0.value(a, a, b)) > tol || std::abs(u0.value(b, a, b)) > tol)
            throw InconsistentInitialData("clamped ends need u0 = 0 at both ends");
        PortCondition clamp{PortCondition::Kind::velocity, {}};
        set_port_conditions(lhs, clamp, clamp);
        set_port_conditions(rhs, clamp, clamp);
    } else {
        lhs = builtin_system(Preset::rod_nonlocal, nl_params, a, b);
        double dtol = tol / (b - a);
        if (std::abs(u0.derivative(a, a, b)) > dtol || std::abs(u0.derivative(b, a, b)) > dtol)
            throw InconsistentInitialData("stress-free ends need u0' = 0 at both ends");
        PortCondition freeend{PortCondition::Kind::stress, {}};
        set_port_conditions(lhs, freeend, freeend);
        set_port_conditions(rhs, freeend, freeend);
    }
    SimulationOptions opt;
    opt.N = N;
    opt.dt = dt;
    opt.t_end = horizon;
    opt.order = order;
    opt.initial = u0;
    opt.audit_enabled = false;
    std::vector<Eigen::VectorXd> ul;
    auto grab = [](std::vector<Eigen::VectorXd>& out, std::size_t n) {
        return [&out, n](std::size_t, double, const Eigen::VectorXd& x) {
            Eigen::VectorXd u(x.size() / static_cast<Eigen::Index>(n));
            for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = x(i * static_cast<Eigen::Index>(n));
            out.push_back(std::move(u));
        };
    };
    simulate(lhs, opt, grab(ul, lhs.n()));
    double dist = 0.0;
    std::vector<double> w;
    std::size_t k = 0;
    simulate(rhs, opt, [&](std::size_t, double, const Eigen::VectorXd& x) {
        if (w.empty()) w = sbp_norm(Grid(a, b, N), order);
        double s = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            double d = x(static_cast<Eigen::Index>(i * rhs.n())) - ul[k](static_cast<Eigen::Index>(i));
            s += w[i] * d * d;
        }
        dist = std::max(dist, std::sqrt(s));
        ++k;
    });
    return dist;
}

struct StudyCell {
    std::size_t N = 0;
    double dt = 0.0;
    double max_rel_residual = 0.0, max_rel_residual_H0 = 0.0, max_abs_residual = 0.0;
};

/// {N, 2N, 4N} x {dt, dt/2, dt/4}; cells[i][j] has N·2^i and dt/2^j.
struct StudyResult {
    std::vector<std::vector<StudyCell>> cells;

    /// log2 ratio between successive diagonal cells (N and dt refined together).
    std::vector<double> diagonal_orders(bool h0 = false) const {
        std::vector<double> out;
        for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
            const StudyCell &c0 = cells[i][i], &c1 = cells[i + 1][i + 1];
            double r0 = h0 ? c0.max_rel_residual_H0 : c0.max_rel_residual, r1 = h0 ? c1.max_rel_residual_H0 : c1.max_rel_residual;
            out.push_back(std::log2(r0 / r1));
        }
        return out;
    }
};

inline StudyResult convergence_study(const SystemDefinition& sys, const SimulationOptions& base) {
    DerivedStructures ds = derive(sys);
    StudyResult r;
    for (std::size_t i = 0; i < 3; ++i) {
        std::vector<StudyCell> row;
        for (std::size_t j = 0; j < 3; ++j) {
            SimulationOptions o = base;
            o.N = base.N << i;
            o.dt = base.dt / static_cast<double>(1u << j);
            SimulationResult s = simulate(sys, ds, o);
            row.push_back({o.N, o.dt, s.report.max_rel_residual, s.report.max_rel_residual_H0, s.report.max_abs_residual});
        }
        r.cells.push_back(std::move(row));
    }
    return r;
}

}  // namespace stokes
