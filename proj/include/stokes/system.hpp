#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stokes_dirac.hpp"
#include "stokes_lagrange.hpp"

namespace stokes {

struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Scalar time signal used for boundary data.
struct TimeProfile {
    enum class Kind { zero, constant, sine, smooth_pulse };
    Kind kind = Kind::zero;
    double amplitude = 0.0;
    double omega = 0.0;   ///< sine angular frequency
    double center = 0.0;  ///< smooth_pulse center time
    double width = 1.0;   ///< smooth_pulse width

    double value(double t) const {
        switch (kind) {
            case Kind::zero: return 0.0;
            case Kind::constant: return amplitude;
            case Kind::sine: return amplitude * std::sin(omega * t);
            case Kind::smooth_pulse: {
                double x = (t - center) / width;
                return amplitude * std::exp(-x * x);
            }
        }
        return 0.0;
    }
    bool is_zero() const { return kind == Kind::zero || amplitude == 0.0; }
    friend bool operator==(const TimeProfile&, const TimeProfile&) = default;
};

/// coefficient·ξ_c(end) = g(t) (dirichlet) or coefficient·∂zξ_c(end) = g(t) (neumann).
struct BoundaryCondition {
    enum class Kind { dirichlet, neumann };
    enum class End { a, b };
    End end = End::a;
    Kind kind = Kind::dirichlet;
    std::size_t component = 0;
    Rational coefficient = Rational(1);
    TimeProfile data;
    friend bool operator==(const BoundaryCondition&, const BoundaryCondition&) = default;
};

/// Port-level boundary condition for the rod presets.
struct PortCondition {
    enum class Kind { velocity, stress };
    Kind kind = Kind::velocity;
    TimeProfile data;
    friend bool operator==(const PortCondition&, const PortCondition&) = default;
};

/// Initial displacement (rod presets) or initial energy-variable component (generic systems).
struct InitialProfile {
    enum class Kind { zero, gaussian, sine_mode };
    Kind kind = Kind::zero;
    double amplitude = 1.0;
    double center = 0.5;
    double width = 0.1;
    int mode = 1;
    double phase = 0.0;
    std::size_t component = 0;

    /// Value and first derivative on [a, b].
    double value(double z, double a, double b) const { return eval(z, a, b, 0); }
    double derivative(double z, double a, double b) const { return eval(z, a, b, 1); }

    double eval(double z, double a, double b, int d) const {
        switch (kind) {
            case Kind::zero: return 0.0;
            case Kind::gaussian: {
                double x = (z - center) / width;
                double g = amplitude * std::exp(-x * x);
                return d == 0 ? g : g * (-2.0 * x / width);
            }
            case Kind::sine_mode: {
                double k = mode * M_PI / (b - a);
                double arg = k * (z - a) + phase;
                return d == 0 ? amplitude * std::sin(arg) : amplitude * k * std::cos(arg);
            }
        }
        return 0.0;
    }
    friend bool operator==(const InitialProfile&, const InitialProfile&) = default;
};

struct SimSettings {
    std::size_t N = 100;
    double dt = 5e-3;
    double t_end = 1.0;
    int scheme_order = 2;
    InitialProfile initial;
    friend bool operator==(const SimSettings&, const SimSettings&) = default;
};

enum class Preset { none, rod_symplectic, rod_first_order, rod_nonlocal };

inline const char* to_string(Preset p) {
    switch (p) {
        case Preset::rod_symplectic: return "rod_symplectic";
        case Preset::rod_first_order: return "rod_first_order";
        case Preset::rod_nonlocal: return "rod_nonlocal";
        default: return "none";
    }
}

inline Preset preset_from_name(const std::string& s) {
    if (s == "rod_symplectic") return Preset::rod_symplectic;
    if (s == "rod_first_order") return Preset::rod_first_order;
    if (s == "rod_nonlocal") return Preset::rod_nonlocal;
    throw ValidationError("unknown builtin system '" + s + "'");
}

struct SystemDefinition {
    std::string name;
    Preset preset = Preset::none;
    HamiltonianOperator J;
    ReciprocalOperator R;
    double a = 0.0, b = 1.0;
    std::map<std::string, Rational> params;
    std::vector<BoundaryCondition> bcs;
    std::optional<PortCondition> port_a, port_b;  ///< set for presets; expanded into bcs
    std::optional<OneVarPolyMat> gauge;           ///< pinned R∂ for presets
    SimSettings sim;

    std::size_t n() const { return R.n(); }
};

/// Everything derived once from a system: Stokes-Dirac and Stokes-Lagrange data.
struct DerivedStructures {
    DiracStructure dirac;
    LagrangeStructure lagrange;
};

inline DerivedStructures derive(const SystemDefinition& sys) {
    DerivedStructures d;
    d.dirac = build_stokes_dirac(sys.J);
    d.lagrange = boundary_operator(sys.R, sys.gauge);
    return d;
}

namespace detail {

inline Rational param(const std::map<std::string, Rational>& p, const std::string& k) {
    auto it = p.find(k);
    if (it == p.end()) throw ValidationError("missing parameter '" + k + "'");
    return it->second;
}

inline QMatrix diag3(Rational x, Rational y, Rational z) { return QMatrix::diag({x, y, z}); }

inline OneVarPolyMat J1() {
    QMatrix P0{{0, 0, 1}, {0, 0, 0}, {-1, 0, 0}};
    QMatrix P1{{0, 0, 0}, {0, 0, 1}, {0, 1, 0}};
    return OneVarPolyMat(3, 3, {P0, P1});
}

}  // namespace detail

/// Translate port-level conditions of a rod preset into state-level boundary conditions.
inline std::vector<BoundaryCondition> expand_port_conditions(const SystemDefinition& sys) {
    std::vector<BoundaryCondition> out;
    Rational T = detail::param(sys.params, "T"), rhoA = detail::param(sys.params, "rhoA");
    auto one = [&](const PortCondition& pc, BoundaryCondition::End end) {
        BoundaryCondition bc;
        bc.end = end;
        bc.data = pc.data;
        switch (sys.preset) {
            case Preset::rod_first_order:
                bc.kind = BoundaryCondition::Kind::dirichlet;
                if (pc.kind == PortCondition::Kind::velocity) {
                    bc.component = 2;
                    bc.coefficient = Rational(1) / rhoA;
                } else {
                    bc.component = 1;
                    bc.coefficient = T;
                }
                out.push_back(bc);
                break;
            case Preset::rod_nonlocal:
                if (pc.kind == PortCondition::Kind::velocity)
                    throw ValidationError("rod_nonlocal supports stress-type ends only (the latent strain is clamped at both ends)");
                bc.kind = BoundaryCondition::Kind::dirichlet;
                bc.component = 1;
                bc.coefficient = T;
                out.push_back(bc);
                break;
            case Preset::rod_symplectic:
                if (pc.kind == PortCondition::Kind::velocity) {
                    if (!pc.data.is_zero()) throw ValidationError("rod_symplectic supports homogeneous velocity (clamped) ends only");
                    bc.kind = BoundaryCondition::Kind::dirichlet;
                    bc.component = 0;
                    out.push_back(bc);
                    bc.component = 1;
                    bc.coefficient = Rational(1) / rhoA;
                    out.push_back(bc);
                } else {
                    bc.kind = BoundaryCondition::Kind::neumann;
                    bc.component = 0;
                    bc.coefficient = T;
                    out.push_back(bc);
                }
                break;
            default: throw ValidationError("port-level boundary conditions need a rod preset");
        }
    };
    if (sys.port_a) one(*sys.port_a, BoundaryCondition::End::a);
    if (sys.port_b) one(*sys.port_b, BoundaryCondition::End::b);
    return out;
}

inline std::map<std::string, Rational> default_params(Preset p) {
    std::map<std::string, Rational> m{{"k", Rational(1)}, {"T", Rational(1)}, {"rhoA", Rational(1)}};
    if (p == Preset::rod_nonlocal) m["mu"] = Rational(1, 20);
    return m;
}

/// Exact operator data of the rod models. Missing parameters take defaults (k = T = rhoA = 1, mu = 1/20).
inline SystemDefinition builtin_system(Preset preset, std::map<std::string, Rational> params = {}, double a = 0.0, double b = 1.0) {
    for (auto& [key, v] : default_params(preset)) params.emplace(key, v);
    for (auto& [key, v] : params)
        if (key != "k" && key != "T" && key != "rhoA" && key != "mu") throw ValidationError("unknown parameter '" + key + "'");
    Rational k = params.at("k"), T = params.at("T"), rhoA = params.at("rhoA");
    if (k.sign() < 0) throw ValidationError("parameter k must be >= 0");
    if (T.sign() <= 0) throw ValidationError("parameter T must be > 0");
    if (rhoA.sign() <= 0) throw ValidationError("parameter rhoA must be > 0");
    if (!(a < b)) throw ValidationError("domain needs a < b");
    Rational inv = Rational(1) / rhoA;

    SystemDefinition s;
    s.preset = preset;
    s.name = to_string(preset);
    s.a = a;
    s.b = b;
    switch (preset) {
        case Preset::rod_symplectic: {
            params.erase("mu");
            s.J = HamiltonianOperator(OneVarPolyMat(QMatrix{{0, 1}, {-1, 0}}));
            OneVarPolyMat S(2, 2, {QMatrix{{k, 0}, {0, inv}}, QMatrix(2, 2), QMatrix{{-T, 0}, {0, 0}}});
            s.R = ReciprocalOperator(OneVarPolyMat(QMatrix::identity(2)), S);
            s.gauge = OneVarPolyMat(2, 2, {QMatrix{{1, 0}, {0, 0}}, QMatrix{{0, 0}, {-T, 0}}});
            s.port_a = s.port_b = PortCondition{PortCondition::Kind::velocity, {}};
            break;
        }
        case Preset::rod_first_order: {
            params.erase("mu");
            s.J = HamiltonianOperator(detail::J1());
            s.R = ReciprocalOperator(OneVarPolyMat(QMatrix::identity(3)), OneVarPolyMat(detail::diag3(k, T, inv)));
            s.port_a = s.port_b = PortCondition{PortCondition::Kind::velocity, {}};
            break;
        }
        case Preset::rod_nonlocal: {
            Rational mu = params.at("mu");
            if (mu.sign() < 0) throw ValidationError("parameter mu must be >= 0");
            s.J = HamiltonianOperator(detail::J1());
            OneVarPolyMat P(3, 3, {QMatrix::identity(3), QMatrix(3, 3), detail::diag3(0, -mu, 0)});
            s.R = ReciprocalOperator(P, OneVarPolyMat(detail::diag3(k, T, inv)));
            if (!mu.is_zero()) s.gauge = OneVarPolyMat(2, 3, {QMatrix{{0, 0, 0}, {0, -T, 0}}, QMatrix{{0, mu, 0}, {0, 0, 0}}});
            s.port_a = s.port_b = PortCondition{PortCondition::Kind::stress, {}};
            break;
        }
        default: throw ValidationError("unknown builtin system");
    }
    s.params = params;
    s.bcs = expand_port_conditions(s);
    return s;
}

}  // namespace stokes
