#pragma once

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "expr.hpp"
#include "simulator.hpp"

namespace stokes {

using json = nlohmann::ordered_json;

struct ParseError : std::runtime_error {
    ParseError(const std::string& what, std::size_t l = 0, std::size_t c = 0) : std::runtime_error(what), line(l), column(c) {}
    std::size_t line, column;
};

/// Operator data as read from a file, before any validation.
struct RawSystem {
    std::string name;
    std::optional<Preset> builtin;
    OneVarPolyMat J, P, S;
    double a = 0.0, b = 1.0;
    std::map<std::string, Rational> params;
    std::optional<PortCondition> port_a, port_b;
    std::optional<std::vector<BoundaryCondition>> conditions;
    SimSettings sim;
};

namespace detail {

inline std::string path_join(const std::string& p, const std::string& k) { return p + "/" + k; }

[[noreturn]] inline void bad(const std::string& path, const std::string& what) { throw ParseError((path.empty() ? "/" : path) + ": " + what); }

inline void only_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
    if (!j.is_object()) bad(path, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : keys) ok = ok || it.key() == k;
        if (!ok) bad(path, "unknown key '" + it.key() + "'");
    }
}

inline double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) bad(path, "expected a number");
    return j.get<double>();
}

inline std::size_t get_count(const json& j, const std::string& path) {
    if (!j.is_number_integer() || j.get<long long>() < 0) bad(path, "expected a non-negative integer");
    return j.get<std::size_t>();
}

/// Shortest decimal that round-trips the double, read back exactly.
inline Rational exact_from_double(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return Rational::parse(std::string_view(buf, static_cast<std::size_t>(r.ptr - buf)));
}

inline Rational get_param_value(const json& j, const std::string& path) {
    if (j.is_number_integer()) return Rational(j.get<long>());
    if (j.is_number()) return exact_from_double(j.get<double>());
    if (j.is_string()) {
        try {
            return parse_rational_expr(j.get<std::string>());
        } catch (const std::exception& e) {
            bad(path, e.what());
        }
    }
    bad(path, "expected a number or a rational string");
}

inline Poly get_entry(const json& j, const std::string& path, const std::map<std::string, Rational>& params, bool allow_s) {
    if (j.is_number_integer()) return Poly(Rational(j.get<long>()));
    if (j.is_number()) bad(path, "floating-point matrix entries are not allowed; write rationals as strings");
    if (!j.is_string()) bad(path, "expected an integer or a string");
    try {
        Poly p = parse_poly(j.get<std::string>(), params);
        if (!allow_s && p.degree() > 0) bad(path, "coefficient entries must be constant");
        return p;
    } catch (const ExpressionError& e) {
        bad(path, e.what());
    }
}

inline std::vector<std::vector<Poly>> get_matrix(const json& j, const std::string& path, const std::map<std::string, Rational>& params,
                                                 bool allow_s) {
    if (!j.is_array()) bad(path, "expected a list of rows");
    std::vector<std::vector<Poly>> m;
    for (std::size_t i = 0; i < j.size(); ++i) {
        std::string rp = path_join(path, std::to_string(i));
        if (!j[i].is_array()) bad(rp, "expected a row list");
        if (!m.empty() && j[i].size() != m[0].size()) bad(rp, "ragged matrix");
        std::vector<Poly> row;
        for (std::size_t k = 0; k < j[i].size(); ++k) row.push_back(get_entry(j[i][k], path_join(rp, std::to_string(k)), params, allow_s));
        m.push_back(std::move(row));
    }
    return m;
}

/// {"coeffs": [A0, A1, ...]} or {"entries": [[p(s), ...], ...]}.
inline std::optional<OneVarPolyMat> get_polymat(const json& j, const std::string& path, const std::map<std::string, Rational>& params) {
    only_keys(j, path, {"coeffs", "entries"});
    if (j.contains("coeffs") == j.contains("entries")) bad(path, "give exactly one of 'coeffs' or 'entries'");
    if (j.contains("entries")) {
        auto m = get_matrix(j["entries"], path_join(path, "entries"), params, true);
        return from_entries(m);
    }
    const json& c = j["coeffs"];
    if (!c.is_array()) bad(path_join(path, "coeffs"), "expected a list of matrices");
    if (c.empty()) return std::nullopt;
    std::vector<QMatrix> coeffs;
    std::size_t r = 0, cc = 0;
    for (std::size_t k = 0; k < c.size(); ++k) {
        std::string kp = path_join(path_join(path, "coeffs"), std::to_string(k));
        auto m = get_matrix(c[k], kp, params, false);
        std::size_t mr = m.size(), mc = mr ? m[0].size() : 0;
        if (k == 0) {
            r = mr;
            cc = mc;
        } else if (mr != r || mc != cc) {
            bad(kp, "coefficient matrices differ in shape");
        }
        QMatrix q(mr, mc);
        for (std::size_t i = 0; i < mr; ++i)
            for (std::size_t jj = 0; jj < mc; ++jj) q(i, jj) = m[i][jj].coeff(0);
        coeffs.push_back(std::move(q));
    }
    return OneVarPolyMat(r, cc, std::move(coeffs));
}

inline TimeProfile get_time_profile(const json& j, const std::string& path) {
    TimeProfile p;
    if (j.is_string() && j.get<std::string>() == "zero") return p;
    only_keys(j, path, {"profile", "amplitude", "omega", "center", "width"});
    if (!j.contains("profile") || !j["profile"].is_string()) bad(path, "missing 'profile' name");
    std::string k = j["profile"];
    if (k == "zero")
        p.kind = TimeProfile::Kind::zero;
    else if (k == "constant")
        p.kind = TimeProfile::Kind::constant;
    else if (k == "sine")
        p.kind = TimeProfile::Kind::sine;
    else if (k == "smooth_pulse")
        p.kind = TimeProfile::Kind::smooth_pulse;
    else
        bad(path_join(path, "profile"), "unknown time profile '" + k + "'");
    for (auto [key, field] : {std::pair{"amplitude", &p.amplitude}, {"omega", &p.omega}, {"center", &p.center}, {"width", &p.width}})
        if (j.contains(key)) *field = get_number(j[key], path_join(path, key));
    if (!(p.width > 0.0)) bad(path_join(path, "width"), "must be positive");
    return p;
}

inline InitialProfile get_initial(const json& j, const std::string& path) {
    only_keys(j, path, {"profile", "amplitude", "center", "width", "mode", "phase", "component"});
    InitialProfile ip;
    if (!j.contains("profile") || !j["profile"].is_string()) bad(path, "missing 'profile' name");
    std::string k = j["profile"];
    if (k == "zero")
        ip.kind = InitialProfile::Kind::zero;
    else if (k == "gaussian")
        ip.kind = InitialProfile::Kind::gaussian;
    else if (k == "sine_mode")
        ip.kind = InitialProfile::Kind::sine_mode;
    else
        bad(path_join(path, "profile"), "unknown initial profile '" + k + "'");
    if (j.contains("amplitude")) ip.amplitude = get_number(j["amplitude"], path_join(path, "amplitude"));
    if (j.contains("center")) ip.center = get_number(j["center"], path_join(path, "center"));
    if (j.contains("width")) ip.width = get_number(j["width"], path_join(path, "width"));
    if (j.contains("phase")) ip.phase = get_number(j["phase"], path_join(path, "phase"));
    if (j.contains("mode")) ip.mode = static_cast<int>(get_count(j["mode"], path_join(path, "mode")));
    if (j.contains("component")) ip.component = get_count(j["component"], path_join(path, "component"));
    if (ip.kind == InitialProfile::Kind::gaussian && !(ip.width > 0.0)) bad(path_join(path, "width"), "must be positive");
    return ip;
}

inline PortCondition get_port(const json& j, const std::string& path) {
    only_keys(j, path, {"type", "profile"});
    PortCondition pc;
    if (!j.contains("type") || !j["type"].is_string()) bad(path, "missing 'type' (velocity or stress)");
    std::string t = j["type"];
    if (t == "velocity" || t == "clamped")
        pc.kind = PortCondition::Kind::velocity;
    else if (t == "stress" || t == "free")
        pc.kind = PortCondition::Kind::stress;
    else
        bad(path_join(path, "type"), "unknown port condition '" + t + "'");
    if (j.contains("profile")) pc.data = get_time_profile(j["profile"], path_join(path, "profile"));
    return pc;
}

inline BoundaryCondition get_condition(const json& j, const std::string& path, const std::map<std::string, Rational>& params) {
    only_keys(j, path, {"end", "kind", "component", "coefficient", "profile"});
    BoundaryCondition bc;
    if (!j.contains("end") || !j["end"].is_string()) bad(path, "missing 'end' (a or b)");
    std::string e = j["end"];
    if (e != "a" && e != "b") bad(path_join(path, "end"), "must be 'a' or 'b'");
    bc.end = e == "a" ? BoundaryCondition::End::a : BoundaryCondition::End::b;
    if (!j.contains("kind") || !j["kind"].is_string()) bad(path, "missing 'kind' (dirichlet or neumann)");
    std::string k = j["kind"];
    if (k == "dirichlet")
        bc.kind = BoundaryCondition::Kind::dirichlet;
    else if (k == "neumann")
        bc.kind = BoundaryCondition::Kind::neumann;
    else
        bad(path_join(path, "kind"), "unknown condition kind '" + k + "'");
    if (!j.contains("component")) bad(path, "missing 'component'");
    bc.component = get_count(j["component"], path_join(path, "component"));
    if (j.contains("coefficient")) {
        Poly c = get_entry(j["coefficient"], path_join(path, "coefficient"), params, false);
        bc.coefficient = c.coeff(0);
    }
    if (j.contains("profile")) bc.data = get_time_profile(j["profile"], path_join(path, "profile"));
    return bc;
}

inline std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace detail

inline RawSystem parse_system_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        auto [l, c] = detail::line_col(text, e.byte == 0 ? 0 : e.byte - 1);
        throw ParseError("syntax error at line " + std::to_string(l) + ", column " + std::to_string(c) + ": " + e.what(), l, c);
    }
    detail::only_keys(j, "", {"meta", "builtin", "domain", "params", "J", "P", "S", "bc", "sim"});
    RawSystem r;
    if (j.contains("meta")) {
        detail::only_keys(j["meta"], "/meta", {"name"});
        if (j["meta"].contains("name")) {
            if (!j["meta"]["name"].is_string()) detail::bad("/meta/name", "expected a string");
            r.name = j["meta"]["name"];
        }
    }
    if (j.contains("builtin")) {
        if (!j["builtin"].is_string()) detail::bad("/builtin", "expected a preset name");
        try {
            r.builtin = preset_from_name(j["builtin"]);
        } catch (const ValidationError& e) {
            detail::bad("/builtin", e.what());
        }
        for (const char* k : {"J", "P", "S"})
            if (j.contains(k)) detail::bad(std::string("/") + k, "operator data cannot be combined with 'builtin'");
    }
    if (j.contains("domain")) {
        detail::only_keys(j["domain"], "/domain", {"a", "b"});
        if (j["domain"].contains("a")) r.a = detail::get_number(j["domain"]["a"], "/domain/a");
        if (j["domain"].contains("b")) r.b = detail::get_number(j["domain"]["b"], "/domain/b");
    }
    if (j.contains("params")) {
        if (!j["params"].is_object()) detail::bad("/params", "expected an object");
        for (auto it = j["params"].begin(); it != j["params"].end(); ++it) {
            const std::string& k = it.key();
            bool ident = !k.empty() && (std::isalpha(static_cast<unsigned char>(k[0])) || k[0] == '_');
            for (char ch : k) ident = ident && (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_');
            if (!ident || k == "s" || k == "zeta" || k == "eta") detail::bad("/params/" + k, "invalid parameter name");
            r.params[k] = detail::get_param_value(it.value(), "/params/" + k);
        }
    }
    if (!r.builtin) {
        for (const char* k : {"P", "S"})
            if (!j.contains(k)) detail::bad("", std::string("missing operator '") + k + "'");
        auto P = detail::get_polymat(j["P"], "/P", r.params);
        auto S = detail::get_polymat(j["S"], "/S", r.params);
        if (!P || !S) detail::bad("", "P and S need at least one coefficient matrix");
        r.P = *P;
        r.S = *S;
        std::optional<OneVarPolyMat> J;
        if (j.contains("J")) J = detail::get_polymat(j["J"], "/J", r.params);
        r.J = J ? *J : OneVarPolyMat(r.P.rows(), r.P.rows());
    }
    if (j.contains("bc")) {
        const json& bc = j["bc"];
        detail::only_keys(bc, "/bc", {"a", "b", "conditions"});
        if (bc.contains("conditions")) {
            if (bc.contains("a") || bc.contains("b")) detail::bad("/bc", "use either port conditions (a, b) or a conditions list");
            if (!bc["conditions"].is_array()) detail::bad("/bc/conditions", "expected a list");
            std::vector<BoundaryCondition> list;
            for (std::size_t i = 0; i < bc["conditions"].size(); ++i)
                list.push_back(detail::get_condition(bc["conditions"][i], "/bc/conditions/" + std::to_string(i), r.params));
            r.conditions = list;
        } else {
            if (!r.builtin && (bc.contains("a") || bc.contains("b"))) detail::bad("/bc", "port conditions need a builtin system");
            if (bc.contains("a")) r.port_a = detail::get_port(bc["a"], "/bc/a");
            if (bc.contains("b")) r.port_b = detail::get_port(bc["b"], "/bc/b");
        }
    }
    if (j.contains("sim")) {
        const json& s = j["sim"];
        detail::only_keys(s, "/sim", {"N", "dt", "t_end", "scheme_order", "initial"});
        if (s.contains("N")) r.sim.N = detail::get_count(s["N"], "/sim/N");
        if (s.contains("dt")) r.sim.dt = detail::get_number(s["dt"], "/sim/dt");
        if (s.contains("t_end")) r.sim.t_end = detail::get_number(s["t_end"], "/sim/t_end");
        if (s.contains("scheme_order")) r.sim.scheme_order = static_cast<int>(detail::get_count(s["scheme_order"], "/sim/scheme_order"));
        if (s.contains("initial")) r.sim.initial = detail::get_initial(s["initial"], "/sim/initial");
    }
    return r;
}

inline RawSystem read_system_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_system_text(ss.str());
}

/// Validated system; throws the validation errors of the operator constructors.
inline SystemDefinition build_system(const RawSystem& r) {
    SystemDefinition s;
    if (!(r.a < r.b)) throw ValidationError("domain needs a < b");
    if (r.builtin) {
        s = builtin_system(*r.builtin, r.params, r.a, r.b);
        if (r.port_a) s.port_a = r.port_a;
        if (r.port_b) s.port_b = r.port_b;
        s.bcs = expand_port_conditions(s);
    } else {
        s.R = ReciprocalOperator(r.P, r.S);
        if (r.J.rows() != r.P.rows() || r.J.cols() != r.P.rows()) throw ValidationError("J must be square with the size of P and S");
        s.J = HamiltonianOperator(r.J);
        s.a = r.a;
        s.b = r.b;
        s.params = r.params;
    }
    if (r.conditions) {
        s.port_a.reset();
        s.port_b.reset();
        s.bcs = *r.conditions;
    }
    if (!r.name.empty()) s.name = r.name;
    s.sim = r.sim;
    if (s.sim.scheme_order != 2 && s.sim.scheme_order != 4) throw ValidationError("scheme_order must be 2 or 4");
    if (!(s.sim.dt > 0.0) || !(s.sim.t_end > 0.0)) throw ValidationError("dt and t_end must be positive");
    if (s.sim.N < 8) throw ValidationError("N must be at least 8");
    return s;
}

inline SystemDefinition read_system(const std::string& path) { return build_system(read_system_file(path)); }

// ---------------------------------------------------------------------------
// Printing

namespace detail {

inline json matrix_json(const QMatrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j).str());
        rows.push_back(row);
    }
    return rows;
}

inline json entries_json(const OneVarPolyMat& a) {
    json rows = json::array();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < a.cols(); ++j) row.push_back(to_text(entry(a, i, j)));
        rows.push_back(row);
    }
    return rows;
}

inline json entries_json(const TwoVarPolyMat& h) {
    json rows = json::array();
    for (std::size_t i = 0; i < h.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < h.cols(); ++j) row.push_back(to_text(h, i, j));
        rows.push_back(row);
    }
    return rows;
}

inline json polymat_json(const OneVarPolyMat& a) {
    json c = json::array();
    for (auto& m : a.coeffs()) c.push_back(matrix_json(m));
    return json{{"coeffs", c}};
}

inline json time_profile_json(const TimeProfile& p) {
    const char* names[] = {"zero", "constant", "sine", "smooth_pulse"};
    return json{{"profile", names[static_cast<int>(p.kind)]}, {"amplitude", p.amplitude}, {"omega", p.omega}, {"center", p.center}, {"width", p.width}};
}

inline json initial_json(const InitialProfile& ip) {
    const char* names[] = {"zero", "gaussian", "sine_mode"};
    return json{{"profile", names[static_cast<int>(ip.kind)]}, {"amplitude", ip.amplitude}, {"center", ip.center}, {"width", ip.width},
                {"mode", ip.mode}, {"phase", ip.phase}, {"component", ip.component}};
}

}  // namespace detail

/// Canonical tree of a validated system; parse_system_text(dump) rebuilds an equal system.
inline json system_to_json(const SystemDefinition& s) {
    json j;
    j["meta"] = json{{"name", s.name}};
    if (s.preset != Preset::none) j["builtin"] = to_string(s.preset);
    j["domain"] = json{{"a", s.a}, {"b", s.b}};
    json params = json::object();
    for (auto& [k, v] : s.params) params[k] = v.str();
    j["params"] = params;
    if (s.preset == Preset::none) {
        j["J"] = detail::polymat_json(s.J.J());
        j["P"] = detail::polymat_json(s.R.P());
        j["S"] = detail::polymat_json(s.R.S());
    }
    if (s.port_a || s.port_b) {
        json bc = json::object();
        auto port = [](const PortCondition& pc) {
            return json{{"type", pc.kind == PortCondition::Kind::velocity ? "velocity" : "stress"}, {"profile", detail::time_profile_json(pc.data)}};
        };
        if (s.port_a) bc["a"] = port(*s.port_a);
        if (s.port_b) bc["b"] = port(*s.port_b);
        j["bc"] = bc;
    } else {
        json list = json::array();
        for (const BoundaryCondition& bc : s.bcs)
            list.push_back(json{{"end", bc.end == BoundaryCondition::End::a ? "a" : "b"},
                                {"kind", bc.kind == BoundaryCondition::Kind::dirichlet ? "dirichlet" : "neumann"},
                                {"component", bc.component},
                                {"coefficient", bc.coefficient.str()},
                                {"profile", detail::time_profile_json(bc.data)}});
        j["bc"] = json{{"conditions", list}};
    }
    j["sim"] = json{{"N", s.sim.N}, {"dt", s.sim.dt}, {"t_end", s.sim.t_end}, {"scheme_order", s.sim.scheme_order},
                    {"initial", detail::initial_json(s.sim.initial)}};
    return j;
}

inline bool same_system(const SystemDefinition& x, const SystemDefinition& y) {
    return x.name == y.name && x.preset == y.preset && x.J.J() == y.J.J() && x.R.P() == y.R.P() && x.R.S() == y.R.S() && x.a == y.a &&
           x.b == y.b && x.params == y.params && x.bcs == y.bcs && x.port_a == y.port_a && x.port_b == y.port_b && x.gauge == y.gauge &&
           x.sim == y.sim;
}

// ---------------------------------------------------------------------------
// Derive report

struct DeriveReport {
    std::string name;
    Adjointness j_adjointness = Adjointness::neither;
    OneVarPolyMat reciprocity_residual;
    bool maximal = false;
    DiracStructure dirac;
    LagrangeStructure lagrange;
    OneVarPolyMat Q;
};

inline DeriveReport derive_report(const SystemDefinition& s, const DerivedStructures& ds) {
    DeriveReport r;
    r.name = s.name;
    r.j_adjointness = classify_adjointness(s.J.J());
    r.reciprocity_residual = check_reciprocity(s.R.P(), s.R.S()).residual;
    r.maximal = check_maximality(s.R.P(), s.R.S());
    r.dirac = ds.dirac;
    r.lagrange = ds.lagrange;
    r.Q = reflect_diagonal(ds.lagrange.H);
    return r;
}

inline json report_tree(const DeriveReport& r) {
    json j;
    j["system"] = r.name;
    j["J_adjointness"] = to_string(r.j_adjointness);
    j["reciprocity_residual"] = detail::entries_json(r.reciprocity_residual);
    j["maximal"] = r.maximal;
    j["alpha"] = r.dirac.sig.alpha;
    j["beta"] = r.dirac.sig.beta;
    j["delta"] = r.dirac.delta();
    json sigma = json::array();
    for (std::size_t i = 0; i < r.dirac.delta(); ++i) sigma.push_back(i < r.dirac.sig.alpha ? 1 : -1);
    j["Sigma"] = sigma;
    j["T"] = detail::entries_json(r.dirac.T);
    json scale = json::array();
    for (auto& v : r.dirac.scale) scale.push_back(v.str());
    j["T_row_scale"] = scale;
    j["p"] = r.lagrange.p;
    j["P_boundary"] = detail::entries_json(r.lagrange.Pb);
    j["S_boundary"] = detail::entries_json(r.lagrange.Sb);
    j["H"] = detail::entries_json(r.lagrange.H);
    j["H0"] = detail::entries_json(r.lagrange.H0);
    j["Q"] = detail::entries_json(r.Q);
    return j;
}

inline std::string matrix_text(const json& rows) {
    if (rows.empty()) return "[]";
    std::string out = "[";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out += i ? ", [" : "[";
        for (std::size_t j = 0; j < rows[i].size(); ++j) out += (j ? ", " : "") + rows[i][j].get<std::string>();
        out += "]";
    }
    return out + "]";
}

inline std::string report_text(const DeriveReport& r) {
    json t = report_tree(r);
    std::ostringstream os;
    os << "system: " << r.name << "\n";
    os << "J adjointness: " << to_string(r.j_adjointness) << "\n";
    os << "reciprocity residual S^T(-s)P(s) - P^T(-s)S(s): " << matrix_text(t["reciprocity_residual"]) << "\n";
    os << "maximal: " << (r.maximal ? "yes" : "no") << "\n";
    os << "alpha, beta, delta: " << r.dirac.sig.alpha << ", " << r.dirac.sig.beta << ", " << r.dirac.delta() << "\n";
    os << "Sigma: " << t["Sigma"].dump() << "\n";
    os << "T(s): " << matrix_text(t["T"]) << "\n";
    os << "T row scale: " << t["T_row_scale"].dump() << "\n";
    os << "p: " << r.lagrange.p << "\n";
    os << "P_boundary(s): " << matrix_text(t["P_boundary"]) << "\n";
    os << "S_boundary(s): " << matrix_text(t["S_boundary"]) << "\n";
    os << "H(zeta,eta): " << matrix_text(t["H"]) << "\n";
    os << "H0(zeta,eta): " << matrix_text(t["H0"]) << "\n";
    os << "Q(s): " << matrix_text(t["Q"]) << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Trajectory CSV

inline std::string csv_header(std::size_t delta, std::size_t p) {
    std::string h = "t,H,H0,dHdt,power_pairing,energy_pairing,residual,residual_H0";
    for (std::size_t i = 1; i <= delta; ++i) h += ",f_del_" + std::to_string(i);
    for (std::size_t i = 1; i <= delta; ++i) h += ",e_del_" + std::to_string(i);
    for (const char* pre : {"chi_a_", "chi_b_", "eps_a_", "eps_b_"})
        for (std::size_t i = 1; i <= p; ++i) h += "," + std::string(pre) + std::to_string(i);
    return h;
}

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_csv(std::ostream& os, const BalanceReport& rep, std::size_t delta, std::size_t p) {
    os << csv_header(delta, p) << "\n";
    for (const StepAudit& s : rep.steps) {
        os << fmt17(s.t) << ',' << fmt17(s.H) << ',' << fmt17(s.H0) << ',' << fmt17(s.dHdt) << ',' << fmt17(s.power_pairing) << ','
           << fmt17(s.energy_pairing) << ',' << fmt17(s.residual) << ',' << fmt17(s.residual_H0);
        auto put = [&](const std::vector<double>& v, std::size_t from, std::size_t count) {
            for (std::size_t i = 0; i < count; ++i) os << ',' << fmt17(from + i < v.size() ? v[from + i] : 0.0);
        };
        put(s.power.f, 0, delta);
        put(s.power.e, 0, delta);
        put(s.energy.chi, 0, p);
        put(s.energy.chi, p, p);
        put(s.energy.eps, 0, p);
        put(s.energy.eps, p, p);
        os << "\n";
    }
}

/// Writes via a temporary file and rename, so readers never see a partial file.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
        out << content;
        if (!out) throw std::runtime_error("write failed for '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) throw std::runtime_error("cannot rename '" + tmp + "' to '" + path + "'");
}

}  // namespace stokes
