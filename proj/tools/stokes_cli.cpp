// Command-line front end: check | derive | simulate | study.
//
// Exit codes: 0 ok, 1 parse error, 2 validation error, 3 numerical failure, 4 audit failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "stokes/io.hpp"

namespace {

using namespace stokes;

enum Exit { ok = 0, parse_failure = 1, validation_failure = 2, numerical_failure = 3, audit_failure = 4 };

struct Common {
    std::string system_path;
    std::string builtin;
    std::string params;
    std::optional<std::size_t> N;
    std::optional<double> dt, t_end;
    std::optional<int> order;
    std::string out;
    std::optional<double> tol;
    std::string format = "text";
};

void add_source(CLI::App* app, Common& c) {
    auto* sys = app->add_option("--system", c.system_path, "system definition file (JSON)");
    auto* bi = app->add_option("--builtin", c.builtin, "rod_symplectic | rod_first_order | rod_nonlocal");
    sys->excludes(bi);
    app->add_option("--param", c.params, "comma-separated overrides, e.g. k=1,T=1,rhoA=1,mu=1/20")->needs(bi);
}

void add_sim(CLI::App* app, Common& c) {
    app->add_option("--N", c.N, "grid intervals");
    app->add_option("--dt", c.dt, "time step");
    app->add_option("--t-end", c.t_end, "final time");
    app->add_option("--order", c.order, "scheme order")->check(CLI::IsMember({2, 4}));
    app->add_option("--out", c.out, "output directory");
    app->add_option("--tol", c.tol, "fail (exit 4) if the max relative balance residual exceeds this");
}

std::map<std::string, Rational> parse_param_list(const std::string& text) {
    std::map<std::string, Rational> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw ParseError("--param: expected name=value, got '" + item + "'");
        try {
            out[item.substr(0, eq)] = parse_rational_expr(item.substr(eq + 1));
        } catch (const ExpressionError& e) {
            throw ParseError(std::string("--param: ") + e.what());
        }
    }
    return out;
}

RawSystem load_raw(const Common& c) {
    if (!c.system_path.empty()) return read_system_file(c.system_path);
    if (c.builtin.empty()) throw ParseError("one of --system or --builtin is required");
    RawSystem r;
    try {
        r.builtin = preset_from_name(c.builtin);
    } catch (const ValidationError& e) {
        throw ParseError(e.what());
    }
    r.params = parse_param_list(c.params);
    return r;
}

SystemDefinition load(const Common& c) {
    SystemDefinition s = build_system(load_raw(c));
    if (c.N) s.sim.N = *c.N;
    if (c.dt) s.sim.dt = *c.dt;
    if (c.t_end) s.sim.t_end = *c.t_end;
    if (c.order) s.sim.scheme_order = *c.order;
    if (s.sim.N < 8) throw ValidationError("N must be at least 8");
    if (!(s.sim.dt > 0.0) || !(s.sim.t_end > 0.0)) throw ValidationError("dt and t_end must be positive");
    return s;
}

std::string out_path(const Common& c, const std::string& file) {
    std::filesystem::create_directories(c.out);
    return (std::filesystem::path(c.out) / file).string();
}

int run_check(const Common& c) {
    RawSystem r = load_raw(c);
    bool all = true;
    auto verdict = [&](const std::string& what, bool pass, const std::string& detail = "") {
        all = all && pass;
        std::cout << what << ": " << (pass ? "pass" : "fail") << (detail.empty() ? "" : " (" + detail + ")") << "\n";
    };
    if (r.builtin) {
        SystemDefinition s = builtin_system(*r.builtin, r.params, r.a, r.b);
        r.J = s.J.J();
        r.P = s.R.P();
        r.S = s.R.S();
    }
    std::size_t n = r.P.rows();
    bool shapes = r.P.cols() == n && r.S.rows() == n && r.S.cols() == n && r.J.rows() == n && r.J.cols() == n;
    verdict("shapes", shapes, shapes ? "" : "J, P, S must be square of one size");
    if (!shapes) return validation_failure;
    Adjointness adj = classify_adjointness(r.J);
    verdict("J skew-adjoint", adj == Adjointness::skew_adjoint || r.J.is_zero(), to_string(adj));
    ReciprocityReport rec = check_reciprocity(r.P, r.S);
    verdict("reciprocity", rec.ok, rec.ok ? "" : "residual " + matrix_text(detail::entries_json(rec.residual)));
    bool maximal = check_maximality(r.P, r.S);
    verdict("maximality", maximal);
    if (all) {
        SystemDefinition s = build_system(r);
        DerivedStructures ds = derive(s);
        verdict("Stokes-Dirac identity", true, "delta=" + std::to_string(ds.dirac.delta()));
        verdict("boundary identity and Hamiltonian", verify_hamiltonian_compatibility(ds.lagrange.H, s.R), "p=" + std::to_string(ds.lagrange.p));
    }
    return all ? ok : validation_failure;
}

int run_derive(const Common& c) {
    SystemDefinition s = load(c);
    DeriveReport rep = derive_report(s, derive(s));
    std::string text = report_text(rep), tree = report_tree(rep).dump(2) + "\n";
    if (!c.out.empty()) {
        write_file_atomic(out_path(c, "derive.txt"), text);
        write_file_atomic(out_path(c, "derive.json"), tree);
    }
    std::cout << (c.format == "tree" ? tree : text);
    return ok;
}

int run_simulate(const Common& c) {
    SystemDefinition s = load(c);
    SimulationResult res = simulate(s, SimulationOptions::from(s.sim));
    std::ostringstream csv;
    write_csv(csv, res.report, res.discrete.delta, res.discrete.p);
    std::string summary = "max_rel_residual=" + fmt17(res.report.max_rel_residual);
    if (c.out.empty()) {
        std::cout << csv.str();
        std::cerr << summary << "\n";
    } else {
        write_file_atomic(out_path(c, "trajectory.csv"), csv.str());
        std::cout << summary << "\n";
    }
    if (c.tol && !(res.report.max_rel_residual <= *c.tol)) {
        std::cerr << "audit failure: max_rel_residual " << fmt17(res.report.max_rel_residual) << " exceeds tol " << fmt17(*c.tol) << "\n";
        return audit_failure;
    }
    return ok;
}

int run_study(const Common& c) {
    SystemDefinition s = load(c);
    StudyResult st = convergence_study(s, SimulationOptions::from(s.sim));
    std::ostringstream os;
    os << "N,dt,max_rel_residual,max_rel_residual_H0,max_abs_residual\n";
    for (auto& row : st.cells)
        for (auto& cell : row)
            os << cell.N << ',' << fmt17(cell.dt) << ',' << fmt17(cell.max_rel_residual) << ',' << fmt17(cell.max_rel_residual_H0) << ','
               << fmt17(cell.max_abs_residual) << "\n";
    if (!c.out.empty()) write_file_atomic(out_path(c, "study.csv"), os.str());
    std::cout << os.str();
    auto print_orders = [&](const char* label, const std::vector<double>& v) {
        std::cout << label;
        for (double x : v) std::cout << ' ' << fmt17(x);
        std::cout << "\n";
    };
    print_orders("observed_order(N,dt refined together):", st.diagonal_orders());
    print_orders("observed_order_H0(N,dt refined together):", st.diagonal_orders(true));
    std::vector<double> by_n, by_dt;
    for (std::size_t i = 0; i + 1 < 3; ++i) {
        by_n.push_back(std::log2(st.cells[i][2].max_rel_residual / st.cells[i + 1][2].max_rel_residual));
        by_dt.push_back(std::log2(st.cells[2][i].max_rel_residual / st.cells[2][i + 1].max_rel_residual));
    }
    print_orders("observed_order(N refined, finest dt):", by_n);
    print_orders("observed_order(dt refined, finest N):", by_dt);
    if (c.tol && !(st.cells[2][2].max_rel_residual <= *c.tol)) return audit_failure;
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stokes-Dirac / Stokes-Lagrange structures and boundary port-Hamiltonian simulation"};
    app.require_subcommand(1);
    Common c;
    auto* check = app.add_subcommand("check", "validate operators and print verdicts");
    auto* derive_cmd = app.add_subcommand("derive", "print derived structures");
    auto* sim = app.add_subcommand("simulate", "simulate and audit the balance equations");
    auto* study = app.add_subcommand("study", "convergence study over {N,2N,4N} x {dt,dt/2,dt/4}");
    for (auto* sub : {check, derive_cmd, sim, study}) add_source(sub, c);
    derive_cmd->add_option("--format", c.format, "text or tree")->check(CLI::IsMember({"text", "tree"}));
    derive_cmd->add_option("--out", c.out, "output directory");
    add_sim(sim, c);
    add_sim(study, c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return parse_failure;
    }

    try {
        if (*check) return run_check(c);
        if (*derive_cmd) return run_derive(c);
        if (*sim) return run_simulate(c);
        if (*study) return run_study(c);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return parse_failure;
    } catch (const SingularMatrix& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return numerical_failure;
    } catch (const LinearSolveFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return numerical_failure;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return validation_failure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return numerical_failure;
    }
    return ok;
}
