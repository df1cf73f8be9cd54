#include "twoplayer/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "twoplayer/errors.hpp"
#include "twoplayer/plant_io.hpp"

namespace twoplayer {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
}

void add(RunReport& r, std::string name, double value, double tol) {
    r.checks.push_back({std::move(name), value, tol, value <= tol});
}

void add_flag(RunReport& r, std::string name, bool ok) {
    r.checks.push_back({std::move(name), ok ? 0.0 : 1.0, 0.0, ok});
}

Tolerances numerics_for(const CliOptions& opt, bool tol_is_residual) {
    Tolerances t;
    if (tol_is_residual && opt.tol > 0) t.residual = opt.tol;
    return t;
}

double comparison_tol(const CliOptions& opt) { return opt.tol > 0 ? opt.tol : 1e-6; }

}  // namespace

bool RunReport::all_pass() const {
    for (const Check& c : checks)
        if (!c.pass) return false;
    return true;
}

nlohmann::json RunReport::to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["plant"] = plant;
    j["status"] = all_pass() ? "pass" : "fail";
    j["exit_code"] = exit_code;
    nlohmann::json cs = nlohmann::json::array();
    for (const Check& c : checks)
        cs.push_back({{"name", c.name},
                      {"value", c.value},
                      {"tol", c.tol},
                      {"pass", c.pass},
                      {"compare", c.lower_bound ? ">" : "<="}});
    j["checks"] = cs;
    nlohmann::json vs = nlohmann::json::object();
    for (const auto& [k, v] : values) vs[k] = v;
    j["values"] = vs;
    j["notes"] = notes;
    j["wall_time_s"] = wall_time;
    return j;
}

void RunReport::print(std::ostream& out) const {
    out << "command: " << command << '\n';
    out << "plant:   " << plant << '\n';
    if (!checks.empty()) {
        out << '\n';
        char line[160];
        std::snprintf(line, sizeof line, "  %-34s %-14s %-3s %-14s %s\n", "check", "value", "", "tol",
                      "status");
        out << line;
        for (const Check& c : checks) {
            std::snprintf(line, sizeof line, "  %-34s %-14s %-3s %-14s %s\n", c.name.c_str(),
                          fmt(c.value).c_str(), c.lower_bound ? ">" : "<=", fmt(c.tol).c_str(),
                          c.pass ? "PASS" : "FAIL");
            out << line;
        }
    }
    if (!values.empty()) {
        out << '\n';
        for (const auto& [k, v] : values) {
            char line[160];
            std::snprintf(line, sizeof line, "  %-34s %.17g\n", k.c_str(), v);
            out << line;
        }
    }
    if (!notes.empty()) {
        out << '\n';
        for (const std::string& n : notes) out << "  " << n << '\n';
    }
    out << "\nstatus: " << (exit_code == exit_pass ? "pass" : "fail") << " (exit " << exit_code
        << ")\n";
    char wt[64];
    std::snprintf(wt, sizeof wt, "wall time: %.3f s\n", wall_time);
    out << wt;
}

std::string plant_digest(const TwoPlayerPlant& p) {
    std::ostringstream os;
    os << "n=" << p.n() << " (" << p.part.n.first << "," << p.part.n.second << ")"
       << " m=" << p.nu() << " (" << p.part.m.first << "," << p.part.m.second << ")"
       << " k=" << p.ny() << " (" << p.part.k.first << "," << p.part.k.second << ")"
       << " nw=" << p.nw() << " nz=" << p.nz();
    return os.str();
}

RunReport cmd_check(const TwoPlayerPlant& p, const CliOptions& opt) {
    RunReport r;
    r.command = "check";
    r.plant = plant_digest(p);
    const AssumptionReport a = check_assumptions(p, numerics_for(opt, false));
    for (int i = 0; i < 6; ++i) {
        add_flag(r, "A" + std::to_string(i + 1), a.pass[i]);
        r.notes.push_back("A" + std::to_string(i + 1) + ": " + a.detail[i]);
    }
    if (!a.minimal) r.notes.push_back("warning: " + a.minimality_detail);
    const TriangularStabilizability t = exists_triangular_stabilizing(p);
    add_flag(r, "triangular_stabilizability", t.ok());
    r.notes.push_back("structured stabilizability: " + t.detail());
    r.notes.push_back(std::string("centralized stabilizability: ") +
                      (centralized_stabilizable(p) ? "yes" : "no"));
    r.exit_code = r.all_pass() ? exit_pass : exit_assumption;
    return r;
}

RunReport cmd_synthesize(const TwoPlayerPlant& p, const CliOptions& opt) {
    RunReport r;
    r.command = "synthesize";
    r.plant = plant_digest(p);
    const Tolerances tol = numerics_for(opt, true);
    const SynthesisResult s = optimal_controller(p, tol);
    const CentralizedResult cen = centralized_h2(p, tol);
    const StateSpace& K =
        opt.realization == Realization::primary ? s.controller : s.controller_alt;

    add(r, "are_residual_X", s.ares.residual_X, tol.residual);
    add(r, "are_residual_Y", s.ares.residual_Y, tol.residual);
    add(r, "are_residual_Xtilde", s.ares.residual_Xt, tol.residual);
    add(r, "are_residual_Ytilde", s.ares.residual_Yt, tol.residual);
    add(r, "phi_residual", s.coupling.residual_phi, tol.residual);
    add(r, "psi_residual", s.coupling.residual_psi, tol.residual);
    const StateSpace cl = closed_loop(p, K);
    add_flag(r, "closed_loop_stable", is_hurwitz(cl.A, tol.hurwitz));

    ControllerFile f;
    f.controller = K;
    f.realization = opt.realization == Realization::primary ? "primary" : "alternative";
    f.K = s.ares.K;
    f.L = s.ares.L;
    f.Khat = s.Khat;
    f.Lhat = s.Lhat;
    f.Phi = s.coupling.Phi;
    f.Psi = s.coupling.Psi;
    f.norm_optimal = h2_norm(cl);
    f.norm_centralized = cen.norm;
    f.delta = f.norm_optimal * f.norm_optimal - cen.norm * cen.norm;

    r.values = {{"controller_states", static_cast<double>(K.states())},
                {"norm_optimal", f.norm_optimal},
                {"norm_centralized", f.norm_centralized},
                {"delta", f.delta}};
    if (s.coupling.min_norm) r.notes.push_back("coupling system was rank deficient; min-norm solution used");
    if (!opt.out_file.empty()) {
        save_controller(f, opt.out_file);
        r.notes.push_back("controller written to " + opt.out_file);
    }
    r.exit_code = r.all_pass() ? exit_pass : exit_numerical;
    return r;
}

RunReport cmd_analyze(const TwoPlayerPlant& p, const CliOptions& opt) {
    RunReport r;
    r.command = "analyze";
    r.plant = plant_digest(p);
    const Tolerances tol = numerics_for(opt, false);
    const double ct = comparison_tol(opt);
    const SynthesisResult s = optimal_controller(p, tol);
    const HatPair h = hat_pair(p, s);
    const DeltaCost d = delta_cost(p, s, h);
    const GramianTriple g = closed_loop_gramian(p, s);
    const OrthogonalityResiduals o = orthogonality_residuals(p, s);

    const double ds = 1.0 + std::abs(d.norm);
    add(r, "delta_traceY_vs_norm", std::abs(d.trace_Y - d.norm) / ds, 1e-7);
    add(r, "delta_traceX_vs_norm", std::abs(d.trace_X - d.norm) / ds, 1e-7);
    add(r, "delta_youla_vs_norm", std::abs(d.youla - d.norm) / ds, 1e-7);
    add(r, "delta_nonnegative", std::max(0.0, -d.norm), 1e-9);
    add(r, "delta_vs_closed_loop_gap", std::abs(d.gap() - d.norm) / std::max(1.0, d.cl_opt_sq), ct);
    add(r, "gramian_offdiag", g.offdiag_rel, 1e-7);
    add(r, "gramian_diag", g.diag_err, 1e-7);
    add(r, "orthogonality_player1", o.player1, 1e-7);
    add(r, "orthogonality_player2", o.player2, 1e-7);

    r.values = {{"norm_centralized", std::sqrt(d.cl_cen_sq)},
                {"norm_decentralized", std::sqrt(d.cl_opt_sq)},
                {"delta", d.norm},
                {"delta_trace_Y", d.trace_Y},
                {"delta_trace_X", d.trace_X},
                {"delta_youla", d.youla},
                {"norm_sq_gap", d.gap()}};
    r.exit_code = r.all_pass() ? exit_pass : exit_numerical;
    return r;
}

RunReport cmd_verify(const TwoPlayerPlant& p, const CliOptions& opt) {
    RunReport r;
    r.command = "verify";
    r.plant = plant_digest(p);
    VerifyOptions vo;
    vo.oracle = opt.oracle;
    vo.tol = comparison_tol(opt);
    vo.seed = opt.seed;
    r.checks = verify_all(p, vo);
    r.exit_code = r.all_pass() ? exit_pass : exit_numerical;
    return r;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CliOptions opt;
    CLI::App app{"Optimal two-player controller synthesis for nested information"};
    app.require_subcommand(1, 1);
    std::string realization = "primary";
    const char* names[] = {"check", "synthesize", "analyze", "verify"};
    const char* help[] = {"check assumptions and structured stabilizability",
                          "synthesize the optimal structured controller",
                          "report centralized/decentralized norms and the cost of decentralization",
                          "run the identity suite"};
    for (int i = 0; i < 4; ++i) {
        CLI::App* sub = app.add_subcommand(names[i], help[i]);
        sub->add_option("plant", opt.plant_file, "plant JSON file")->required();
        sub->add_option("--out", opt.out_file, "output file for the controller");
        sub->add_option("--realization", realization, "primary or alternative")
            ->check(CLI::IsMember({"primary", "alternative"}));
        sub->add_flag("--oracle", opt.oracle, "also run the vectorization oracle");
        sub->add_flag("--json", opt.json, "machine-readable report");
        sub->add_option("--tol", opt.tol, "tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--seed", opt.seed, "random seed");
        sub->callback([&opt, name = names[i]] { opt.command = name; });
    }

    std::vector<const char*> argv;
    argv.push_back("twoplayer");
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_pass;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_input;
    }
    opt.realization = realization == "alternative" ? Realization::alternative : Realization::primary;

    const auto t0 = std::chrono::steady_clock::now();
    RunReport r;
    r.command = opt.command;
    try {
        const TwoPlayerPlant p = load_plant(opt.plant_file);
        r.plant = plant_digest(p);
        if (opt.command == "check")
            r = cmd_check(p, opt);
        else if (opt.command == "synthesize")
            r = cmd_synthesize(p, opt);
        else if (opt.command == "analyze")
            r = cmd_analyze(p, opt);
        else
            r = cmd_verify(p, opt);
    } catch (const InputError& e) {
        r.exit_code = exit_input;
        r.notes.push_back(std::string("input error: ") + e.what());
    } catch (const AssumptionError& e) {
        r.exit_code = exit_assumption;
        r.notes.push_back(std::string("assumption failure: ") + e.what());
    } catch (const Error& e) {
        r.exit_code = exit_numerical;
        r.notes.push_back(std::string("numerical failure: ") + e.what());
    } catch (const nlohmann::json::exception& e) {
        r.exit_code = exit_input;
        r.notes.push_back(std::string("input error: ") + e.what());
    }
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (opt.json)
        out << r.to_json().dump(2) << '\n';
    else
        r.print(out);
    if (r.exit_code != exit_pass) {
        for (const Check& c : r.checks)
            if (!c.pass) err << "failed: " << c.name << " = " << fmt(c.value) << '\n';
        for (const std::string& n : r.notes)
            if (n.rfind("input error", 0) == 0 || n.rfind("assumption", 0) == 0 ||
                n.rfind("numerical", 0) == 0 || n.rfind("structured", 0) == 0)
                err << n << '\n';
    }
    return r.exit_code;
}

}  // namespace twoplayer
