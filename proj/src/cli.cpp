#include "mhm/cli.hpp"

#include "mhm/bellman.hpp"
#include "mhm/benchmark.hpp"
#include "mhm/device.hpp"
#include "mhm/errors.hpp"
#include "mhm/io.hpp"
#include "mhm/model.hpp"
#include "mhm/simulate.hpp"
#include "mhm/welfare.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace mhm::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Global options shared by every subcommand. Inline parameter flags override
// values loaded from --params, so a config file can serve as a base profile.
struct Common {
    ModelParams flags{0.75, 0.25, 1.0, -1.0, 1.0, 1.0, 0.9, 0.5};
    std::string params_path;
    int grid_n = 2001;
    double tol = 1e-8;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    std::array<CLI::Option*, 8> param_opts{};
};

void add_common_options(CLI::App& app, Common& c) {
    app.add_option("--params", c.params_path, "JSON file with the eight model parameters");
    c.param_opts[0] = app.add_option("--p", c.flags.p, "good-output probability under effort");
    c.param_opts[1] = app.add_option("--q", c.flags.q, "good-output probability under shirking");
    c.param_opts[2] = app.add_option("--g", c.flags.g, "client value of good output");
    c.param_opts[3] = app.add_option("--b", c.flags.b, "client value of bad output");
    c.param_opts[4] = app.add_option("--w", c.flags.w, "wage per accepted period");
    c.param_opts[5] = app.add_option("--r", c.flags.r, "shirking rent");
    c.param_opts[6] = app.add_option("--delta", c.flags.delta, "worker discount factor");
    c.param_opts[7] = app.add_option("--beta", c.flags.beta, "firm weight on the worker");
    app.add_option("--grid-n", c.grid_n, "utility grid nodes, at least 101");
    app.add_option("--tol", c.tol, "value-iteration sup-norm tolerance");
    app.add_option("--seed", c.seed, "simulation seed");
    app.add_option("--out", c.out_dir, "output directory (created if missing)");
}

ModelParams resolve_params(const Common& c) {
    ModelParams par = c.flags;
    if (!c.params_path.empty()) {
        json j;
        try {
            j = json::parse(read_text_file(c.params_path));
        } catch (const json::exception& e) {
            throw DomainError("params file " + c.params_path + " is not valid JSON: " + e.what());
        }
        par = params_from_json(j);
        double ModelParams::* slots[8] = {&ModelParams::p, &ModelParams::q, &ModelParams::g,
                                          &ModelParams::b, &ModelParams::w, &ModelParams::r,
                                          &ModelParams::delta, &ModelParams::beta};
        for (int i = 0; i < 8; ++i)
            if (c.param_opts[i]->count() > 0)
                par.*slots[i] = c.flags.*slots[i];
    }
    return par;
}

void check_run_config(const Common& c) {
    if (c.grid_n < 101)
        throw DomainError("grid_n must be at least 101");
    if (!(c.tol > 0.0))
        throw DomainError("tol must be positive");
}

fs::path prepare_out_dir(const Common& c) {
    fs::path dir(c.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw DomainError("cannot create output directory " + c.out_dir + ": " + ec.message());
    return dir;
}

void write_json_file(const fs::path& path, const json& j) {
    write_text_file(path.string(), j.dump(2) + "\n");
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

// Every run records what produced it. nlohmann::json keeps object keys
// sorted, so identical configs serialize to identical bytes.
json base_manifest(const char* command, const ModelParams& par, const Common& c) {
    json m;
    m["artifact_version"] = kArtifactVersion;
    m["command"] = command;
    m["config"] = json{{"params", params_to_json(par)},
                       {"grid_n", c.grid_n},
                       {"tol", round12(c.tol)},
                       {"seed", c.seed}};
    return m;
}

void write_manifest(const fs::path& dir, const char* command, const ModelParams& par,
                    const Common& c, const json& options = json::object()) {
    json m = base_manifest(command, par, c);
    if (!options.empty())
        m["options"] = options;
    write_json_file(dir / "manifest.json", m);
}

const char* client_name(ClientAction a) { return a == ClientAction::Accept ? "accept" : "reject"; }
const char* worker_name(WorkerAction a) { return a == WorkerAction::Effort ? "effort" : "shirk"; }

const char* output_symbol(Output z) {
    switch (z) {
    case Output::Good: return "g";
    case Output::Bad: return "b";
    default: return "0";
    }
}

int cmd_derive(const Common& c) {
    ModelParams par = resolve_params(c);
    check_run_config(c);
    DerivedQuantities d = derive(par);
    fs::path dir = prepare_out_dir(c);
    json out = derived_to_json(d);
    write_json_file(dir / "derived.json", out);
    write_manifest(dir, "derive", par, c);
    emit(out);
    return kExitOk;
}

int cmd_benchmark(const Common& c, const std::string& variant_name) {
    ModelParams par = resolve_params(c);
    check_run_config(c);
    DerivedQuantities d = derive(par);
    fs::path dir = prepare_out_dir(c);

    PpeSet set = ppe_payoff_set(d);
    json out;
    out["degenerate"] = set.degenerate;
    out["worker_lo"] = round12(set.worker_lo);
    out["worker_hi"] = round12(set.worker_hi);
    json verts = json::array();
    for (const auto& v : set.vertices)
        verts.push_back(json::array({round12(v[0]), round12(v[1])}));
    out["vertices"] = verts;
    if (!set.degenerate) {
        AutomatonVariant variant =
            variant_name == "mixed" ? AutomatonVariant::Mixed : AutomatonVariant::Pure;
        BenchmarkAutomaton a = build_automaton(d, variant);
        out["variant"] = variant_name;
        out["effort_prob_in_N"] = round12(a.effort_prob_in_N);
        out["gamma"] = round12(a.gamma);
        out["W_N"] = round12(a.W_N);
        out["W_P"] = round12(a.W_P);
        out["V_N"] = round12(a.V_N);
        out["V_P"] = round12(a.V_P);
    }
    write_json_file(dir / "benchmark.json", out);
    write_manifest(dir, "benchmark", par, c, json{{"variant", variant_name}});
    emit(out);
    return kExitOk;
}

int cmd_solve(const Common& c, bool verify, int max_iterations) {
    ModelParams par = resolve_params(c);
    check_run_config(c);
    DerivedQuantities d = derive(par);
    fs::path dir = prepare_out_dir(c);

    json report;
    if (!d.mediation_nontrivial) {
        write_csv((dir / "F.csv").string(), {"U", "F"}, {{"0", "0"}});
        report["degenerate_note"] =
            "mediation is trivial at this discount factor; the only sustainable promise is 0";
        report["delta_lo"] = round12(d.delta_lo);
        report["converged"] = true;
    } else {
        UtilityGrid grid = make_grid(d, c.grid_n);
        SolveReport rep;
        ValueFunction F = policy_evaluate(d, grid, c.tol, &rep, max_iterations);

        std::vector<std::vector<std::string>> rows;
        rows.reserve(grid.nodes.size());
        for (std::size_t i = 0; i < grid.nodes.size(); ++i)
            rows.push_back({num12(grid.nodes[i]), num12(F.values[i])});
        write_csv((dir / "F.csv").string(), {"U", "F"}, rows);

        report["grid_n"] = c.grid_n;
        report["iterations"] = rep.iterations;
        report["final_change"] = round12(rep.final_change);
        report["certified_error"] = round12(rep.certified_error);
        report["converged"] = rep.converged;
        report["U_bar"] = round12(d.U_bar);
        report["F_at_U_bar"] = round12(F.values.back());
        if (verify) {
            OptimalityReport audit = verify_policy_optimality(d, F);
            report["max_gap"] = round12(audit.max_gap);
            report["worst_gap_U"] = round12(audit.worst_gap_U);
            report["max_residual"] = round12(audit.max_residual);
            report["max_second_difference"] = round12(audit.max_second_difference);
        }
    }
    write_json_file(dir / "report.json", report);
    write_manifest(dir, "solve", par, c,
                   json{{"verify", verify}, {"max_iterations", max_iterations}});
    emit(report);
    return kExitOk;
}

int cmd_policy(const Common& c) {
    ModelParams par = resolve_params(c);
    check_run_config(c);
    DerivedQuantities d = derive(par);
    fs::path dir = prepare_out_dir(c);

    std::vector<std::string> header{"U", "region", "mu_e", "mu_s", "mu_o", "U_g", "U_b", "U_hat"};
    std::vector<std::vector<std::string>> rows;
    json out;
    if (!d.mediation_nontrivial) {
        rows.push_back({"0", region_name(RegionTag::Absorbing), "0", "0", "1", "0", "0", "0"});
        out["degenerate_note"] =
            "mediation is trivial at this discount factor; the device rejects forever at promise 0";
    } else {
        UtilityGrid grid = make_grid(d, c.grid_n);
        rows.reserve(grid.nodes.size());
        for (double U : grid.nodes) {
            PolicyStep s = policy_at(d, U);
            rows.push_back({num12(U), region_name(s.region), num12(s.mu_e), num12(s.mu_s),
                            num12(s.mu_o), num12(s.U_g), num12(s.U_b), num12(s.U_hat)});
        }
    }
    write_csv((dir / "policy.csv").string(), header, rows);
    write_manifest(dir, "policy", par, c);
    out["rows"] = rows.size();
    emit(out);
    return kExitOk;
}

int cmd_simulate(const Common& c, double u0, bool u0_given, int horizon, bool horizon_given,
                 long paths, bool dump) {
    ModelParams par = resolve_params(c);
    check_run_config(c);
    DerivedQuantities d = derive(par);
    if (!d.mediation_nontrivial)
        throw DomainError("mediation is trivial at this discount factor; nothing to simulate");
    fs::path dir = prepare_out_dir(c);

    UtilityGrid grid = make_grid(d, c.grid_n);
    ValueFunction F = policy_evaluate(d, grid, c.tol);
    if (!u0_given)
        u0 = initial_utility(d, F);
    if (!horizon_given)
        horizon = default_horizon(d);

    std::vector<TrajectoryRecord> first_path;
    SimulationStats st =
        simulate(d, F, u0, horizon, paths, c.seed, dump ? &first_path : nullptr);

    json out;
    out["u0"] = round12(u0);
    out["n_paths"] = st.n_paths;
    out["horizon"] = st.horizon;
    out["worker_mean"] = round12(st.worker_mean);
    out["worker_se"] = round12(st.worker_se);
    out["client_mean"] = round12(st.client_mean);
    out["client_se"] = round12(st.client_se);
    out["client_reference"] = round12(st.client_reference);
    out["acceptance_frequency"] = round12(st.acceptance_frequency);
    out["tail_bound"] = round12(st.tail_bound);
    out["absorbed_paths"] = st.absorption_times.size();
    out["not_absorbed"] = st.not_absorbed;
    if (!st.absorption_times.empty()) {
        out["absorption_time_min"] = st.absorption_times.front();
        out["absorption_time_median"] = st.absorption_times[st.absorption_times.size() / 2];
        out["absorption_time_max"] = st.absorption_times.back();
    }
    write_json_file(dir / "simulate.json", out);

    if (dump) {
        std::vector<std::vector<std::string>> rows;
        rows.reserve(first_path.size());
        for (const TrajectoryRecord& rec : first_path)
            rows.push_back({std::to_string(rec.t), num12(rec.U), client_name(rec.rec_client),
                            worker_name(rec.rec_worker), worker_name(rec.action),
                            output_symbol(rec.output), num12(rec.u), num12(rec.v)});
        write_csv((dir / "trajectories.csv").string(),
                  {"t", "U", "rec_client", "rec_worker", "action", "output", "u", "v"}, rows);
    }

    write_manifest(dir, "simulate", par, c,
                   json{{"u0", round12(u0)},
                        {"horizon", horizon},
                        {"paths", paths},
                        {"dump", dump}});
    emit(out);
    return kExitOk;
}

int cmd_welfare(const Common& c, double dstar_tol) {
    ModelParams par = resolve_params(c);
    check_run_config(c);
    fs::path dir = prepare_out_dir(c);

    WelfareReport rep = welfare_report(par, dstar_tol, c.grid_n, c.tol);
    DeltaStarResult ds = find_delta_star(par, dstar_tol, c.grid_n, c.tol);

    json out;
    out["W_star"] = round12(rep.W_star);
    out["W_mediated"] = round12(rep.W_mediated);
    out["W_benchmark"] = round12(rep.W_benchmark);
    out["gap"] = round12(rep.gap);
    out["beta_bar"] = round12(rep.beta_bar);
    out["frontier"] = json{{"U_lo", round12(rep.frontier_L.U_lo)},
                           {"V_lo", round12(rep.frontier_L.V_lo)},
                           {"U_hi", round12(rep.frontier_L.U_hi)},
                           {"V_hi", round12(rep.frontier_L.V_hi)}};
    out["delta_star"] = json{{"delta_star", round12(ds.delta_star)},
                             {"attained", ds.attained},
                             {"bracket", json::array({round12(ds.bracket_lo), round12(ds.bracket_hi)})},
                             {"iterations", ds.iterations},
                             {"target", round12(ds.target)},
                             {"feasible_cap", round12(ds.feasible_cap)}};
    write_json_file(dir / "welfare.json", out);
    write_manifest(dir, "welfare", par, c, json{{"dstar_tol", round12(dstar_tol)}});
    emit(out);
    return kExitOk;
}

int cmd_sweep(const Common& c, const std::vector<double>& deltas) {
    ModelParams par = resolve_params(c);
    check_run_config(c);
    fs::path dir = prepare_out_dir(c);

    SweepResult sw = antifolk_sweep(par, deltas, c.grid_n, c.tol);
    std::vector<std::vector<std::string>> rows;
    rows.reserve(sw.rows.size());
    for (const SweepRow& row : sw.rows)
        rows.push_back({num12(row.delta), num12(row.U_bar), num12(row.F_at_Ubar),
                        num12(row.W_star), num12(row.W_mediated), num12(row.gap)});
    write_csv((dir / "sweep.csv").string(),
              {"delta", "U_bar", "F_at_Ubar", "W_star", "W_mediated", "gap"}, rows);

    json deltas_json = json::array();
    for (double delta : deltas)
        deltas_json.push_back(round12(delta));
    write_manifest(dir, "sweep", par, c, json{{"deltas", deltas_json}});

    json out;
    out["rows"] = sw.rows.size();
    out["min_gap"] = round12(sw.min_gap);
    emit(out);
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"repeated moral-hazard service relationship: boundary solver, "
                 "benchmark, simulation, and welfare accounting"};
    app.require_subcommand(1);

    Common c;
    add_common_options(app, c);

    std::string variant = "pure";
    bool verify = false;
    int max_iterations = 0;
    double u0 = 0.0;
    int horizon = 0;
    long paths = 10000;
    bool dump = false;
    double dstar_tol = 1e-3;
    std::vector<double> deltas;

    CLI::App* c_derive = app.add_subcommand("derive", "print model constants and regime flags");
    CLI::App* c_bench =
        app.add_subcommand("benchmark", "no-mediation payoff set and trigger automaton");
    c_bench->add_option("--variant", variant, "automaton variant")
        ->check(CLI::IsMember({"pure", "mixed"}));
    CLI::App* c_solve = app.add_subcommand("solve", "value-iterate the client boundary F");
    c_solve->add_flag("--verify", verify, "audit the result with the brute-force oracle");
    c_solve->add_option("--max-iterations", max_iterations,
                        "cap on value-iteration sweeps, 0 means automatic");
    CLI::App* c_policy =
        app.add_subcommand("policy", "dump the closed-form device policy over the grid");
    CLI::App* c_sim = app.add_subcommand("simulate", "Monte Carlo paths of the optimal device");
    CLI::Option* u0_opt =
        c_sim->add_option("--u0", u0, "starting promise, default is the firm's optimum");
    CLI::Option* horizon_opt =
        c_sim->add_option("--horizon", horizon, "truncation horizon, default is discount-based");
    c_sim->add_option("--paths", paths, "number of simulated paths");
    c_sim->add_flag("--dump", dump, "write the first path to trajectories.csv");
    CLI::App* c_welfare =
        app.add_subcommand("welfare", "first best, mediated value, and the discount cutoff");
    c_welfare->add_option("--dstar-tol", dstar_tol, "bisection bracket width for delta_star");
    CLI::App* c_sweep = app.add_subcommand("sweep", "welfare gap across discount factors");
    c_sweep->add_option("--deltas", deltas, "comma-separated discount factors")->delimiter(',');

    for (CLI::App* sub : {c_derive, c_bench, c_solve, c_policy, c_sim, c_welfare, c_sweep})
        sub->fallthrough();

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("mhm");
    for (const std::string& a : args)
        argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (c_derive->parsed())
            return cmd_derive(c);
        if (c_bench->parsed())
            return cmd_benchmark(c, variant);
        if (c_solve->parsed())
            return cmd_solve(c, verify, max_iterations);
        if (c_policy->parsed())
            return cmd_policy(c);
        if (c_sim->parsed())
            return cmd_simulate(c, u0, u0_opt->count() > 0, horizon, horizon_opt->count() > 0,
                                paths, dump);
        if (c_welfare->parsed())
            return cmd_welfare(c, dstar_tol);
        if (c_sweep->parsed())
            return cmd_sweep(c, deltas);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitOk;
}

} // namespace mhm::cli
