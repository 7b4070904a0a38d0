#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "opfpz/solvers.hpp"

namespace opfpz {

struct RunConfig {
    std::string case_path;
    std::string method = "all";       // local | local-flapc | pso | apso | enum | all
    std::string pz_mode = "product";  // product | traditional | off
    int runs = 1;
    std::uint64_t seed = 1;
    std::string output_dir = ".";
    PenaltyConfig penalty;
    PsoConfig pso;
    LocalConfig local;
};

namespace detail {

inline std::string fmt_mw(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

inline std::string fmt_cost(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4f", x);
    return buf;
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct TaggedResult {
    SolveResult result;
    std::uint64_t seed = 0;
};

inline nlohmann::ordered_json result_to_json(const TaggedResult& tr, const std::string& pz_mode) {
    const SolveResult& r = tr.result;
    nlohmann::ordered_json j;
    j["method_tag"] = r.method_tag;
    j["seed"] = tr.seed;
    j["pz_mode"] = pz_mode;
    j["dispatch"] = r.best_dispatch;
    j["p_slack"] = r.p_slack;
    j["cost"] = r.best_cost;
    j["fitness"] = r.best_fitness;
    j["total_generation_mw"] = r.total_generation;
    j["feasible"] = r.per_generator_feasible;
    j["trace"] = r.trace;
    j["evaluations"] = r.evaluations;
    j["subproblems"] = r.subproblems;
    j["diverged"] = r.diverged;
    j["wall_time"] = r.wall_time;
    return j;
}

inline bool all_feasible(const SolveResult& r) {
    return std::all_of(r.per_generator_feasible.begin(), r.per_generator_feasible.end(),
                       [](bool b) { return b; });
}

/// Uniform random start in the generator box, one independent stream per run.
inline DispatchVector random_start(const OpfProblem& problem, std::uint64_t seed) {
    rng::Stream stream(seed, 0x5743A1D2u);
    const auto lo = problem.lower_bounds();
    const auto hi = problem.upper_bounds();
    DispatchVector x(lo.size());
    for (std::size_t d = 0; d < x.size(); ++d) x[d] = stream.uniform(lo[d], hi[d]);
    return x;
}

}  // namespace detail

/// Execute one method for the configured number of runs.
inline std::vector<detail::TaggedResult> run_method(const OpfProblem& problem,
                                                    const std::string& method,
                                                    const RunConfig& cfg) {
    std::vector<detail::TaggedResult> out;
    if (method == "local") {
        for (int k = 0; k < cfg.runs; ++k) {
            const std::uint64_t s = cfg.seed + static_cast<std::uint64_t>(k);
            out.push_back({solve_local(problem, detail::random_start(problem, s), cfg.local), s});
        }
    } else if (method == "local-flapc") {
        out.push_back({solve_local_flapc(problem, cfg.local), cfg.seed});
    } else if (method == "pso" || method == "apso") {
        for (int k = 0; k < cfg.runs; ++k) {
            PsoConfig pc = cfg.pso;
            pc.rng_seed = cfg.seed + static_cast<std::uint64_t>(k);
            pc.adaptive = (method == "apso");
            out.push_back({solve_pso(problem, pc), pc.rng_seed});
        }
    } else if (method == "enum") {
        out.push_back({solve_enumeration(problem, cfg.local), cfg.seed});
    } else {
        throw std::invalid_argument("unknown method: " + method);
    }
    return out;
}

/// Full experiment driver: runs the requested method(s) and writes
/// results.json, summary.csv and per-seed convergence traces into the output
/// directory. Returns the process exit status (0 ok, 2 bad input or config,
/// 3 when every run diverged).
inline int run(const RunConfig& cfg, std::ostream& log = std::cout) {
    Case cs;
    try {
        cs = load_case_file(cfg.case_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    static const std::vector<std::string> known_methods = {"local", "local-flapc", "pso",
                                                           "apso",  "enum",        "all"};
    static const std::vector<std::string> known_modes = {"product", "traditional", "off"};
    const bool method_ok =
        std::find(known_methods.begin(), known_methods.end(), cfg.method) != known_methods.end();
    const bool mode_ok =
        std::find(known_modes.begin(), known_modes.end(), cfg.pz_mode) != known_modes.end();
    if (!method_ok || !mode_ok || cfg.runs < 1) {
        std::cerr << "error: invalid run configuration\n";
        return 2;
    }
    if (cfg.method == "enum" && cfg.pz_mode == "product") {
        std::cerr << "error: method=enum requires pz_mode=traditional or off\n";
        return 2;
    }
    if (cfg.method != "enum" && cfg.pz_mode == "traditional") {
        std::cerr << "error: pz_mode=traditional is only meaningful with method=enum\n";
        return 2;
    }

    const PzMode mode = cfg.pz_mode == "off"
                            ? PzMode::off
                            : (cfg.pz_mode == "traditional" ? PzMode::traditional
                                                            : PzMode::product);
    const OpfProblem problem(std::move(cs), mode, cfg.penalty);

    std::vector<std::string> methods;
    if (cfg.method == "all")
        methods = {"local", "local-flapc", "pso", "apso"};
    else
        methods = {cfg.method};

    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec) {
        std::cerr << "error: cannot create output directory " << cfg.output_dir << "\n";
        return 2;
    }
    const std::filesystem::path out_dir(cfg.output_dir);

    nlohmann::ordered_json results = nlohmann::ordered_json::array();
    std::ofstream summary(out_dir / "summary.csv");
    summary << "method,pz_mode,best_cost,median_cost,worst_cost,total_gen_MW,feasible,evals\n";

    bool any_converged = false;
    for (const auto& method : methods) {
        const auto runs = run_method(problem, method, cfg);

        std::vector<double> costs;
        std::size_t best_idx = 0;
        long total_evals = 0;
        for (std::size_t i = 0; i < runs.size(); ++i) {
            const auto& r = runs[i].result;
            costs.push_back(r.best_cost);
            total_evals += r.evaluations;
            if (r.best_fitness < runs[best_idx].result.best_fitness) best_idx = i;
            if (!r.diverged) any_converged = true;
            results.push_back(detail::result_to_json(runs[i], cfg.pz_mode));
            if (method == "pso" || method == "apso") {
                std::ofstream trace(out_dir / ("trace_" + method + "_" +
                                               std::to_string(runs[i].seed) + ".csv"));
                trace << "iteration,best_fitness\n";
                for (std::size_t t = 0; t < r.trace.size(); ++t)
                    trace << t << "," << detail::fmt_cost(r.trace[t]) << "\n";
            }
        }
        const auto& best = runs[best_idx].result;
        summary << method << "," << cfg.pz_mode << ","
                << detail::fmt_cost(*std::min_element(costs.begin(), costs.end())) << ","
                << detail::fmt_cost(detail::median(costs)) << ","
                << detail::fmt_cost(*std::max_element(costs.begin(), costs.end())) << ","
                << detail::fmt_mw(best.total_generation) << ","
                << (detail::all_feasible(best) ? 1 : 0) << "," << total_evals << "\n";
        log << method << ": best cost " << detail::fmt_cost(best.best_cost) << " $/h over "
            << runs.size() << " run(s)\n";
    }

    std::ofstream(out_dir / "results.json") << results.dump(2) << "\n";
    return any_converged ? 0 : 3;
}

/// Case inspection: counts, load, FLAPC table, priority list and zone
/// structure. Non-mutating; parse errors carry line numbers.
inline int validate_case(const std::string& path, std::ostream& out = std::cout) {
    Case cs;
    try {
        cs = load_case_file(path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    const int slack_bus = cs.network.buses[cs.network.slack_index()].id;
    std::vector<Generator> ctrl;
    for (const auto& g : cs.generators)
        if (g.bus != slack_bus) ctrl.push_back(g);

    out << "buses: " << cs.network.buses.size() << "\n";
    out << "branches: " << cs.network.branches.size() << "\n";
    out << "generators: " << cs.generators.size() << " (slack at bus " << slack_bus << ")\n";
    out << "total load: " << detail::fmt_mw(cs.network.total_load_mw()) << " MW\n";

    const auto ranks = priority_list(ctrl);
    out << "bus  flapc   priority  feasible zones (MW)\n";
    for (std::size_t i = 0; i < ctrl.size(); ++i) {
        char flapc_buf[32];
        std::snprintf(flapc_buf, sizeof flapc_buf, "%.4f", flapc(ctrl[i]));
        out << ctrl[i].bus << "  " << flapc_buf << "  " << ranks[i] << "  ";
        for (const auto& iv : ctrl[i].zones.intervals)
            out << "[" << detail::fmt_mw(iv.a) << ", " << detail::fmt_mw(iv.b) << "] ";
        out << "\n";
    }
    std::vector<FeasibleZones> zones;
    for (const auto& g : ctrl) zones.push_back(g.zones);
    out << "N_r (zone combinations): " << combination_count(zones) << "\n";
    return 0;
}

}  // namespace opfpz
