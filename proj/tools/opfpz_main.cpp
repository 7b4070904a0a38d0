// Command-line front end: load a case, run one or all solution methods, and
// emit result tables plus convergence traces for external plotting.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "opfpz/opfpz.hpp"

namespace {

void apply_setting(opfpz::RunConfig& cfg, const std::string& key, const nlohmann::json& value) {
    const auto num = [&] { return value.get<double>(); };
    if (key == "penalty.beta_pz") cfg.penalty.beta_pz = num();
    else if (key == "penalty.beta_v") cfg.penalty.beta_v = num();
    else if (key == "penalty.beta_q") cfg.penalty.beta_q = num();
    else if (key == "penalty.beta_slack_p") cfg.penalty.beta_slack_p = num();
    else if (key == "penalty.alpha_eq") cfg.penalty.alpha_eq = num();
    else if (key == "penalty.alpha_eq_fallback") cfg.penalty.alpha_eq_fallback = num();
    else if (key == "penalty.pz_scale") cfg.penalty.pz_scale = num();
    else if (key == "pso.swarm_size") cfg.pso.swarm_size = static_cast<int>(num());
    else if (key == "pso.max_iterations") cfg.pso.max_iterations = static_cast<int>(num());
    else if (key == "pso.w") cfg.pso.w = num();
    else if (key == "pso.c1") cfg.pso.c1 = num();
    else if (key == "pso.c2") cfg.pso.c2 = num();
    else if (key == "pso.w_high") cfg.pso.w_high = num();
    else if (key == "pso.w_low") cfg.pso.w_low = num();
    else if (key == "pso.c_high") cfg.pso.c_high = num();
    else if (key == "pso.c_low") cfg.pso.c_low = num();
    else if (key == "pso.v_max_fraction") cfg.pso.v_max_fraction = num();
    else if (key == "local.tol") cfg.local.tol = num();
    else if (key == "local.max_iter") cfg.local.max_iter = static_cast<int>(num());
    else if (key == "local.gradient_step") cfg.local.gradient_step = num();
    else if (key == "local.loss_margin") cfg.local.loss_margin = num();
    else if (key == "method") cfg.method = value.get<std::string>();
    else if (key == "pz_mode") cfg.pz_mode = value.get<std::string>();
    else if (key == "runs") cfg.runs = static_cast<int>(num());
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(num());
    else throw CLI::ValidationError("unknown configuration key '" + key + "'");
}

void apply_config_file(opfpz::RunConfig& cfg, const std::string& path) {
    std::ifstream f(path);
    if (!f) throw CLI::ValidationError("cannot open config file " + path);
    nlohmann::json j = nlohmann::json::parse(f);
    for (const auto& [section, body] : j.items()) {
        if (body.is_object())
            for (const auto& [key, value] : body.items())
                apply_setting(cfg, section + "." + key, value);
        else
            apply_setting(cfg, section, body);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"AC optimal power flow with disjoint prohibited operating zones"};
    app.require_subcommand(1);

    opfpz::RunConfig cfg;
    std::string config_path;
    std::vector<std::string> sets;

    auto* run_cmd = app.add_subcommand("run", "run one or all solution methods");
    run_cmd->add_option("--case", cfg.case_path, "case file path")->required();
    run_cmd->add_option("--method", cfg.method,
                        "local | local-flapc | pso | apso | enum | all");
    run_cmd->add_option("--pz-mode", cfg.pz_mode, "product | traditional | off");
    run_cmd->add_option("--runs", cfg.runs, "repeat count for stochastic methods");
    run_cmd->add_option("--seed", cfg.seed, "base RNG seed");
    run_cmd->add_option("--out", cfg.output_dir, "output directory");
    run_cmd->add_option("--config", config_path, "JSON config file with solver overrides");
    run_cmd->add_option("--set", sets, "override a single key, e.g. pso.swarm_size=60");

    std::string validate_path;
    auto* validate_cmd = app.add_subcommand("validate", "inspect a case file");
    validate_cmd->add_option("--case", validate_path, "case file path")->required();

    CLI11_PARSE(app, argc, argv);

    if (validate_cmd->parsed()) return opfpz::validate_case(validate_path);

    try {
        if (!config_path.empty()) apply_config_file(cfg, config_path);
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos)
                throw CLI::ValidationError("--set expects KEY=VALUE, got '" + s + "'");
            const std::string key = s.substr(0, eq);
            const std::string value = s.substr(eq + 1);
            if (key == "method" || key == "pz_mode")
                apply_setting(cfg, key, nlohmann::json(value));
            else
                apply_setting(cfg, key, nlohmann::json::parse(value));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return opfpz::run(cfg);
}
