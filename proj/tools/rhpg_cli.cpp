/*
 Copyright 2026 The RHPG Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

// Command-line front end: solve, learn, sweep, baseline, gen.
//
// Exit codes: 0 success, 2 configuration or I/O error, 3 numerical failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rhpg/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<double> eps;
    std::optional<std::string> horizon_mode;
    std::optional<int> horizon;
    std::optional<std::string> radius_rule;
    std::optional<std::string> oracle;
    std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Overrides& o, bool with_schedule) {
    cmd->add_option("--config", o.config, "Experiment config or bare system JSON")->required();
    cmd->add_option("--seed", o.seed, "Random seed (overrides base_seed)");
    cmd->add_option("--out", o.out, "Output directory");
    if (!with_schedule) return;
    cmd->add_option("--eps", o.eps, "Target accuracy");
    cmd->add_option("--horizon-mode", o.horizon_mode, "Horizon rule")
        ->check(CLI::IsMember({"explicit", "heuristic", "theorem"}));
    cmd->add_option("--horizon", o.horizon, "Horizon for --horizon-mode explicit");
    cmd->add_option("--radius-rule", o.radius_rule, "Smoothing radius rule")
        ->check(CLI::IsMember({"sqrt", "proportional"}));
    cmd->add_option("--oracle", o.oracle, "Gradient estimator")
        ->check(CLI::IsMember({"two-point", "one-point"}));
}

// A file with a top-level "A" is a bare system; anything else is a full config.
rhpg::ExperimentConfig load_any(const Overrides& o) {
    const std::filesystem::path path(o.config);
    const rhpg::Json j = rhpg::load_json(path);
    rhpg::ExperimentConfig c;
    if (j.is_object() && j.contains("A")) {
        c.system = rhpg::system_from_json(j);
        c.system_source = "file";
    } else {
        c = rhpg::config_from_json(j, path.parent_path());
    }
    if (o.seed) c.base_seed = *o.seed;
    if (o.eps) c.epsilons = {*o.eps};
    if (o.horizon_mode) c.horizon.mode = rhpg::horizon_mode_from_string(*o.horizon_mode);
    if (o.horizon) c.horizon.explicit_horizon = *o.horizon;
    if (o.radius_rule) c.schedule.radius_rule = rhpg::radius_rule_from_string(*o.radius_rule);
    if (o.oracle) c.schedule.oracle = rhpg::zo::oracle_kind_from_string(*o.oracle);
    if (o.out) c.output_dir = *o.out;
    c.validate();
    return c;
}

void emit(const rhpg::Json& j, const std::optional<std::string>& out, const std::string& name) {
    const std::string text = j.dump(2) + "\n";
    if (out) rhpg::write_text(std::filesystem::path(*out) / name, text);
    std::cout << text;
}

int cmd_solve(const Overrides& o) {
    const rhpg::ExperimentConfig c = load_any(o);
    const rhpg::SystemInstance& sys = c.plant();
    const auto are = rhpg::riccati::solve_are(sys.dynamics, sys.weights);
    rhpg::Json j = rhpg::riccati::to_json(are);
    j["stability_threshold"] = rhpg::riccati::stability_threshold(are, sys.dynamics);
    if (o.eps) j["horizon_bound"] = rhpg::riccati::horizon_bound(are, sys.dynamics, sys.weights, *o.eps);
    emit(j, o.out, "solution.json");
    return 0;
}

int cmd_learn(const Overrides& o) {
    const rhpg::ExperimentConfig c = load_any(o);
    if (c.epsilons.empty()) throw rhpg::ConfigError("learn: give --eps or an epsilons list");
    const double eps = c.epsilons.front();
    const auto oracle = rhpg::CertificationOracle::from_system(c.plant());
    const int N = rhpg::select_horizon(c.horizon, eps, &oracle);
    const auto schedule = rhpg::make_schedule(c.schedule, eps, c.delta, N);
    const rhpg::RolloutSimulator simulator(c.plant());
    const auto report = rhpg::run_rhpg(simulator, schedule, c.base_seed, &oracle);
    emit(rhpg::report_to_json(report), o.out, "report.json");
    return report.completed ? 0 : kExitNumerical;
}

int cmd_sweep(const Overrides& o) {
    const rhpg::ExperimentConfig c = load_any(o);
    const auto result = rhpg::run_sweep(c);
    rhpg::emit_csv(result, c.output_dir / "sweep.csv");
    const rhpg::Json manifest = rhpg::sweep_manifest(c, result);
    rhpg::write_text(c.output_dir / "manifest.json", manifest.dump(2) + "\n");
    std::cout << manifest.at("summary").dump(2) << "\n";
    return 0;
}

int cmd_baseline(const Overrides& o, const std::optional<double>& k_init) {
    const rhpg::ExperimentConfig c = load_any(o);
    const rhpg::SystemInstance& sys = c.plant();
    rhpg::Matrix K0 = c.baseline.K_init.value_or(
        rhpg::Matrix::Zero(sys.dynamics.input_dim(), sys.dynamics.state_dim()));
    if (k_init) K0.setConstant(*k_init);
    rhpg::Json rows = rhpg::Json::array();
    int diverged = 0;
    for (int s = 0; s < c.baseline.seeds; ++s) {
        const auto row = rhpg::run_baseline_vanilla_pg(c, rhpg::Policy(K0), c.base_seed + s);
        diverged += row.diverged ? 1 : 0;
        rhpg::Json r = {{"seed", row.seed},
                        {"diverged", row.diverged},
                        {"left_stabilizing_set", row.left_stabilizing_set},
                        {"iterations_run", row.iterations_run},
                        {"oracle_calls", row.oracle_calls}};
        if (!row.diverged) r["final_gain"] = rhpg::matrix_to_json(row.final_gain);
        if (!row.failure.empty()) r["failure"] = row.failure;
        rows.push_back(std::move(r));
    }
    const rhpg::Json j = {{"initial_gain", rhpg::matrix_to_json(K0)},
                          {"seeds", c.baseline.seeds},
                          {"diverged", diverged},
                          {"rows", std::move(rows)}};
    emit(j, o.out, "baseline.json");
    return 0;
}

int cmd_gen(int n, int m, double rho, std::uint64_t seed, const std::optional<std::string>& out) {
    const auto sys = rhpg::generate_random_system(n, m, rho, seed);
    const std::string text = rhpg::system_to_json(sys).dump(2) + "\n";
    if (out) rhpg::write_text(*out, text);
    else std::cout << text;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Receding-horizon policy gradient for LQR"};
    app.require_subcommand(1);

    Overrides solve_o, learn_o, sweep_o, base_o;
    auto* solve = app.add_subcommand("solve", "Solve the Riccati equation for a system");
    add_common(solve, solve_o, false);
    solve->add_option("--eps", solve_o.eps, "Also report the horizon bound for this accuracy");

    auto* learn = app.add_subcommand("learn", "Run one RHPG instance and print its report");
    add_common(learn, learn_o, true);

    auto* sweep = app.add_subcommand("sweep", "Run the accuracy sweep and write CSV + manifest");
    add_common(sweep, sweep_o, true);

    std::optional<double> k_init;
    auto* base = app.add_subcommand("baseline", "Vanilla zeroth-order PG on the infinite horizon");
    add_common(base, base_o, false);
    base->add_option("--k-init", k_init, "Constant initial gain");

    int gen_n = 2, gen_m = 1;
    double gen_rho = 1.5;
    std::uint64_t gen_seed = 0;
    std::optional<std::string> gen_out;
    auto* gen = app.add_subcommand("gen", "Generate a random stabilizable system");
    gen->add_option("--n", gen_n, "State dimension");
    gen->add_option("--m", gen_m, "Input dimension");
    gen->add_option("--rho", gen_rho, "Target spectral radius of A");
    gen->add_option("--seed", gen_seed, "Random seed");
    gen->add_option("--out", gen_out, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*solve) return cmd_solve(solve_o);
        if (*learn) return cmd_learn(learn_o);
        if (*sweep) return cmd_sweep(sweep_o);
        if (*base) return cmd_baseline(base_o, k_init);
        if (*gen) return cmd_gen(gen_n, gen_m, gen_rho, gen_seed, gen_out);
    } catch (const rhpg::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const rhpg::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const rhpg::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
