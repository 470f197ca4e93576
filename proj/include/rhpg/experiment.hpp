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

#ifndef RHPG_EXPERIMENT_HPP
#define RHPG_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rhpg/json_io.hpp"
#include "rhpg/rhpg.hpp"

namespace rhpg {

struct RandomSystemSpec {
    int n = 2;
    int m = 1;
    double target_rho = 1.5;
    std::uint64_t seed = 0;
};

/// Vanilla zeroth-order PG on the truncated infinite-horizon cost.
struct BaselineOptions {
    std::optional<Matrix> K_init;  // zero when unset
    double radius = 0.5;
    double stepsize = 1e-3;
    long long iterations = 2000;
    int rollout_length = 200;
    double divergence_guard = 1e6;
    int seeds = 100;
};

struct ExperimentConfig {
    std::optional<SystemInstance> system;
    /// "inline", "file" or "random".
    std::string system_source = "inline";
    std::optional<RandomSystemSpec> random_system;
    std::vector<double> epsilons;
    double delta = 0.1;
    int seeds_per_cell = 10;
    std::uint64_t base_seed = 0;
    ScheduleConstants schedule;
    HorizonOptions horizon;
    std::filesystem::path output_dir = "results";
    /// 0 selects the available hardware parallelism.
    int workers = 0;
    /// When false, wall_ms is written as 0 so reruns are byte-identical.
    bool record_wall_time = true;
    BaselineOptions baseline;

    void validate() const;
    const SystemInstance& plant() const;
};

/// `base_dir` resolves a relative "system_file".
ExperimentConfig config_from_json(const Json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
Json to_json(const ExperimentConfig& config);

struct SweepRow {
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    int horizon = 0;
    /// ||K~_0 - K*||_2; NaN for failed rows.
    double policy_error = 0.0;
    long long oracle_calls = 0;
    bool stabilizing = false;
    double wall_ms = 0.0;
    bool failed = false;
    std::string failure;
};

struct SweepResult {
    /// epsilon ascending, then seed ascending.
    std::vector<SweepRow> rows;

    std::vector<double> epsilons() const;
    std::vector<const SweepRow*> cell(double epsilon) const;
};

/// Runs every (epsilon, seed) cell on a bounded worker pool. Seeds are
/// base_seed, ..., base_seed + seeds_per_cell - 1. Cell failures become
/// failed rows.
SweepResult run_sweep(const ExperimentConfig& config);

struct BaselineRow {
    std::uint64_t seed = 0;
    Matrix initial_gain;
    Matrix final_gain;
    long long iterations_run = 0;
    long long oracle_calls = 0;
    bool diverged = false;
    /// Some iterate had rho(A - BK) >= 1 (checked oracle-side).
    bool left_stabilizing_set = false;
    std::string failure;
};

BaselineRow run_baseline_vanilla_pg(const ExperimentConfig& config, const Policy& K_init,
                                    std::uint64_t seed);

/// Gaussian A rescaled to rho(A) = target_rho, Gaussian B, Q = R = Sigma0 = I.
/// Resamples until the ARE solves; throws NumericalError after 100
/// consecutive rejections.
SystemInstance generate_random_system(int n, int m, double target_rho, std::uint64_t seed);

/// Shortest round-trip decimal form.
std::string format_double(double v);
std::string csv_field(const std::string& s);

/// Header epsilon,seed,policy_error,oracle_calls,stabilizing,wall_ms.
std::string sweep_csv(const SweepResult& result);
/// Throws IoError when the path is unwritable.
void emit_csv(const SweepResult& result, const std::filesystem::path& path);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);
double median(std::vector<double> values);

/// Per-epsilon medians, success rates and the oracle-call slope.
Json sweep_summary(const SweepResult& result);
Json sweep_manifest(const ExperimentConfig& config, const SweepResult& result);

}  // namespace rhpg

#endif  // RHPG_EXPERIMENT_HPP
