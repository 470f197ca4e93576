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

#ifndef RHPG_RHPG_HPP
#define RHPG_RHPG_HPP

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rhpg/json_io.hpp"
#include "rhpg/riccati_oracle.hpp"
#include "rhpg/system_model.hpp"
#include "rhpg/zeroth_order.hpp"

namespace rhpg {

enum class RadiusRule { proportional, sqrt };
enum class WarmStart { zero, previous };
enum class HorizonMode { explicit_horizon, heuristic, theorem };

std::string to_string(RadiusRule rule);
std::string to_string(WarmStart warm);
std::string to_string(HorizonMode mode);
RadiusRule radius_rule_from_string(const std::string& s);
WarmStart warm_start_from_string(const std::string& s);
HorizonMode horizon_mode_from_string(const std::string& s);

struct HorizonOptions {
    HorizonMode mode = HorizonMode::heuristic;
    int explicit_horizon = 0;
    /// Base of the logarithm in ceil(log(1/eps)) + offset.
    double log_base = 2.718281828459045;
    int offset = 0;
};

/// Constants turning target accuracy into per-stage settings:
///   eta_h = c_eta eps_h^2,  r_h = c_r eps_h (or c_r sqrt(eps_h)),
///   T_h = ceil(c_T eps_h^-2 log(N / (delta eps_h^2))).
/// eps_h = eps unless `tightening` is set, in which case it shrinks by that
/// factor per stage as h decreases.
struct ScheduleConstants {
    double c_eta = 0.04;
    double c_r = 1.0;
    double c_T = 10.0;
    RadiusRule radius_rule = RadiusRule::proportional;
    zo::OracleKind oracle = zo::OracleKind::two_point;
    WarmStart warm_start = WarmStart::zero;
    std::optional<double> tightening;
    double divergence_guard = 1e6;
};

struct RhpgSchedule {
    double epsilon = 0.0;
    double delta = 0.0;
    int horizon = 0;
    /// Indexed by stage h.
    std::vector<zo::InnerLoopConfig> stages;
    RadiusRule radius_rule = RadiusRule::proportional;
    WarmStart warm_start = WarmStart::zero;

    void validate() const;
    const zo::InnerLoopConfig& stage(int h) const;
};

RhpgSchedule make_schedule(const ScheduleConstants& constants, double epsilon, double delta,
                           int horizon);

/// Black-box simulator the learner queries. It answers subproblem cost
/// queries and never exposes the plant matrices.
class RolloutSimulator {
public:
    explicit RolloutSimulator(SystemInstance system);

    int state_dim() const noexcept { return system_.dynamics.state_dim(); }
    int input_dim() const noexcept { return system_.dynamics.input_dim(); }
    bool noisy() const noexcept { return system_.noise.enabled(); }

    /// Draws x_h ~ D and a disturbance seed.
    zo::CostSample draw(Rng& rng) const;

    /// J_h(K_h; sample) with h = tail.first_index() - 1.
    double subproblem_cost(const Matrix& K_h, const PolicySequence& tail,
                           const zo::CostSample& sample) const;

    /// sum_{t < length} x_t'(Q + K'RK)x_t under u = -Kx; the truncated
    /// infinite-horizon objective used by the vanilla baseline.
    double truncated_cost(const Matrix& K, const zo::CostSample& sample, int length) const;

    /// J_h(.) for a frozen tail. The simulator must outlive the result.
    zo::SampledCost subproblem(PolicySequence tail) const;

    /// Total cost evaluations answered so far.
    long long evaluations() const noexcept { return evaluations_.load(); }

private:
    SystemInstance system_;
    mutable std::atomic<long long> evaluations_{0};
};

/// Model access for planning and certification; kept apart from the learner.
struct CertificationOracle {
    LinearDynamics dynamics;
    CostWeights weights;
    Matrix sigma0;
    riccati::AreSolution are;

    static CertificationOracle from_system(const SystemInstance& system);
};

/// explicit: passthrough; heuristic: ceil(log_b(1/eps)) + offset, floored at 1;
/// theorem: riccati::horizon_bound. Throws ConfigError when the theorem mode
/// has no oracle.
int select_horizon(const HorizonOptions& options, double epsilon,
                   const CertificationOracle* oracle = nullptr);

struct CertificationBlock {
    double spectral_radius;
    double policy_error;
    double closed_loop_norm_star;
    double threshold;
    bool stabilizing;
    /// policy_error < threshold, the sufficient stability condition.
    bool sufficient;
};

struct StageSummary {
    int stage;
    Matrix initial_gain;
    Matrix final_gain;
    long long oracle_calls;
    zo::InnerLoopConfig config;
    /// ||K~_h - K~*_h||_2 against the optimum of the realized subproblem;
    /// only present with an oracle attached.
    std::optional<double> stage_error;
};

struct RhpgReport {
    std::optional<Policy> final_gain;
    PolicySequence gains;
    long long total_oracle_calls = 0;
    std::vector<StageSummary> stages;  // in processing order, h = N-1 first
    std::vector<zo::InnerLoopTrace> traces;
    std::optional<CertificationBlock> certification;
    std::uint64_t seed = 0;
    RhpgSchedule schedule;
    bool completed = false;
    std::string failure;
};

struct RhpgHooks {
    /// Replaces the zeroth-order estimator for stage h.
    std::function<zo::GradientOracle(int h, const PolicySequence& tail)> gradient_override;
    /// Applied to K~_h after its inner loop, before it is frozen.
    std::function<Matrix(int h, const Matrix& K)> stage_perturbation;
    bool record_traces = false;
};

/// Backward sweep h = N-1, ..., 0 over the one-step subproblems. Inner
/// divergence yields a partial report with completed = false.
RhpgReport run_rhpg(const RolloutSimulator& simulator, const RhpgSchedule& schedule,
                    std::uint64_t seed, const CertificationOracle* oracle = nullptr,
                    const RhpgHooks& hooks = {});

CertificationBlock certify_gain(const Policy& K, const CertificationOracle& oracle);

/// Throws ConfigError when the report has no final gain.
CertificationBlock certify_output(const RhpgReport& report, const CertificationOracle& oracle);

Json to_json(const RhpgSchedule& schedule);
Json to_json(const CertificationBlock& block);
Json report_to_json(const RhpgReport& report);

}  // namespace rhpg

#endif  // RHPG_RHPG_HPP
