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

#ifndef RHPG_ZEROTH_ORDER_HPP
#define RHPG_ZEROTH_ORDER_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rhpg/system_model.hpp"

namespace rhpg::zo {

/// Randomness shared by every evaluation inside one oracle query: the
/// initial state and, for noisy plants, the seed of the disturbance stream.
struct CostSample {
    Vector x;
    std::uint64_t noise_seed = 0;
};

/// Single-sample objective J(K; sample). Both callables must be safe to call
/// concurrently when a loop is shared across workers.
class SampledCost {
public:
    using Sampler = std::function<CostSample(Rng&)>;
    using Evaluator = std::function<double(const Matrix&, const CostSample&)>;

    SampledCost(Sampler sampler, Evaluator evaluator);

    /// Wraps a cost that ignores the sample.
    static SampledCost deterministic(std::function<double(const Matrix&)> cost);

    CostSample draw(Rng& rng) const { return sampler_(rng); }
    double operator()(const Matrix& K, const CostSample& sample) const {
        return evaluator_(K, sample);
    }

private:
    Sampler sampler_;
    Evaluator evaluator_;
};

/// Unit-Frobenius-norm m x n direction.
struct PerturbationDirection {
    Matrix U;
};

PerturbationDirection sample_sphere(int m, int n, Rng& rng);

/// (mn / 2r) [J(K + rU; s) - J(K - rU; s)] U with one shared sample s.
Matrix two_point_estimate(const SampledCost& cost, const Matrix& K, double radius, Rng& rng);

/// (mn / r) J(K + rU; s) U.
Matrix one_point_estimate(const SampledCost& cost, const Matrix& K, double radius, Rng& rng);

enum class OracleKind { two_point, one_point };

std::string to_string(OracleKind kind);
OracleKind oracle_kind_from_string(const std::string& s);

struct InnerLoopConfig {
    double stepsize = 0.0;
    double radius = 0.0;
    long long iterations = 0;
    OracleKind oracle = OracleKind::two_point;
    double divergence_guard = 1e6;

    /// Throws ConfigError. Zero stepsize and zero iterations are accepted as
    /// degenerate runs.
    void validate() const;
};

/// One gradient query: the estimate and the number of cost evaluations used.
struct GradientSample {
    Matrix gradient;
    int cost_evaluations;
};

/// Gradient source of the inner loop. The zeroth-order estimators are the
/// production implementation; tests substitute exact or perturbed gradients.
using GradientOracle = std::function<GradientSample(const Matrix& K, Rng& rng)>;

GradientOracle make_zeroth_order_oracle(SampledCost cost, OracleKind kind, double radius);

struct IterationRecord {
    int stage;
    long long iteration;
    Matrix gain;
    long long oracle_calls;
    std::optional<double> error;
};

struct InnerLoopTrace {
    Policy final_gain;
    long long oracle_calls = 0;
    std::vector<IterationRecord> log;
};

struct InnerLoopOptions {
    /// Stage index h used in diagnostics and trace records.
    int stage = 0;
    bool record_log = false;
    /// When set, each log record carries ||K_i - reference||_2.
    std::optional<Matrix> reference;
};

/// T iterations of K <- K - eta * g(K). Never projects. Throws
/// InnerDivergence when ||K||_F exceeds the guard or turns non-finite.
InnerLoopTrace pg_inner_loop(const GradientOracle& oracle, const Policy& K_init,
                             const InnerLoopConfig& config, Rng& rng,
                             const InnerLoopOptions& options = {});

/// Same loop driven by the estimator named in `config`.
InnerLoopTrace pg_inner_loop(const SampledCost& cost, const Policy& K_init,
                             const InnerLoopConfig& config, Rng& rng,
                             const InnerLoopOptions& options = {});

/// One JSON object per line: {h, i, gain, oracle_calls[, error]}.
void write_trace_jsonl(std::ostream& out, const InnerLoopTrace& trace);

}  // namespace rhpg::zo

#endif  // RHPG_ZEROTH_ORDER_HPP
