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

#include "rhpg/zeroth_order.hpp"

#include <cmath>
#include <ostream>

#include "rhpg/json_io.hpp"

namespace rhpg::zo {

SampledCost::SampledCost(Sampler sampler, Evaluator evaluator)
    : sampler_(std::move(sampler)), evaluator_(std::move(evaluator)) {
    if (!sampler_ || !evaluator_) throw ConfigError("SampledCost needs both callables");
}

SampledCost SampledCost::deterministic(std::function<double(const Matrix&)> cost) {
    if (!cost) throw ConfigError("SampledCost::deterministic needs a callable");
    return SampledCost([](Rng&) { return CostSample{}; },
                       [cost = std::move(cost)](const Matrix& K, const CostSample&) {
                           return cost(K);
                       });
}

PerturbationDirection sample_sphere(int m, int n, Rng& rng) {
    if (m < 1 || n < 1) throw ConfigError("sample_sphere: m and n must be >= 1");
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix U(m, n);
    double norm = 0.0;
    do {
        for (Eigen::Index i = 0; i < U.size(); ++i) U.data()[i] = normal(rng);
        norm = U.norm();
    } while (!(norm > 0.0));
    U /= norm;
    return {std::move(U)};
}

namespace {

double checked(double value, const char* which, const Matrix& K) {
    if (!std::isfinite(value))
        throw EstimationError(std::string("zeroth-order oracle: non-finite cost at ") + which +
                                  " perturbation (||K||_F = " + std::to_string(K.norm()) + ")",
                              value);
    return value;
}

void check_radius(double radius) {
    if (!(radius > 0.0)) throw ConfigError("smoothing radius must be positive");
}

}  // namespace

Matrix two_point_estimate(const SampledCost& cost, const Matrix& K, double radius, Rng& rng) {
    check_radius(radius);
    const auto m = static_cast<int>(K.rows());
    const auto n = static_cast<int>(K.cols());
    const Matrix U = sample_sphere(m, n, rng).U;
    const CostSample sample = cost.draw(rng);
    const double plus = checked(cost(K + radius * U, sample), "+", K);
    const double minus = checked(cost(K - radius * U, sample), "-", K);
    return (static_cast<double>(m) * n / (2.0 * radius) * (plus - minus)) * U;
}

Matrix one_point_estimate(const SampledCost& cost, const Matrix& K, double radius, Rng& rng) {
    check_radius(radius);
    const auto m = static_cast<int>(K.rows());
    const auto n = static_cast<int>(K.cols());
    const Matrix U = sample_sphere(m, n, rng).U;
    const CostSample sample = cost.draw(rng);
    const double value = checked(cost(K + radius * U, sample), "+", K);
    return (static_cast<double>(m) * n / radius * value) * U;
}

std::string to_string(OracleKind kind) {
    return kind == OracleKind::two_point ? "two-point" : "one-point";
}

OracleKind oracle_kind_from_string(const std::string& s) {
    if (s == "two-point") return OracleKind::two_point;
    if (s == "one-point") return OracleKind::one_point;
    throw ConfigError("unknown oracle kind \"" + s + "\" (expected two-point or one-point)");
}

void InnerLoopConfig::validate() const {
    if (!(stepsize >= 0.0) || !std::isfinite(stepsize))
        throw ConfigError("inner loop: stepsize must be finite and >= 0");
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw ConfigError("inner loop: radius must be finite and > 0");
    if (iterations < 0) throw ConfigError("inner loop: iterations must be >= 0");
    if (!(divergence_guard > 0.0)) throw ConfigError("inner loop: divergence guard must be > 0");
}

GradientOracle make_zeroth_order_oracle(SampledCost cost, OracleKind kind, double radius) {
    check_radius(radius);
    if (kind == OracleKind::two_point) {
        return [cost = std::move(cost), radius](const Matrix& K, Rng& rng) {
            return GradientSample{two_point_estimate(cost, K, radius, rng), 2};
        };
    }
    return [cost = std::move(cost), radius](const Matrix& K, Rng& rng) {
        return GradientSample{one_point_estimate(cost, K, radius, rng), 1};
    };
}

InnerLoopTrace pg_inner_loop(const GradientOracle& oracle, const Policy& K_init,
                             const InnerLoopConfig& config, Rng& rng,
                             const InnerLoopOptions& options) {
    config.validate();
    if (!oracle) throw ConfigError("pg_inner_loop: empty gradient oracle");
    Matrix K = K_init.gain();
    long long calls = 0;
    std::vector<IterationRecord> log;
    if (options.record_log) log.reserve(static_cast<std::size_t>(config.iterations));

    for (long long i = 0; i < config.iterations; ++i) {
        GradientSample g = oracle(K, rng);
        calls += g.cost_evaluations;
        K.noalias() -= config.stepsize * g.gradient;
        const double norm = K.norm();
        if (!std::isfinite(norm) || norm > config.divergence_guard)
            throw InnerDivergence(options.stage, i, config.stepsize, config.radius, norm);
        if (options.record_log) {
            std::optional<double> err;
            if (options.reference) err = linalg::spectral_norm(K - *options.reference);
            log.push_back({options.stage, i + 1, K, calls, err});
        }
    }
    return {Policy(std::move(K)), calls, std::move(log)};
}

InnerLoopTrace pg_inner_loop(const SampledCost& cost, const Policy& K_init,
                             const InnerLoopConfig& config, Rng& rng,
                             const InnerLoopOptions& options) {
    config.validate();
    return pg_inner_loop(make_zeroth_order_oracle(cost, config.oracle, config.radius), K_init,
                         config, rng, options);
}

void write_trace_jsonl(std::ostream& out, const InnerLoopTrace& trace) {
    for (const IterationRecord& r : trace.log) {
        Json j = {{"h", r.stage},
                  {"i", r.iteration},
                  {"gain", matrix_to_json(r.gain)},
                  {"oracle_calls", r.oracle_calls}};
        if (r.error) j["error"] = *r.error;
        out << j.dump() << '\n';
    }
}

}  // namespace rhpg::zo
