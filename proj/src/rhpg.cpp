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

#include "rhpg/rhpg.hpp"

#include <cmath>
#include <limits>

namespace rhpg {

std::string to_string(RadiusRule rule) {
    return rule == RadiusRule::sqrt ? "sqrt" : "proportional";
}

std::string to_string(WarmStart warm) { return warm == WarmStart::previous ? "previous" : "zero"; }

std::string to_string(HorizonMode mode) {
    switch (mode) {
        case HorizonMode::explicit_horizon: return "explicit";
        case HorizonMode::heuristic: return "heuristic";
        case HorizonMode::theorem: return "theorem";
    }
    return "heuristic";
}

RadiusRule radius_rule_from_string(const std::string& s) {
    if (s == "sqrt") return RadiusRule::sqrt;
    if (s == "proportional") return RadiusRule::proportional;
    throw ConfigError("unknown radius rule \"" + s + "\" (expected sqrt or proportional)");
}

WarmStart warm_start_from_string(const std::string& s) {
    if (s == "zero") return WarmStart::zero;
    if (s == "previous") return WarmStart::previous;
    throw ConfigError("unknown warm start \"" + s + "\" (expected zero or previous)");
}

HorizonMode horizon_mode_from_string(const std::string& s) {
    if (s == "explicit") return HorizonMode::explicit_horizon;
    if (s == "heuristic") return HorizonMode::heuristic;
    if (s == "theorem") return HorizonMode::theorem;
    throw ConfigError("unknown horizon mode \"" + s + "\" (expected explicit, heuristic or theorem)");
}

void RhpgSchedule::validate() const {
    if (!(epsilon > 0.0)) throw ConfigError("schedule: epsilon must be > 0");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("schedule: delta must lie in (0, 1)");
    if (horizon < 1) throw ConfigError("schedule: horizon must be >= 1");
    if (static_cast<int>(stages.size()) != horizon)
        throw ConfigError("schedule: expected " + std::to_string(horizon) +
                          " stage configs, got " + std::to_string(stages.size()));
    for (const auto& s : stages) s.validate();
}

const zo::InnerLoopConfig& RhpgSchedule::stage(int h) const {
    if (h < 0 || h >= static_cast<int>(stages.size()))
        throw ConfigError("schedule: no stage " + std::to_string(h));
    return stages[static_cast<std::size_t>(h)];
}

RhpgSchedule make_schedule(const ScheduleConstants& c, double epsilon, double delta,
                           int horizon) {
    if (!(c.c_eta > 0.0) || !(c.c_r > 0.0) || !(c.c_T > 0.0))
        throw ConfigError("schedule constants must be positive");
    if (c.tightening && !(*c.tightening > 0.0 && *c.tightening < 1.0))
        throw ConfigError("tightening factor must lie in (0, 1)");
    RhpgSchedule s;
    s.epsilon = epsilon;
    s.delta = delta;
    s.horizon = horizon;
    s.radius_rule = c.radius_rule;
    s.warm_start = c.warm_start;
    if (!(epsilon > 0.0)) throw ConfigError("schedule: epsilon must be > 0");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("schedule: delta must lie in (0, 1)");
    if (horizon < 1) throw ConfigError("schedule: horizon must be >= 1");

    // Boole's inequality over the N subproblems.
    const double stage_delta = delta / horizon;
    s.stages.resize(static_cast<std::size_t>(horizon));
    for (int h = 0; h < horizon; ++h) {
        const double eps_h =
            c.tightening ? epsilon * std::pow(*c.tightening, horizon - 1 - h) : epsilon;
        zo::InnerLoopConfig& cfg = s.stages[static_cast<std::size_t>(h)];
        cfg.stepsize = c.c_eta * eps_h * eps_h;
        cfg.radius = c.c_r * (c.radius_rule == RadiusRule::sqrt ? std::sqrt(eps_h) : eps_h);
        const double T = c.c_T / (eps_h * eps_h) * std::log(1.0 / (stage_delta * eps_h * eps_h));
        cfg.iterations = static_cast<long long>(std::ceil(std::max(T, 1.0)));
        cfg.oracle = c.oracle;
        cfg.divergence_guard = c.divergence_guard;
    }
    s.validate();
    return s;
}

RolloutSimulator::RolloutSimulator(SystemInstance system) : system_(std::move(system)) {
    system_.validate();
}

zo::CostSample RolloutSimulator::draw(Rng& rng) const {
    zo::CostSample s;
    s.x = system_.initial.sample(rng);
    if (system_.noise.enabled()) s.noise_seed = rng();
    return s;
}

double RolloutSimulator::subproblem_cost(const Matrix& K_h, const PolicySequence& tail,
                                         const zo::CostSample& sample) const {
    evaluations_.fetch_add(1, std::memory_order_relaxed);
    if (!system_.noise.enabled())
        return rhpg::subproblem_cost(system_.dynamics, system_.weights, tail, K_h, sample.x);
    Rng noise_rng(sample.noise_seed);
    return rhpg::subproblem_cost(system_.dynamics, system_.weights, tail, K_h, sample.x,
                                 system_.noise, noise_rng);
}

double RolloutSimulator::truncated_cost(const Matrix& K, const zo::CostSample& sample,
                                        int length) const {
    evaluations_.fetch_add(1, std::memory_order_relaxed);
    if (length < 1) throw ConfigError("truncated_cost: length must be >= 1");
    const LinearDynamics& dyn = system_.dynamics;
    if (K.rows() != dyn.input_dim() || K.cols() != dyn.state_dim())
        throw ConfigError("truncated_cost: gain shape does not match the plant");
    const Matrix closed = dyn.A() - dyn.B() * K;
    const Matrix stage = system_.weights.Q() + K.transpose() * system_.weights.R() * K;
    const bool noisy = system_.noise.enabled();
    Rng noise_rng(sample.noise_seed);
    Vector x = sample.x;
    Vector next(x.size());
    Vector sx(x.size());
    double cost = 0.0;
    for (int t = 0; t < length; ++t) {
        sx.noalias() = stage * x;
        cost += x.dot(sx);
        next.noalias() = closed * x;
        if (noisy) next += system_.noise.sample(noise_rng);
        x.swap(next);
        if (!std::isfinite(cost)) break;
    }
    return cost;
}

zo::SampledCost RolloutSimulator::subproblem(PolicySequence tail) const {
    return zo::SampledCost([this](Rng& rng) { return draw(rng); },
                           [this, tail = std::move(tail)](const Matrix& K,
                                                          const zo::CostSample& s) {
                               return subproblem_cost(K, tail, s);
                           });
}

CertificationOracle CertificationOracle::from_system(const SystemInstance& system) {
    system.validate();
    return {system.dynamics, system.weights, system.initial.second_moment(),
            riccati::solve_are(system.dynamics, system.weights)};
}

int select_horizon(const HorizonOptions& options, double epsilon,
                   const CertificationOracle* oracle) {
    if (!(epsilon > 0.0)) throw ConfigError("select_horizon: epsilon must be > 0");
    switch (options.mode) {
        case HorizonMode::explicit_horizon:
            if (options.explicit_horizon < 1)
                throw ConfigError("select_horizon: explicit horizon must be >= 1");
            return options.explicit_horizon;
        case HorizonMode::heuristic: {
            if (!(options.log_base > 1.0))
                throw ConfigError("select_horizon: log base must be > 1");
            const double v = std::log(1.0 / epsilon) / std::log(options.log_base);
            return std::max(1, static_cast<int>(std::ceil(v)) + options.offset);
        }
        case HorizonMode::theorem:
            if (oracle == nullptr)
                throw ConfigError("select_horizon: theorem mode needs a certification oracle");
            return riccati::horizon_bound(oracle->are, oracle->dynamics, oracle->weights,
                                          epsilon);
    }
    throw ConfigError("select_horizon: unknown mode");
}

RhpgReport run_rhpg(const RolloutSimulator& simulator, const RhpgSchedule& schedule,
                    std::uint64_t seed, const CertificationOracle* oracle,
                    const RhpgHooks& hooks) {
    schedule.validate();
    const int N = schedule.horizon;
    const int m = simulator.input_dim();
    const int n = simulator.state_dim();
    Rng rng(seed);

    RhpgReport report;
    report.seed = seed;
    report.schedule = schedule;

    PolicySequence tail = PolicySequence::empty(N);
    Matrix previous = Matrix::Zero(m, n);
    for (int h = N - 1; h >= 0; --h) {
        const zo::InnerLoopConfig& cfg = schedule.stage(h);
        const Matrix init = (schedule.warm_start == WarmStart::previous) ? previous
                                                                          : Matrix::Zero(m, n);
        const zo::GradientOracle gradient =
            hooks.gradient_override
                ? hooks.gradient_override(h, tail)
                : zo::make_zeroth_order_oracle(simulator.subproblem(tail), cfg.oracle, cfg.radius);

        std::optional<Matrix> stage_optimum;
        if (oracle != nullptr) {
            const Matrix P_tail = riccati::tail_value(oracle->dynamics, oracle->weights, tail);
            stage_optimum =
                riccati::gain_from_value(P_tail, oracle->dynamics, oracle->weights).gain();
        }

        zo::InnerLoopOptions opts;
        opts.stage = h;
        opts.record_log = hooks.record_traces;
        opts.reference = stage_optimum;

        zo::InnerLoopTrace trace{Policy::zero(m, n), 0, {}};
        try {
            trace = zo::pg_inner_loop(gradient, Policy(init), cfg, rng, opts);
        } catch (const NumericalError& e) {
            report.failure = e.what();
            report.gains = tail;
            report.completed = false;
            return report;
        }

        Matrix K = trace.final_gain.gain();
        if (hooks.stage_perturbation) K = hooks.stage_perturbation(h, K);

        StageSummary summary{h, init, K, trace.oracle_calls, cfg, std::nullopt};
        if (stage_optimum) summary.stage_error = linalg::spectral_norm(K - *stage_optimum);
        report.stages.push_back(std::move(summary));
        report.total_oracle_calls += trace.oracle_calls;
        if (hooks.record_traces) report.traces.push_back(std::move(trace));

        tail = tail.prepend(Policy(K));
        previous = std::move(K);
    }

    report.final_gain = tail.at(0);
    report.gains = std::move(tail);
    report.completed = true;
    if (oracle != nullptr) report.certification = certify_output(report, *oracle);
    return report;
}

CertificationBlock certify_gain(const Policy& K, const CertificationOracle& oracle) {
    const Matrix closed = oracle.dynamics.A() - oracle.dynamics.B() * K.gain();
    CertificationBlock b{};
    b.spectral_radius = spectral_radius(closed);
    b.policy_error = linalg::spectral_norm(K.gain() - oracle.are.K_star.gain());
    b.closed_loop_norm_star = induced_norm(closed, oracle.are.P_star);
    b.threshold = riccati::stability_threshold(oracle.are, oracle.dynamics);
    b.stabilizing = b.spectral_radius < 1.0;
    b.sufficient = b.policy_error < b.threshold;
    return b;
}

CertificationBlock certify_output(const RhpgReport& report, const CertificationOracle& oracle) {
    if (!report.final_gain) throw ConfigError("certify_output: report has no final gain");
    return certify_gain(*report.final_gain, oracle);
}

Json to_json(const RhpgSchedule& schedule) {
    Json stages = Json::array();
    for (std::size_t h = 0; h < schedule.stages.size(); ++h) {
        const auto& c = schedule.stages[h];
        stages.push_back({{"h", h},
                          {"stepsize", c.stepsize},
                          {"radius", c.radius},
                          {"iterations", c.iterations},
                          {"oracle", zo::to_string(c.oracle)},
                          {"divergence_guard", c.divergence_guard}});
    }
    return {{"epsilon", schedule.epsilon},
            {"delta", schedule.delta},
            {"horizon", schedule.horizon},
            {"radius_rule", to_string(schedule.radius_rule)},
            {"warm_start", to_string(schedule.warm_start)},
            {"stages", std::move(stages)}};
}

Json to_json(const CertificationBlock& b) {
    return {{"spectral_radius", b.spectral_radius},
            {"policy_error", b.policy_error},
            {"closed_loop_norm_star", b.closed_loop_norm_star},
            {"stability_threshold", b.threshold},
            {"stabilizing", b.stabilizing},
            {"sufficient", b.sufficient}};
}

Json report_to_json(const RhpgReport& report) {
    Json j;
    j["seed"] = report.seed;
    j["completed"] = report.completed;
    if (!report.failure.empty()) j["failure"] = report.failure;
    j["schedule"] = to_json(report.schedule);
    j["total_oracle_calls"] = report.total_oracle_calls;
    if (report.final_gain) j["final_gain"] = matrix_to_json(report.final_gain->gain());
    Json gains = Json::array();
    for (int t = report.gains.first_index(); t < report.gains.horizon(); ++t)
        gains.push_back({{"t", t}, {"K", matrix_to_json(report.gains.at(t).gain())}});
    j["gains"] = std::move(gains);
    Json stages = Json::array();
    for (const StageSummary& s : report.stages) {
        Json e = {{"h", s.stage},
                  {"initial_gain", matrix_to_json(s.initial_gain)},
                  {"final_gain", matrix_to_json(s.final_gain)},
                  {"oracle_calls", s.oracle_calls}};
        if (s.stage_error) e["stage_error"] = *s.stage_error;
        stages.push_back(std::move(e));
    }
    j["stages"] = std::move(stages);
    if (report.certification) j["certification"] = to_json(*report.certification);
    return j;
}

}  // namespace rhpg
