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

#include "rhpg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <set>
#include <thread>

namespace rhpg {

namespace {

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& item : j.items())
        if (allowed.count(item.key()) == 0)
            throw ConfigError(where + ": unknown key \"" + item.key() + "\"");
}

template <typename T>
T get_or(const Json& j, const std::string& key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config key \"" + key + "\": " + e.what());
    }
}

ScheduleConstants schedule_from_json(const Json& j) {
    check_keys(j,
               {"c_eta", "c_r", "c_T", "radius_rule", "oracle", "warm_start", "tightening",
                "divergence_guard", "note"},
               "schedule");
    ScheduleConstants c;
    c.c_eta = get_or(j, "c_eta", c.c_eta);
    c.c_r = get_or(j, "c_r", c.c_r);
    c.c_T = get_or(j, "c_T", c.c_T);
    c.radius_rule = radius_rule_from_string(get_or<std::string>(j, "radius_rule", to_string(c.radius_rule)));
    c.oracle = zo::oracle_kind_from_string(get_or<std::string>(j, "oracle", zo::to_string(c.oracle)));
    c.warm_start = warm_start_from_string(get_or<std::string>(j, "warm_start", to_string(c.warm_start)));
    if (j.contains("tightening") && !j.at("tightening").is_null())
        c.tightening = get_or(j, "tightening", 0.0);
    c.divergence_guard = get_or(j, "divergence_guard", c.divergence_guard);
    return c;
}

HorizonOptions horizon_from_json(const Json& j) {
    check_keys(j, {"mode", "explicit", "log_base", "offset"}, "horizon");
    HorizonOptions h;
    h.mode = horizon_mode_from_string(get_or<std::string>(j, "mode", to_string(h.mode)));
    h.explicit_horizon = get_or(j, "explicit", h.explicit_horizon);
    h.log_base = get_or(j, "log_base", h.log_base);
    h.offset = get_or(j, "offset", h.offset);
    return h;
}

BaselineOptions baseline_from_json(const Json& j) {
    check_keys(j,
               {"K_init", "radius", "stepsize", "iterations", "rollout_length",
                "divergence_guard", "seeds"},
               "baseline");
    BaselineOptions b;
    if (j.contains("K_init") && !j.at("K_init").is_null())
        b.K_init = matrix_from_json(j.at("K_init"), "baseline.K_init");
    b.radius = get_or(j, "radius", b.radius);
    b.stepsize = get_or(j, "stepsize", b.stepsize);
    b.iterations = get_or(j, "iterations", b.iterations);
    b.rollout_length = get_or(j, "rollout_length", b.rollout_length);
    b.divergence_guard = get_or(j, "divergence_guard", b.divergence_guard);
    b.seeds = get_or(j, "seeds", b.seeds);
    return b;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

}  // namespace

void ExperimentConfig::validate() const {
    if (!system) throw ConfigError("config: no system given");
    system->validate();
    for (double e : epsilons)
        if (!(e > 0.0 && e < 1.0)) throw ConfigError("config: epsilon values must lie in (0, 1)");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("config: delta must lie in (0, 1)");
    if (seeds_per_cell < 1) throw ConfigError("config: seeds_per_cell must be >= 1");
    if (workers < 0) throw ConfigError("config: workers must be >= 0");
    if (baseline.rollout_length < 1) throw ConfigError("config: rollout_length must be >= 1");
    if (!(baseline.radius > 0.0)) throw ConfigError("config: baseline radius must be > 0");
    if (!(baseline.stepsize >= 0.0)) throw ConfigError("config: baseline stepsize must be >= 0");
    if (baseline.iterations < 0) throw ConfigError("config: baseline iterations must be >= 0");
    if (baseline.seeds < 1) throw ConfigError("config: baseline seeds must be >= 1");
}

const SystemInstance& ExperimentConfig::plant() const {
    if (!system) throw ConfigError("config: no system given");
    return *system;
}

ExperimentConfig config_from_json(const Json& j, const std::filesystem::path& base_dir) {
    check_keys(j,
               {"system", "system_file", "random_system", "epsilons", "delta", "seeds_per_cell",
                "base_seed", "schedule", "horizon", "output_dir", "workers", "record_wall_time",
                "baseline", "note"},
               "config");
    ExperimentConfig c;
    const int sources = static_cast<int>(j.contains("system")) +
                        static_cast<int>(j.contains("system_file")) +
                        static_cast<int>(j.contains("random_system"));
    if (sources != 1)
        throw ConfigError("config: give exactly one of system, system_file, random_system");
    if (j.contains("system")) {
        c.system = system_from_json(j.at("system"));
        c.system_source = "inline";
    } else if (j.contains("system_file")) {
        std::filesystem::path p = get_or<std::string>(j, "system_file", "");
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        c.system = load_system(p);
        c.system_source = "file";
    } else {
        const Json& r = j.at("random_system");
        check_keys(r, {"n", "m", "target_rho", "seed"}, "random_system");
        RandomSystemSpec spec;
        spec.n = get_or(r, "n", spec.n);
        spec.m = get_or(r, "m", spec.m);
        spec.target_rho = get_or(r, "target_rho", spec.target_rho);
        spec.seed = get_or(r, "seed", spec.seed);
        c.random_system = spec;
        c.system = generate_random_system(spec.n, spec.m, spec.target_rho, spec.seed);
        c.system_source = "random";
    }
    if (j.contains("epsilons")) {
        if (!j.at("epsilons").is_array()) throw ConfigError("config: epsilons must be an array");
        for (const Json& e : j.at("epsilons")) {
            if (!e.is_number()) throw ConfigError("config: epsilons must be numbers");
            c.epsilons.push_back(e.get<double>());
        }
    }
    c.delta = get_or(j, "delta", c.delta);
    c.seeds_per_cell = get_or(j, "seeds_per_cell", c.seeds_per_cell);
    c.base_seed = get_or(j, "base_seed", c.base_seed);
    if (j.contains("schedule")) c.schedule = schedule_from_json(j.at("schedule"));
    if (j.contains("horizon")) c.horizon = horizon_from_json(j.at("horizon"));
    c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir.string());
    c.workers = get_or(j, "workers", c.workers);
    c.record_wall_time = get_or(j, "record_wall_time", c.record_wall_time);
    if (j.contains("baseline")) c.baseline = baseline_from_json(j.at("baseline"));
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    return config_from_json(load_json(path), path.parent_path());
}

Json to_json(const ExperimentConfig& c) {
    Json j;
    if (c.system) j["system"] = system_to_json(*c.system);
    j["system_source"] = c.system_source;
    if (c.random_system)
        j["random_system"] = {{"n", c.random_system->n},
                              {"m", c.random_system->m},
                              {"target_rho", c.random_system->target_rho},
                              {"seed", c.random_system->seed}};
    j["epsilons"] = c.epsilons;
    j["delta"] = c.delta;
    j["seeds_per_cell"] = c.seeds_per_cell;
    j["base_seed"] = c.base_seed;
    Json s = {{"c_eta", c.schedule.c_eta},
              {"c_r", c.schedule.c_r},
              {"c_T", c.schedule.c_T},
              {"radius_rule", to_string(c.schedule.radius_rule)},
              {"oracle", zo::to_string(c.schedule.oracle)},
              {"warm_start", to_string(c.schedule.warm_start)},
              {"divergence_guard", c.schedule.divergence_guard}};
    s["tightening"] = c.schedule.tightening ? Json(*c.schedule.tightening) : Json(nullptr);
    j["schedule"] = std::move(s);
    j["horizon"] = {{"mode", to_string(c.horizon.mode)},
                    {"explicit", c.horizon.explicit_horizon},
                    {"log_base", c.horizon.log_base},
                    {"offset", c.horizon.offset}};
    j["output_dir"] = c.output_dir.string();
    j["workers"] = c.workers;
    j["record_wall_time"] = c.record_wall_time;
    Json b = {{"radius", c.baseline.radius},
              {"stepsize", c.baseline.stepsize},
              {"iterations", c.baseline.iterations},
              {"rollout_length", c.baseline.rollout_length},
              {"divergence_guard", c.baseline.divergence_guard},
              {"seeds", c.baseline.seeds}};
    b["K_init"] = c.baseline.K_init ? matrix_to_json(*c.baseline.K_init) : Json(nullptr);
    j["baseline"] = std::move(b);
    return j;
}

std::vector<double> SweepResult::epsilons() const {
    std::vector<double> out;
    for (const SweepRow& r : rows)
        if (out.empty() || out.back() != r.epsilon) out.push_back(r.epsilon);
    return out;
}

std::vector<const SweepRow*> SweepResult::cell(double epsilon) const {
    std::vector<const SweepRow*> out;
    for (const SweepRow& r : rows)
        if (r.epsilon == epsilon) out.push_back(&r);
    return out;
}

SweepResult run_sweep(const ExperimentConfig& config) {
    config.validate();
    SweepResult result;
    if (config.epsilons.empty()) return result;

    const SystemInstance& plant = config.plant();
    const CertificationOracle oracle = CertificationOracle::from_system(plant);

    std::vector<double> eps = config.epsilons;
    std::sort(eps.begin(), eps.end());
    eps.erase(std::unique(eps.begin(), eps.end()), eps.end());

    const std::size_t per_cell = static_cast<std::size_t>(config.seeds_per_cell);
    result.rows.resize(eps.size() * per_cell);
    for (std::size_t e = 0; e < eps.size(); ++e)
        for (std::size_t s = 0; s < per_cell; ++s) {
            SweepRow& row = result.rows[e * per_cell + s];
            row.epsilon = eps[e];
            row.seed = config.base_seed + s;
        }

    auto run_cell = [&](SweepRow& row) {
        const auto start = std::chrono::steady_clock::now();
        try {
            row.horizon = select_horizon(config.horizon, row.epsilon, &oracle);
            const RhpgSchedule schedule =
                make_schedule(config.schedule, row.epsilon, config.delta, row.horizon);
            const RolloutSimulator simulator(plant);
            const RhpgReport report = run_rhpg(simulator, schedule, row.seed, &oracle);
            row.oracle_calls = report.total_oracle_calls;
            if (report.completed && report.certification) {
                row.policy_error = report.certification->policy_error;
                row.stabilizing = report.certification->stabilizing;
            } else {
                row.failed = true;
                row.failure = report.failure;
            }
        } catch (const std::exception& e) {
            row.failed = true;
            row.failure = e.what();
        }
        if (row.failed) {
            row.policy_error = std::numeric_limits<double>::quiet_NaN();
            row.stabilizing = false;
        }
        row.wall_ms = config.record_wall_time ? elapsed_ms(start) : 0.0;
    };

    std::size_t workers = config.workers > 0 ? static_cast<std::size_t>(config.workers)
                                             : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, result.rows.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < result.rows.size(); i = next.fetch_add(1))
            run_cell(result.rows[i]);
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    return result;
}

BaselineRow run_baseline_vanilla_pg(const ExperimentConfig& config, const Policy& K_init,
                                    std::uint64_t seed) {
    config.validate();
    const SystemInstance& plant = config.plant();
    const BaselineOptions& opt = config.baseline;
    const RolloutSimulator simulator(plant);
    const zo::SampledCost cost(
        [&simulator](Rng& rng) { return simulator.draw(rng); },
        [&simulator, length = opt.rollout_length](const Matrix& K, const zo::CostSample& s) {
            return simulator.truncated_cost(K, s, length);
        });
    const Matrix& A = plant.dynamics.A();
    const Matrix& B = plant.dynamics.B();

    BaselineRow row;
    row.seed = seed;
    row.initial_gain = K_init.gain();
    Rng rng(seed);
    Matrix K = K_init.gain();
    if (spectral_radius(A - B * K) >= 1.0) row.left_stabilizing_set = true;
    try {
        for (long long i = 0; i < opt.iterations; ++i) {
            const Matrix g = zo::two_point_estimate(cost, K, opt.radius, rng);
            row.oracle_calls += 2;
            K.noalias() -= opt.stepsize * g;
            row.iterations_run = i + 1;
            const double norm = K.norm();
            if (!std::isfinite(norm) || norm > opt.divergence_guard)
                throw InnerDivergence(0, i, opt.stepsize, opt.radius, norm);
            if (spectral_radius(A - B * K) >= 1.0) row.left_stabilizing_set = true;
        }
    } catch (const NumericalError& e) {
        row.diverged = true;
        row.failure = e.what();
    }
    row.final_gain = std::move(K);
    return row;
}

SystemInstance generate_random_system(int n, int m, double target_rho, std::uint64_t seed) {
    if (n < 1 || m < 1) throw ConfigError("generate_random_system: n and m must be >= 1");
    if (!(target_rho >= 0.0) || !std::isfinite(target_rho))
        throw ConfigError("generate_random_system: target_rho must be finite and >= 0");
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Matrix I_n = Matrix::Identity(n, n);
    const Matrix I_m = Matrix::Identity(m, m);
    constexpr int kMaxRejections = 100;
    for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
        Matrix A(n, n);
        Matrix B(n, m);
        for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = normal(rng);
        for (Eigen::Index i = 0; i < B.size(); ++i) B.data()[i] = normal(rng);
        if (target_rho == 0.0) {
            A.setZero();
        } else {
            const double rho = spectral_radius(A);
            if (!(rho > 1e-8)) continue;
            A *= target_rho / rho;
        }
        SystemInstance sys{LinearDynamics(A, B), CostWeights(I_n, I_m, I_n),
                           InitialStateDistribution::gaussian(I_n), NoiseModel()};
        try {
            riccati::solve_are(sys.dynamics, sys.weights);
        } catch (const NumericalError&) {
            continue;
        }
        return sys;
    }
    throw NumericalError("generate_random_system: 100 consecutive rejections", kMaxRejections);
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string sweep_csv(const SweepResult& result) {
    std::string out = "epsilon,seed,policy_error,oracle_calls,stabilizing,wall_ms\r\n";
    for (const SweepRow& r : result.rows) {
        out += csv_field(format_double(r.epsilon));
        out += ',';
        out += std::to_string(r.seed);
        out += ',';
        out += r.failed ? std::string() : csv_field(format_double(r.policy_error));
        out += ',';
        out += std::to_string(r.oracle_calls);
        out += ',';
        out += r.stabilizing ? "true" : "false";
        out += ',';
        out += csv_field(format_double(r.wall_ms));
        out += "\r\n";
    }
    return out;
}

void emit_csv(const SweepResult& result, const std::filesystem::path& path) {
    write_text(path, sweep_csv(result));
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw ConfigError("loglog_slope: need at least two paired points");
    double mx = 0.0;
    double my = 0.0;
    const double k = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw ConfigError("loglog_slope: values must be positive");
        mx += std::log(x[i]) / k;
        my += std::log(y[i]) / k;
    }
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    if (!(sxx > 0.0)) throw ConfigError("loglog_slope: x values must not all coincide");
    return sxy / sxx;
}

double median(std::vector<double> values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

Json sweep_summary(const SweepResult& result) {
    Json cells = Json::array();
    std::vector<double> inv_eps;
    std::vector<double> calls;
    for (double e : result.epsilons()) {
        std::vector<double> errors;
        std::vector<double> call_counts;
        int within = 0;
        int stabilizing = 0;
        int failed = 0;
        const auto rows = result.cell(e);
        for (const SweepRow* r : rows) {
            if (r->failed) {
                ++failed;
                continue;
            }
            errors.push_back(r->policy_error);
            call_counts.push_back(static_cast<double>(r->oracle_calls));
            if (r->policy_error <= e) ++within;
            if (r->stabilizing) ++stabilizing;
        }
        const double med_calls = median(call_counts);
        const int ok = static_cast<int>(errors.size());
        Json c = {{"epsilon", e},
                  {"rows", rows.size()},
                  {"failed", failed},
                  {"within_epsilon", within},
                  {"stabilizing", stabilizing},
                  {"median_policy_error", ok > 0 ? Json(median(errors)) : Json(nullptr)},
                  {"median_oracle_calls", ok > 0 ? Json(med_calls) : Json(nullptr)}};
        cells.push_back(std::move(c));
        if (e >= 1e-2 && ok > 0) {
            inv_eps.push_back(1.0 / e);
            calls.push_back(med_calls);
        }
    }
    Json j = {{"cells", std::move(cells)}};
    j["oracle_call_slope"] = inv_eps.size() >= 2 ? Json(loglog_slope(inv_eps, calls)) : Json(nullptr);
    return j;
}

Json sweep_manifest(const ExperimentConfig& config, const SweepResult& result) {
    Json j;
    j["config"] = to_json(config);
    j["row_count"] = result.rows.size();
    j["csv"] = "sweep.csv";
    Json failures = Json::array();
    for (const SweepRow& r : result.rows)
        if (r.failed)
            failures.push_back({{"epsilon", r.epsilon}, {"seed", r.seed}, {"failure", r.failure}});
    j["failures"] = std::move(failures);
    j["summary"] = sweep_summary(result);
    return j;
}

}  // namespace rhpg
