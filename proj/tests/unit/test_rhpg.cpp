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

#include <gtest/gtest.h>

#include <cmath>

#include "../support.hpp"

using namespace rhpg;
using rhpg::testing::scalar;
using rhpg::testing::scalar_plant;

TEST(Schedule, StageFormulas) {
    ScheduleConstants c;
    c.c_eta = 0.05;
    c.c_r = 2.0;
    c.c_T = 3.0;
    const auto s = make_schedule(c, 0.1, 0.2, 4);
    ASSERT_EQ(s.stages.size(), 4u);
    for (const auto& st : s.stages) {
        EXPECT_DOUBLE_EQ(st.stepsize, 0.05 * 0.01);
        EXPECT_DOUBLE_EQ(st.radius, 0.2);
        EXPECT_EQ(st.iterations,
                  static_cast<long long>(std::ceil(3.0 / 0.01 * std::log(4 / (0.2 * 0.01)))));
    }
    c.radius_rule = RadiusRule::sqrt;
    EXPECT_DOUBLE_EQ(make_schedule(c, 0.25, 0.2, 1).stage(0).radius, 1.0);
}

TEST(Schedule, Tightening) {
    ScheduleConstants c;
    c.tightening = 0.5;
    const auto s = make_schedule(c, 0.2, 0.1, 3);
    EXPECT_DOUBLE_EQ(s.stage(2).radius, 0.2);
    EXPECT_DOUBLE_EQ(s.stage(1).radius, 0.1);
    EXPECT_DOUBLE_EQ(s.stage(0).radius, 0.05);
    EXPECT_GT(s.stage(0).iterations, s.stage(2).iterations);
}

TEST(Schedule, Validation) {
    EXPECT_THROW(make_schedule({}, 0.0, 0.1, 2), ConfigError);
    EXPECT_THROW(make_schedule({}, 0.1, 1.0, 2), ConfigError);
    EXPECT_THROW(make_schedule({}, 0.1, 0.1, 0), ConfigError);
    ScheduleConstants bad;
    bad.c_eta = -1.0;
    EXPECT_THROW(make_schedule(bad, 0.1, 0.1, 2), ConfigError);
    EXPECT_THROW(radius_rule_from_string("cubic"), ConfigError);
    EXPECT_THROW(horizon_mode_from_string("auto"), ConfigError);
    EXPECT_EQ(horizon_mode_from_string("theorem"), HorizonMode::theorem);
}

TEST(SelectHorizon, Examples) {
    HorizonOptions h;
    EXPECT_EQ(select_horizon(h, 1e-2), 5);
    EXPECT_EQ(select_horizon(h, 0.5), 1);
    h.offset = 1;
    EXPECT_EQ(select_horizon(h, 1e-2), 6);
    h.offset = 0;
    h.log_base = 10.0;
    EXPECT_EQ(select_horizon(h, 1e-3), 3);

    const auto sys = scalar_plant();
    const auto oracle = CertificationOracle::from_system(sys);
    HorizonOptions t;
    t.mode = HorizonMode::theorem;
    EXPECT_EQ(select_horizon(t, 1e-2, &oracle), 4);
    EXPECT_THROW(select_horizon(t, 1e-2), ConfigError);

    HorizonOptions e;
    e.mode = HorizonMode::explicit_horizon;
    e.explicit_horizon = 7;
    EXPECT_EQ(select_horizon(e, 0.3), 7);
    e.explicit_horizon = 0;
    EXPECT_THROW(select_horizon(e, 0.3), ConfigError);
}

TEST(RunRhpg, SingleStageExactGradient) {
    const auto sys = scalar_plant();
    const RolloutSimulator sim(sys);
    const auto schedule = rhpg::testing::exact_gradient_schedule(sys, 1, 1e-9);
    const auto report = run_rhpg(sim, schedule, 1, nullptr, rhpg::testing::exact_gradient_hooks(sys));
    ASSERT_TRUE(report.completed);
    EXPECT_NEAR(report.final_gain->gain()(0, 0), 4.95 / 1.3267, 1e-6);
    EXPECT_NEAR(report.final_gain->gain()(0, 0),
                riccati::gain_from_value(scalar(3), sys.dynamics, sys.weights).gain()(0, 0), 1e-6);
    EXPECT_FALSE(report.certification.has_value());
}

TEST(RunRhpg, ScalarZeroInitReachesEpsilon) {
    const auto sys = scalar_plant();
    const RolloutSimulator sim(sys);
    const auto oracle = CertificationOracle::from_system(sys);
    HorizonOptions h;
    h.offset = 1;
    const double eps = 0.1;
    const auto schedule = make_schedule(ScheduleConstants{}, eps, 0.1, select_horizon(h, eps));
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto r = run_rhpg(sim, schedule, seed, &oracle);
        ASSERT_TRUE(r.completed) << r.failure;
        if (std::abs(r.final_gain->gain()(0, 0) - 14.5482) <= eps) ++hits;
    }
    EXPECT_GE(hits, 80);
}

TEST(RunRhpg, ZeroIterationsGivesZeroGains) {
    const auto sys = scalar_plant();
    const RolloutSimulator sim(sys);
    auto schedule = make_schedule(ScheduleConstants{}, 0.1, 0.1, 3);
    for (auto& s : schedule.stages) s.iterations = 0;
    const auto oracle = CertificationOracle::from_system(sys);
    const auto r = run_rhpg(sim, schedule, 3, &oracle);
    ASSERT_TRUE(r.completed);
    EXPECT_EQ(r.total_oracle_calls, 0);
    EXPECT_EQ(r.gains.size(), 3u);
    for (int t = 0; t < 3; ++t) EXPECT_EQ(r.gains.at(t).gain()(0, 0), 0.0);
    ASSERT_TRUE(r.certification.has_value());
    EXPECT_FALSE(r.certification->stabilizing);
    const Json j = report_to_json(r);
    EXPECT_EQ(j.at("gains").size(), 3u);
    EXPECT_EQ(j.at("stages").size(), 3u);
}

TEST(RunRhpg, OracleCallAccounting) {
    const auto sys = generate_random_system(2, 1, 1.3, 51);
    for (auto kind : {zo::OracleKind::two_point, zo::OracleKind::one_point}) {
        const RolloutSimulator sim(sys);
        ScheduleConstants c;
        c.oracle = kind;
        c.c_T = 0.05;
        c.c_eta = 0.01;
        const auto schedule = make_schedule(c, 0.3, 0.1, 3);
        const auto r = run_rhpg(sim, schedule, 2, nullptr);
        ASSERT_TRUE(r.completed) << r.failure;
        long long expected = 0;
        for (const auto& st : schedule.stages)
            expected += st.iterations * (kind == zo::OracleKind::two_point ? 2 : 1);
        EXPECT_EQ(r.total_oracle_calls, expected);
        EXPECT_EQ(sim.evaluations(), expected);
        long long per_stage = 0;
        for (const auto& s : r.stages) per_stage += s.oracle_calls;
        EXPECT_EQ(per_stage, expected);
    }
}

TEST(RunRhpg, SeedDeterminism) {
    const auto sys = generate_random_system(2, 2, 1.2, 52);
    const RolloutSimulator sim(sys);
    const auto oracle = CertificationOracle::from_system(sys);
    ScheduleConstants c;
    c.c_T = 0.2;
    const auto schedule = make_schedule(c, 0.3, 0.1, 3);
    const auto a = report_to_json(run_rhpg(sim, schedule, 9, &oracle)).dump();
    const auto b = report_to_json(run_rhpg(sim, schedule, 9, &oracle)).dump();
    const auto d = report_to_json(run_rhpg(sim, schedule, 10, &oracle)).dump();
    EXPECT_EQ(a, b);
    EXPECT_NE(a, d);
}

TEST(RunRhpg, ProcessesStagesBackward) {
    const auto sys = scalar_plant();
    const RolloutSimulator sim(sys);
    auto hooks = rhpg::testing::exact_gradient_hooks(sys);
    std::vector<int> order;
    std::vector<int> tail_first;
    auto inner = hooks.gradient_override;
    hooks.gradient_override = [&](int h, const PolicySequence& tail) {
        order.push_back(h);
        tail_first.push_back(tail.first_index());
        return inner(h, tail);
    };
    const auto schedule = rhpg::testing::exact_gradient_schedule(sys, 4, 1e-8);
    const auto r = run_rhpg(sim, schedule, 0, nullptr, hooks);
    ASSERT_TRUE(r.completed);
    EXPECT_EQ(order, (std::vector<int>{3, 2, 1, 0}));
    EXPECT_EQ(tail_first, (std::vector<int>{4, 3, 2, 1}));
    const auto fh = riccati::solve_finite_horizon(sys.dynamics, sys.weights, 4);
    for (int t = 0; t < 4; ++t)
        EXPECT_NEAR(r.gains.at(t).gain()(0, 0), fh.gains.at(t).gain()(0, 0), 1e-6);
}

TEST(RunRhpg, WarmStartUsesPreviousGain) {
    const auto sys = scalar_plant();
    const RolloutSimulator sim(sys);
    auto schedule = rhpg::testing::exact_gradient_schedule(sys, 3, 1e-8);
    schedule.warm_start = WarmStart::previous;
    const auto r = run_rhpg(sim, schedule, 0, nullptr, rhpg::testing::exact_gradient_hooks(sys));
    ASSERT_EQ(r.stages.size(), 3u);
    EXPECT_EQ(r.stages[0].initial_gain(0, 0), 0.0);
    EXPECT_EQ(r.stages[1].initial_gain, r.stages[0].final_gain);
    EXPECT_EQ(r.stages[2].initial_gain, r.stages[1].final_gain);
}

TEST(RunRhpg, DivergenceYieldsPartialReport) {
    const auto sys = scalar_plant();
    const RolloutSimulator sim(sys);
    auto schedule = make_schedule(ScheduleConstants{}, 0.3, 0.1, 3);
    schedule.stages[1].stepsize = 10.0;
    const auto r = run_rhpg(sim, schedule, 4, nullptr);
    EXPECT_FALSE(r.completed);
    EXPECT_FALSE(r.final_gain.has_value());
    EXPECT_FALSE(r.failure.empty());
    EXPECT_EQ(r.stages.size(), 1u);
    EXPECT_EQ(r.gains.first_index(), 2);
}

TEST(RunRhpg, NoisyPlantRuns) {
    auto sys = scalar_plant();
    sys.noise = NoiseModel(scalar(0.01));
    const RolloutSimulator sim(sys);
    const auto oracle = CertificationOracle::from_system(sys);
    const auto schedule = make_schedule(ScheduleConstants{}, 0.316, 0.1, 3);
    const auto r = run_rhpg(sim, schedule, 5, &oracle);
    ASSERT_TRUE(r.completed) << r.failure;
    EXPECT_TRUE(r.certification->stabilizing);
}

TEST(CertifyOutput, Examples) {
    const auto sys = scalar_plant();
    const auto oracle = CertificationOracle::from_system(sys);
    const Matrix Ks = oracle.are.K_star.gain();

    const auto at_opt = certify_gain(oracle.are.K_star, oracle);
    EXPECT_TRUE(at_opt.stabilizing);
    EXPECT_EQ(at_opt.policy_error, 0.0);

    const auto shifted = certify_gain(Policy(Ks + scalar(2.0)), oracle);
    EXPECT_NEAR(shifted.threshold, 2.427, 1e-3);
    EXPECT_TRUE(shifted.sufficient);
    EXPECT_TRUE(shifted.stabilizing);
    EXPECT_NEAR(shifted.spectral_radius, std::abs(5.0 - 0.33 * (Ks(0, 0) + 2.0)), 1e-12);
    EXPECT_NEAR(shifted.spectral_radius, 0.462, 2e-3);  // printed value uses K* + 2 ~ 16.55

    const auto zero = certify_gain(Policy(scalar(0)), oracle);
    EXPECT_FALSE(zero.stabilizing);
    EXPECT_NEAR(zero.spectral_radius, 5.0, 1e-12);

    RhpgReport empty;
    EXPECT_THROW(certify_output(empty, oracle), ConfigError);
}

TEST(CertifyOutput, SufficientImpliesStabilizing) {
    Rng rng(53);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 10; ++trial) {
        const auto sys = generate_random_system(1 + trial % 3, 1 + trial % 2, 1.5, 540 + trial);
        const auto oracle = CertificationOracle::from_system(sys);
        for (int i = 0; i < 30; ++i) {
            Matrix D(sys.dynamics.input_dim(), sys.dynamics.state_dim());
            for (Eigen::Index k = 0; k < D.size(); ++k) D.data()[k] = nd(rng);
            D *= (0.05 + 0.1 * i) * oracle.are.K_star.gain().norm() / (1 + D.norm());
            const auto b = certify_gain(Policy(oracle.are.K_star.gain() + D), oracle);
            if (b.sufficient) {
                EXPECT_TRUE(b.stabilizing);
                EXPECT_LT(b.closed_loop_norm_star, 1.0);
            }
        }
    }
}
