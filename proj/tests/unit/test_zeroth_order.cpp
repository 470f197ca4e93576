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
#include <limits>
#include <sstream>

#include "../support.hpp"

using namespace rhpg;
using rhpg::testing::scalar;
using rhpg::testing::scalar_plant;

TEST(SampleSphere, UnitNorm) {
    Rng rng(31);
    for (int i = 0; i < 1000; ++i) {
        const auto U = zo::sample_sphere(1 + i % 3, 1 + i % 4, rng).U;
        EXPECT_NEAR(U.norm(), 1.0, 1e-12);
    }
}

TEST(SampleSphere, ScalarSignsBalanced) {
    Rng rng(32);
    int plus = 0;
    const int M = 10000;
    for (int i = 0; i < M; ++i) {
        const double u = zo::sample_sphere(1, 1, rng).U(0, 0);
        ASSERT_EQ(std::abs(u), 1.0);
        plus += u > 0 ? 1 : 0;
    }
    EXPECT_NEAR(plus / static_cast<double>(M), 0.5, 0.02);
}

TEST(SampleSphere, MeanNearZero) {
    Rng rng(33);
    Matrix mean = Matrix::Zero(2, 3);
    const int M = 100000;
    for (int i = 0; i < M; ++i) mean += zo::sample_sphere(2, 3, rng).U / M;
    EXPECT_LT(mean.cwiseAbs().maxCoeff(), 0.02);
}

TEST(TwoPoint, ConstantCostGivesZero) {
    const auto cost = zo::SampledCost::deterministic([](const Matrix&) { return 7.0; });
    Rng rng(34);
    EXPECT_EQ(zo::two_point_estimate(cost, Matrix::Zero(2, 2), 0.1, rng).norm(), 0.0);
}

TEST(TwoPoint, ExactOnScalarQuadratic) {
    const auto cost = zo::SampledCost::deterministic(
        [](const Matrix& K) { return (K(0, 0) - 2.0) * (K(0, 0) - 2.0); });
    Rng rng(35);
    for (double r : {0.01, 0.5, 3.0}) {
        const Matrix g = zo::two_point_estimate(cost, scalar(0), r, rng);
        EXPECT_NEAR(g(0, 0), -4.0, 1e-12);
    }
}

TEST(TwoPoint, UnbiasedForSubproblemGradient) {
    const auto sys = generate_random_system(2, 1, 1.5, 36);
    const RolloutSimulator sim(sys);
    const auto fh = riccati::solve_finite_horizon(sys.dynamics, sys.weights, 3);
    const PolicySequence tail(2, 3, {fh.gains.at(2)});
    const Matrix P = riccati::tail_value(sys.dynamics, sys.weights, tail);
    Matrix K(1, 2);
    K << 0.3, -0.4;
    const Matrix exact = riccati::subproblem_gradient(K, P, sys.dynamics, sys.weights,
                                                      Matrix::Identity(2, 2));
    const auto cost = sim.subproblem(tail);
    Rng rng(37);
    const int M = 100000;
    Matrix mean = Matrix::Zero(1, 2);
    Matrix sq = Matrix::Zero(1, 2);
    for (int i = 0; i < M; ++i) {
        const Matrix g = zo::two_point_estimate(cost, K, 0.05, rng);
        mean += g;
        sq += g.cwiseProduct(g);
    }
    mean /= M;
    const Matrix se = ((sq / M - mean.cwiseProduct(mean)) / M).cwiseSqrt();
    for (int j = 0; j < 2; ++j) EXPECT_LE(std::abs(mean(0, j) - exact(0, j)), 3.0 * se(0, j));
}

TEST(OnePoint, ZeroCostGivesZero) {
    const auto cost = zo::SampledCost::deterministic([](const Matrix&) { return 0.0; });
    Rng rng(38);
    EXPECT_EQ(zo::one_point_estimate(cost, Matrix::Ones(2, 2), 0.1, rng).norm(), 0.0);
}

TEST(OnePoint, ScalarQuadraticMean) {
    const auto cost =
        zo::SampledCost::deterministic([](const Matrix& K) { return K(0, 0) * K(0, 0); });
    Rng rng(39);
    const int M = 1000000;
    double mean = 0.0;
    for (int i = 0; i < M; ++i) mean += zo::one_point_estimate(cost, scalar(1), 0.1, rng)(0, 0) / M;
    EXPECT_NEAR(mean, 2.0, 0.05);
}

TEST(OnePoint, VarianceExceedsTwoPoint) {
    for (std::uint64_t seed : {40u, 41u, 42u}) {
        const auto sys = generate_random_system(2, 1, 1.2, seed);
        const RolloutSimulator sim(sys);
        const auto cost = sim.subproblem(PolicySequence::empty(1));
        const auto are = riccati::solve_are(sys.dynamics, sys.weights);
        const Matrix K = 0.5 * are.K_star.gain();
        auto variance = [&](bool two) {
            Rng rng(seed);
            const int M = 10000;
            Matrix mean = Matrix::Zero(1, 2);
            double sq = 0.0;
            for (int i = 0; i < M; ++i) {
                const Matrix g = two ? zo::two_point_estimate(cost, K, 0.1, rng)
                                     : zo::one_point_estimate(cost, K, 0.1, rng);
                mean += g / M;
                sq += g.squaredNorm() / M;
            }
            return sq - mean.squaredNorm();
        };
        EXPECT_GE(variance(false), variance(true));
    }
}

TEST(Estimators, NonFiniteCostThrows) {
    const auto cost = zo::SampledCost::deterministic(
        [](const Matrix&) { return std::numeric_limits<double>::infinity(); });
    Rng rng(43);
    EXPECT_THROW(zo::two_point_estimate(cost, scalar(0), 0.1, rng), EstimationError);
    EXPECT_THROW(zo::one_point_estimate(cost, scalar(0), 0.1, rng), EstimationError);
    const auto ok = zo::SampledCost::deterministic([](const Matrix&) { return 1.0; });
    EXPECT_THROW(zo::two_point_estimate(ok, scalar(0), 0.0, rng), ConfigError);
}

TEST(InnerLoop, ZeroStepsizeKeepsInit) {
    const auto sys = scalar_plant();
    const RolloutSimulator sim(sys);
    zo::InnerLoopConfig cfg;
    cfg.stepsize = 0.0;
    cfg.radius = 0.1;
    cfg.iterations = 37;
    Rng rng(44);
    const auto tr = zo::pg_inner_loop(sim.subproblem(PolicySequence::empty(1)), Policy(scalar(1.5)),
                                      cfg, rng);
    EXPECT_EQ(tr.final_gain.gain()(0, 0), 1.5);
    EXPECT_EQ(tr.oracle_calls, 2 * 37);
    EXPECT_EQ(sim.evaluations(), 2 * 37);

    cfg.oracle = zo::OracleKind::one_point;
    const auto one = zo::pg_inner_loop(sim.subproblem(PolicySequence::empty(1)), Policy(scalar(1.5)),
                                       cfg, rng);
    EXPECT_EQ(one.oracle_calls, 37);
}

TEST(InnerLoop, ExactGradientConvergesLinearly) {
    // f(K) = 0.5 (K - K*)' H (K - K*) with known alpha = lambda_min(H).
    Matrix H(2, 2);
    H << 3.0, 0.5, 0.5, 1.0;
    const double alpha = Eigen::SelfAdjointEigenSolver<Matrix>(H).eigenvalues()(0);
    const double L = Eigen::SelfAdjointEigenSolver<Matrix>(H).eigenvalues()(1);
    Matrix Kstar(1, 2);
    Kstar << 1.0, -2.0;
    const zo::GradientOracle exact = [&](const Matrix& K, Rng&) {
        return zo::GradientSample{(K - Kstar) * H, 0};
    };
    zo::InnerLoopConfig cfg;
    cfg.stepsize = 1.0 / L;
    cfg.radius = 1.0;
    cfg.iterations = 60;
    zo::InnerLoopOptions opts;
    opts.record_log = true;
    opts.reference = Kstar;
    Rng rng(45);
    const auto tr = zo::pg_inner_loop(exact, Policy::zero(1, 2), cfg, rng, opts);
    ASSERT_EQ(tr.log.size(), 60u);
    double prev = (Matrix::Zero(1, 2) - Kstar).norm();
    for (const auto& rec : tr.log) {
        const double err = (rec.gain - Kstar).norm();
        EXPECT_LE(err, (1.0 - cfg.stepsize * alpha) * prev * (1 + 1e-9) + 1e-14);
        prev = err;
    }
    EXPECT_LT(*tr.log.back().error, 1e-4);
}

TEST(InnerLoop, ScheduledStageMeetsAccuracy) {
    // One stage of the default schedule on the scalar subproblem next to the
    // terminal step.
    const auto sys = scalar_plant();
    const RolloutSimulator sim(sys);
    const double eps = 0.1;
    const auto schedule = make_schedule(ScheduleConstants{}, eps, 0.1, 1);
    const double target =
        riccati::gain_from_value(scalar(3), sys.dynamics, sys.weights).gain()(0, 0);
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        const auto tr = zo::pg_inner_loop(sim.subproblem(PolicySequence::empty(1)),
                                          Policy(scalar(0)), schedule.stage(0), rng);
        if (std::abs(tr.final_gain.gain()(0, 0) - target) <= eps) ++hits;
    }
    EXPECT_GE(hits, 90);
}

TEST(InnerLoop, DivergenceGuard) {
    const auto cost = zo::SampledCost::deterministic(
        [](const Matrix& K) { return -K(0, 0) * K(0, 0); });
    zo::InnerLoopConfig cfg;
    cfg.stepsize = 1.0;
    cfg.radius = 0.1;
    cfg.iterations = 1000;
    cfg.divergence_guard = 1e3;
    Rng rng(46);
    try {
        zo::pg_inner_loop(cost, Policy(scalar(1)), cfg, rng, {});
        FAIL() << "expected divergence";
    } catch (const InnerDivergence& e) {
        EXPECT_GT(e.residual(), 1e3);
        EXPECT_EQ(e.stepsize(), 1.0);
        EXPECT_LT(e.iteration(), 1000);
    }
}

TEST(InnerLoop, SeedDeterminism) {
    const auto sys = generate_random_system(3, 2, 1.2, 47);
    const RolloutSimulator sim(sys);
    zo::InnerLoopConfig cfg;
    cfg.stepsize = 1e-3;
    cfg.radius = 0.1;
    cfg.iterations = 500;
    Rng a(5), b(5), c(6);
    const auto cost = sim.subproblem(PolicySequence::empty(1));
    const auto ta = zo::pg_inner_loop(cost, Policy::zero(2, 3), cfg, a);
    const auto tb = zo::pg_inner_loop(cost, Policy::zero(2, 3), cfg, b);
    const auto tc = zo::pg_inner_loop(cost, Policy::zero(2, 3), cfg, c);
    EXPECT_EQ(ta.final_gain.gain(), tb.final_gain.gain());
    EXPECT_NE(ta.final_gain.gain(), tc.final_gain.gain());
}

TEST(InnerLoop, ConfigValidation) {
    zo::InnerLoopConfig cfg;
    cfg.radius = 0.1;
    cfg.stepsize = -1.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.stepsize = 0.1;
    cfg.iterations = -1;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.iterations = 0;
    EXPECT_NO_THROW(cfg.validate());
    cfg.radius = 0.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    EXPECT_EQ(zo::oracle_kind_from_string("one-point"), zo::OracleKind::one_point);
    EXPECT_THROW(zo::oracle_kind_from_string("three-point"), ConfigError);
}

TEST(Trace, JsonLines) {
    const zo::GradientOracle g = [](const Matrix& K, Rng&) { return zo::GradientSample{K, 2}; };
    zo::InnerLoopConfig cfg;
    cfg.stepsize = 0.5;
    cfg.radius = 1.0;
    cfg.iterations = 3;
    zo::InnerLoopOptions opts;
    opts.stage = 4;
    opts.record_log = true;
    Rng rng(48);
    const auto tr = zo::pg_inner_loop(g, Policy(scalar(8)), cfg, rng, opts);
    std::ostringstream out;
    zo::write_trace_jsonl(out, tr);
    std::istringstream in(out.str());
    std::string line;
    int count = 0;
    while (std::getline(in, line)) {
        const Json j = Json::parse(line);
        EXPECT_EQ(j.at("h"), 4);
        EXPECT_EQ(j.at("i"), count + 1);
        EXPECT_EQ(j.at("oracle_calls"), 2 * (count + 1));
        ++count;
    }
    EXPECT_EQ(count, 3);
    EXPECT_EQ(tr.final_gain.gain()(0, 0), 1.0);
}
