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

#ifndef RHPG_TESTS_SUPPORT_HPP
#define RHPG_TESTS_SUPPORT_HPP

#include <cmath>

#include "rhpg/experiment.hpp"

namespace rhpg::testing {

inline SystemInstance scalar_plant(double QN = 3.0) {
    return {LinearDynamics(Matrix::Constant(1, 1, 5.0), Matrix::Constant(1, 1, 0.33)),
            CostWeights(Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                        Matrix::Constant(1, 1, QN)),
            InitialStateDistribution::gaussian(Matrix::Identity(1, 1)), NoiseModel()};
}

inline Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

/// Positive root of the scalar ARE with Q = R = 1, which clears to
/// B^2 P^2 - (A^2 + B^2 - 1) P - 1 = 0.
inline double scalar_are_root(double A, double B) {
    const double a = B * B;
    const double b = -(A * A - 1.0 + B * B);
    return (-b + std::sqrt(b * b + 4.0 * a)) / (2.0 * a);
}

/// Exact subproblem gradients from the model, for hooks that bypass the
/// zeroth-order estimator.
inline RhpgHooks exact_gradient_hooks(const SystemInstance& sys) {
    RhpgHooks hooks;
    hooks.gradient_override = [sys](int, const PolicySequence& tail) -> zo::GradientOracle {
        const Matrix P = riccati::tail_value(sys.dynamics, sys.weights, tail);
        const Matrix sigma0 = sys.initial.second_moment();
        return [sys, P, sigma0](const Matrix& K, Rng&) {
            return zo::GradientSample{
                riccati::subproblem_gradient(K, P, sys.dynamics, sys.weights, sigma0), 0};
        };
    };
    return hooks;
}

/// Step size 1/L and enough iterations to contract every stage below `tol`
/// from a zero start.
inline RhpgSchedule exact_gradient_schedule(const SystemInstance& sys, int horizon, double tol) {
    RhpgSchedule s;
    s.epsilon = tol;
    s.delta = 0.5;
    s.horizon = horizon;
    s.stages.resize(static_cast<std::size_t>(horizon));
    const Matrix sigma0 = sys.initial.second_moment();
    // Optimal tail values bound every stage's curvature from above and below.
    const auto fh = riccati::solve_finite_horizon(sys.dynamics, sys.weights, horizon);
    for (int h = 0; h < horizon; ++h) {
        const auto c = riccati::subproblem_curvature(fh.P(h + 1), sys.dynamics, sys.weights, sigma0);
        const double kappa = c.smoothness / c.strong_convexity;
        auto& cfg = s.stages[static_cast<std::size_t>(h)];
        cfg.stepsize = 1.0 / c.smoothness;
        cfg.radius = 1.0;
        cfg.iterations = static_cast<long long>(std::ceil(kappa * std::log(1e4 / tol))) + 10;
    }
    return s;
}

}  // namespace rhpg::testing

#endif  // RHPG_TESTS_SUPPORT_HPP
