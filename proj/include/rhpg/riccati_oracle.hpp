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

#ifndef RHPG_RICCATI_ORACLE_HPP
#define RHPG_RICCATI_ORACLE_HPP

#include <optional>
#include <vector>

#include "rhpg/json_io.hpp"
#include "rhpg/system_model.hpp"

// Model-based ground truth. Nothing in here is reachable from the learner's
// data path; it exists for planning, testing and certification.
namespace rhpg::riccati {

/// Finite-horizon optimum: P_t for t = 0..N (P_N = Q_N) and K*_t for t < N.
struct RiccatiSolution {
    std::vector<Matrix> values;
    PolicySequence gains;
    int horizon;

    const Matrix& P(int t) const { return values.at(static_cast<std::size_t>(t)); }
};

struct AreSolution {
    Matrix P_star;
    Policy K_star;
    double residual;
    /// ||A - B K*||_* in the P*-induced norm.
    double closed_loop_norm_star;
    /// ||A - B K*||_2.
    double closed_loop_spectral_norm;
    double kappa_P_star;
    int iterations;
};

/// Q + A'PA - A'PB (R + B'PB)^{-1} B'PA, symmetrized.
Matrix rde_step(const Matrix& P_next, const LinearDynamics& dynamics,
                const CostWeights& weights);

/// (R + B'PB)^{-1} B'PA.
Policy gain_from_value(const Matrix& P_next, const LinearDynamics& dynamics,
                       const CostWeights& weights);

RiccatiSolution solve_finite_horizon(const LinearDynamics& dynamics,
                                     const CostWeights& weights, int horizon);

inline constexpr double kAreTol = 1e-10;
inline constexpr int kAreMaxIter = 100000;

/// Fixed-point iteration of the RDE from `P_init` (default Q) until
/// ||P_{k+1} - P_k||_F <= tol ||P_k||_F. Throws NumericalError carrying the
/// last relative step when max_iter is exhausted or the iterate blows up.
AreSolution solve_are(const LinearDynamics& dynamics, const CostWeights& weights,
                      double tol = kAreTol, int max_iter = kAreMaxIter,
                      const std::optional<Matrix>& P_init = std::nullopt);

/// ||P - rde_step(P)||_F.
double are_residual(const Matrix& P, const LinearDynamics& dynamics,
                    const CostWeights& weights);

/// Horizon N0 guaranteeing ||K*_0 - K*|| <= epsilon by the exponential
/// Riccati convergence bound, rounded up and floored at 1.
int horizon_bound(const AreSolution& are, const LinearDynamics& dynamics,
                  const CostWeights& weights, double epsilon);

/// Real-valued right-hand side behind horizon_bound (before rounding).
double horizon_bound_value(const AreSolution& are, const LinearDynamics& dynamics,
                           const CostWeights& weights, double epsilon);

/// Policy evaluation step P_t = (A-BK)'P_{t+1}(A-BK) + K'RK + Q.
Matrix lyapunov_step(const Matrix& P_next, const Matrix& K, const LinearDynamics& dynamics,
                     const CostWeights& weights);

/// Cost-to-go matrices of a fixed policy sequence: element k holds
/// P_{first+k}, the last element is Q_N.
std::vector<Matrix> policy_values(const LinearDynamics& dynamics, const CostWeights& weights,
                                  const PolicySequence& policies);

/// Value matrix of the tail {K_{h+1..N-1}} seen from x_{h+1}.
Matrix tail_value(const LinearDynamics& dynamics, const CostWeights& weights,
                  const PolicySequence& tail);

/// Solution of P = (A-BK)'P(A-BK) + K'RK + Q for a stabilizing K.
Matrix lyapunov_solve(const Matrix& K, const LinearDynamics& dynamics,
                      const CostWeights& weights);

/// J_inf(K) = tr(Sigma0 P_K), +inf when rho(A - BK) >= 1 - 1e-12.
double lyapunov_cost(const Policy& K, const LinearDynamics& dynamics,
                     const CostWeights& weights, const Matrix& sigma0);

/// E[J_h(K; x_h)] for x_h with second moment `sigma0` and tail value `P_tail`.
double subproblem_expected_cost(const Matrix& K, const Matrix& P_tail,
                                const LinearDynamics& dynamics, const CostWeights& weights,
                                const Matrix& sigma0);

/// 2 [(R + B'P B) K - B'P A] Sigma0.
Matrix subproblem_gradient(const Matrix& K, const Matrix& P_tail,
                           const LinearDynamics& dynamics, const CostWeights& weights,
                           const Matrix& sigma0);

/// Extreme eigenvalues of the subproblem Hessian (R + B'PB) (x) Sigma0, times 2.
struct Curvature {
    double strong_convexity;
    double smoothness;
};
Curvature subproblem_curvature(const Matrix& P_tail, const LinearDynamics& dynamics,
                               const CostWeights& weights, const Matrix& sigma0);

/// (1 - ||A - B K*||_*) / ||B||.
double stability_threshold(const AreSolution& are, const LinearDynamics& dynamics);

/// rho(A - B K) < 1.
bool certify(const Policy& K, const LinearDynamics& dynamics);

Json to_json(const AreSolution& are);
Json to_json(const RiccatiSolution& sol);

}  // namespace rhpg::riccati

#endif  // RHPG_RICCATI_ORACLE_HPP
