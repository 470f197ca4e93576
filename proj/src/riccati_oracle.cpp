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

#include "rhpg/riccati_oracle.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace rhpg::riccati {

namespace {

void check_value_shape(const Matrix& P, const LinearDynamics& dynamics) {
    const int n = dynamics.state_dim();
    if (P.rows() != n || P.cols() != n)
        throw ConfigError("value matrix must be " + std::to_string(n) + "x" + std::to_string(n));
}

Matrix closed_loop(const Matrix& K, const LinearDynamics& dynamics) {
    if (K.rows() != dynamics.input_dim() || K.cols() != dynamics.state_dim())
        throw ConfigError("gain shape does not match the plant");
    return dynamics.A() - dynamics.B() * K;
}

}  // namespace

Matrix rde_step(const Matrix& P_next, const LinearDynamics& dynamics,
                const CostWeights& weights) {
    weights.check_compatible(dynamics);
    check_value_shape(P_next, dynamics);
    const Matrix& A = dynamics.A();
    const Matrix& B = dynamics.B();
    const Matrix BtP = B.transpose() * P_next;
    const Matrix S = weights.R() + BtP * B;
    const Matrix BtPA = BtP * A;
    const Matrix P = weights.Q() + A.transpose() * P_next * A -
                     BtPA.transpose() * S.llt().solve(BtPA);
    return linalg::symmetrize(P);
}

Policy gain_from_value(const Matrix& P_next, const LinearDynamics& dynamics,
                       const CostWeights& weights) {
    weights.check_compatible(dynamics);
    check_value_shape(P_next, dynamics);
    const Matrix BtP = dynamics.B().transpose() * P_next;
    const Matrix S = weights.R() + BtP * dynamics.B();
    return Policy(S.llt().solve(BtP * dynamics.A()));
}

RiccatiSolution solve_finite_horizon(const LinearDynamics& dynamics,
                                     const CostWeights& weights, int horizon) {
    if (horizon < 1) throw ConfigError("horizon must be >= 1");
    weights.check_compatible(dynamics);
    std::vector<Matrix> values(static_cast<std::size_t>(horizon) + 1);
    std::vector<Policy> gains(static_cast<std::size_t>(horizon),
                              Policy::zero(dynamics.input_dim(), dynamics.state_dim()));
    values.back() = weights.QN();
    for (int t = horizon - 1; t >= 0; --t) {
        const Matrix& next = values[static_cast<std::size_t>(t) + 1];
        gains[static_cast<std::size_t>(t)] = gain_from_value(next, dynamics, weights);
        values[static_cast<std::size_t>(t)] = rde_step(next, dynamics, weights);
    }
    return {std::move(values), PolicySequence(0, horizon, std::move(gains)), horizon};
}

double are_residual(const Matrix& P, const LinearDynamics& dynamics,
                    const CostWeights& weights) {
    return (P - rde_step(P, dynamics, weights)).norm();
}

AreSolution solve_are(const LinearDynamics& dynamics, const CostWeights& weights, double tol,
                      int max_iter, const std::optional<Matrix>& P_init) {
    if (!(tol > 0.0)) throw ConfigError("solve_are: tol must be positive");
    if (max_iter < 1) throw ConfigError("solve_are: max_iter must be >= 1");
    weights.check_compatible(dynamics);
    Matrix P = P_init ? linalg::symmetrize(*P_init) : weights.Q();
    check_value_shape(P, dynamics);

    double rel_step = std::numeric_limits<double>::infinity();
    int iter = 0;
    bool converged = false;
    while (iter < max_iter) {
        Matrix next = rde_step(P, dynamics, weights);
        ++iter;
        if (!next.allFinite())
            throw NumericalError("solve_are: iterate became non-finite; (A, B) is not "
                                 "stabilizable or the problem is ill-conditioned",
                                 rel_step);
        const double scale = P.norm();
        const double step = (next - P).norm();
        rel_step = scale > 0.0 ? step / scale : step;
        P = std::move(next);
        if (step <= tol * scale) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw NumericalError("solve_are: no convergence after " + std::to_string(max_iter) +
                                 " iterations; (A, B) is not stabilizable or ill-conditioned"
                                 " (last relative step " + std::to_string(rel_step) + ")",
                             rel_step);

    Policy K = gain_from_value(P, dynamics, weights);
    const Matrix Ak = closed_loop(K.gain(), dynamics);
    const double rho = spectral_radius(Ak);
    if (!(rho < 1.0))
        throw NumericalError("solve_are: limit is not stabilizing (rho = " +
                                 std::to_string(rho) + ")",
                             rho);
    AreSolution sol{P,
                    std::move(K),
                    are_residual(P, dynamics, weights),
                    induced_norm(Ak, P),
                    linalg::spectral_norm(Ak),
                    linalg::condition_number(P),
                    iter};
    return sol;
}

double horizon_bound_value(const AreSolution& are, const LinearDynamics& dynamics,
                           const CostWeights& weights, double epsilon) {
    if (!(epsilon > 0.0)) throw ConfigError("horizon_bound: epsilon must be positive");
    const double contraction = are.closed_loop_norm_star;
    if (!(contraction < 1.0))
        throw NumericalError("horizon_bound: ||A - BK*||_* >= 1 contradicts the ARE solution",
                             contraction);
    const double terminal_gap = induced_norm(weights.QN() - are.P_star, are.P_star);
    if (terminal_gap <= 1e-12 * are.P_star.norm()) return 1.0;
    const double numerator = terminal_gap * are.kappa_P_star * are.closed_loop_spectral_norm *
                             linalg::spectral_norm(dynamics.B());
    const double denominator = epsilon * linalg::min_eigenvalue(weights.R());
    if (numerator <= 0.0 || contraction <= 0.0) return 1.0;
    return 0.5 * std::log(numerator / denominator) / std::log(1.0 / contraction) + 1.0;
}

int horizon_bound(const AreSolution& are, const LinearDynamics& dynamics,
                  const CostWeights& weights, double epsilon) {
    const double value = horizon_bound_value(are, dynamics, weights, epsilon);
    if (!std::isfinite(value))
        throw NumericalError("horizon_bound: non-finite bound", value);
    return std::max(1, static_cast<int>(std::ceil(value)));
}

Matrix lyapunov_step(const Matrix& P_next, const Matrix& K, const LinearDynamics& dynamics,
                     const CostWeights& weights) {
    check_value_shape(P_next, dynamics);
    const Matrix Ak = closed_loop(K, dynamics);
    return linalg::symmetrize(Ak.transpose() * P_next * Ak + K.transpose() * weights.R() * K +
                              weights.Q());
}

std::vector<Matrix> policy_values(const LinearDynamics& dynamics, const CostWeights& weights,
                                  const PolicySequence& policies) {
    weights.check_compatible(dynamics);
    std::vector<Matrix> values(policies.size() + 1);
    values.back() = weights.QN();
    for (int t = policies.horizon() - 1; t >= policies.first_index(); --t) {
        const auto k = static_cast<std::size_t>(t - policies.first_index());
        values[k] = lyapunov_step(values[k + 1], policies.at(t).gain(), dynamics, weights);
    }
    return values;
}

Matrix tail_value(const LinearDynamics& dynamics, const CostWeights& weights,
                  const PolicySequence& tail) {
    return policy_values(dynamics, weights, tail).front();
}

Matrix lyapunov_solve(const Matrix& K, const LinearDynamics& dynamics,
                      const CostWeights& weights) {
    weights.check_compatible(dynamics);
    Matrix Ak = closed_loop(K, dynamics);
    const double rho = spectral_radius(Ak);
    if (!(rho < 1.0))
        throw NumericalError("lyapunov_solve: closed loop is not stable", rho);
    // Doubling form of the fixed-point iteration: after j sweeps X holds the
    // first 2^j terms of sum_i (Ak')^i M Ak^i.
    Matrix X = K.transpose() * weights.R() * K + weights.Q();
    double rel = std::numeric_limits<double>::infinity();
    for (int sweep = 0; sweep < 200; ++sweep) {
        const Matrix increment = Ak.transpose() * X * Ak;
        X += increment;
        rel = increment.norm() / X.norm();
        if (!X.allFinite()) break;
        if (rel <= 1e-12) return linalg::symmetrize(X);
        Ak = Ak * Ak;
    }
    throw NumericalError("lyapunov_solve: fixed-point iteration did not converge", rel);
}

double lyapunov_cost(const Policy& K, const LinearDynamics& dynamics,
                     const CostWeights& weights, const Matrix& sigma0) {
    const Matrix Ak = closed_loop(K.gain(), dynamics);
    if (spectral_radius(Ak) >= 1.0 - 1e-12) return std::numeric_limits<double>::infinity();
    if (sigma0.rows() != dynamics.state_dim() || sigma0.cols() != dynamics.state_dim())
        throw ConfigError("lyapunov_cost: Sigma0 has the wrong shape");
    return (sigma0 * lyapunov_solve(K.gain(), dynamics, weights)).trace();
}

double subproblem_expected_cost(const Matrix& K, const Matrix& P_tail,
                                const LinearDynamics& dynamics, const CostWeights& weights,
                                const Matrix& sigma0) {
    return (sigma0 * lyapunov_step(P_tail, K, dynamics, weights)).trace();
}

Matrix subproblem_gradient(const Matrix& K, const Matrix& P_tail,
                           const LinearDynamics& dynamics, const CostWeights& weights,
                           const Matrix& sigma0) {
    check_value_shape(P_tail, dynamics);
    const Matrix& A = dynamics.A();
    const Matrix& B = dynamics.B();
    const Matrix BtP = B.transpose() * P_tail;
    return 2.0 * ((weights.R() + BtP * B) * K - BtP * A) * sigma0;
}

Curvature subproblem_curvature(const Matrix& P_tail, const LinearDynamics& dynamics,
                               const CostWeights& weights, const Matrix& sigma0) {
    const Matrix H = weights.R() + dynamics.B().transpose() * P_tail * dynamics.B();
    return {2.0 * linalg::min_eigenvalue(H) * linalg::min_eigenvalue(sigma0),
            2.0 * linalg::max_eigenvalue(H) * linalg::max_eigenvalue(sigma0)};
}

double stability_threshold(const AreSolution& are, const LinearDynamics& dynamics) {
    const double b = linalg::spectral_norm(dynamics.B());
    if (b == 0.0) return std::numeric_limits<double>::infinity();
    return (1.0 - are.closed_loop_norm_star) / b;
}

bool certify(const Policy& K, const LinearDynamics& dynamics) {
    return spectral_radius(closed_loop(K.gain(), dynamics)) < 1.0;
}

Json to_json(const AreSolution& are) {
    return {{"P_star", matrix_to_json(are.P_star)},
            {"K_star", matrix_to_json(are.K_star.gain())},
            {"residual", are.residual},
            {"closed_loop_norm_star", are.closed_loop_norm_star},
            {"closed_loop_spectral_norm", are.closed_loop_spectral_norm},
            {"kappa_P_star", are.kappa_P_star},
            {"iterations", are.iterations}};
}

Json to_json(const RiccatiSolution& sol) {
    Json P = Json::array();
    for (const Matrix& m : sol.values) P.push_back(matrix_to_json(m));
    Json K = Json::array();
    for (const Policy& k : sol.gains.gains()) K.push_back(matrix_to_json(k.gain()));
    return {{"horizon", sol.horizon}, {"P", std::move(P)}, {"K", std::move(K)}};
}

}  // namespace rhpg::riccati
