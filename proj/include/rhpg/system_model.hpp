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

#ifndef RHPG_SYSTEM_MODEL_HPP
#define RHPG_SYSTEM_MODEL_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "rhpg/errors.hpp"

namespace rhpg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Random source used everywhere in the library. Each worker owns one.
using Rng = std::mt19937_64;

namespace linalg {

/// Relative tolerance for definiteness checks (scaled by the matrix norm).
inline constexpr double kDefinitenessTol = 1e-10;

Matrix symmetrize(const Matrix& M);
bool all_finite(const Matrix& M);
double min_eigenvalue(const Matrix& S);
double max_eigenvalue(const Matrix& S);
bool is_positive_definite(const Matrix& S);
bool is_positive_semidefinite(const Matrix& S);
/// Symmetric square root of a psd matrix.
Matrix sqrt_psd(const Matrix& S);
/// Largest singular value.
double spectral_norm(const Matrix& X);
/// Ratio of the extreme eigenvalues of a pd matrix.
double condition_number(const Matrix& S);

}  // namespace linalg

/// x_{t+1} = A x_t + B u_t
class LinearDynamics {
public:
    LinearDynamics(Matrix A, Matrix B);

    const Matrix& A() const noexcept { return A_; }
    const Matrix& B() const noexcept { return B_; }
    int state_dim() const noexcept { return static_cast<int>(A_.rows()); }
    int input_dim() const noexcept { return static_cast<int>(B_.cols()); }

private:
    Matrix A_;
    Matrix B_;
};

/// Stage weights Q > 0, R > 0 and terminal weight Q_N >= 0. Inputs are
/// symmetrized on construction.
class CostWeights {
public:
    CostWeights(Matrix Q, Matrix R, Matrix QN);

    const Matrix& Q() const noexcept { return Q_; }
    const Matrix& R() const noexcept { return R_; }
    const Matrix& QN() const noexcept { return QN_; }

    /// Throws ConfigError unless the weights match the plant dimensions.
    void check_compatible(const LinearDynamics& dynamics) const;

private:
    Matrix Q_;
    Matrix R_;
    Matrix QN_;
};

/// Zero-mean initial-state laws (plus the deterministic-x0 variant).
class InitialStateDistribution {
public:
    enum class Kind { gaussian, deterministic, scaled_basis };

    static InitialStateDistribution gaussian(const Matrix& sigma0);
    static InitialStateDistribution deterministic(const Vector& x0);
    /// Uniform over {+-sqrt(n) * Sigma0^{1/2} e_i}; covariance Sigma0.
    static InitialStateDistribution scaled_basis(const Matrix& sigma0);

    Kind kind() const noexcept { return kind_; }
    int dim() const noexcept { return static_cast<int>(second_moment_.rows()); }

    /// E[x x^T]. Equals Sigma0 for the zero-mean kinds, x0 x0^T otherwise.
    const Matrix& second_moment() const noexcept { return second_moment_; }
    const Vector& fixed_state() const noexcept { return x0_; }

    Vector sample(Rng& rng) const;

private:
    InitialStateDistribution() = default;

    Kind kind_ = Kind::gaussian;
    Matrix second_moment_;
    Matrix factor_;  // Cholesky factor (gaussian) or symmetric sqrt (basis)
    Vector x0_;
};

/// Additive process noise w_t ~ N(0, W).
class NoiseModel {
public:
    NoiseModel() = default;  // disabled
    explicit NoiseModel(const Matrix& W);

    bool enabled() const noexcept { return enabled_; }
    const Matrix& covariance() const noexcept { return W_; }
    Vector sample(Rng& rng) const;

private:
    bool enabled_ = false;
    Matrix W_;
    Matrix factor_;
};

/// Gain of the state feedback u = -K x.
class Policy {
public:
    explicit Policy(Matrix K);
    static Policy zero(int m, int n) { return Policy(Matrix::Zero(m, n)); }

    const Matrix& gain() const noexcept { return K_; }
    int input_dim() const noexcept { return static_cast<int>(K_.rows()); }
    int state_dim() const noexcept { return static_cast<int>(K_.cols()); }

private:
    Matrix K_;
};

/// Gains K_t for t in [first_index, horizon - 1]. May be empty.
class PolicySequence {
public:
    PolicySequence() = default;
    PolicySequence(int first_index, int horizon, std::vector<Policy> gains);
    static PolicySequence empty(int horizon) { return {horizon, horizon, {}}; }

    int first_index() const noexcept { return first_; }
    int horizon() const noexcept { return horizon_; }
    std::size_t size() const noexcept { return gains_.size(); }
    bool contains(int t) const noexcept { return t >= first_ && t < horizon_; }

    /// Throws ConfigError when t is outside the covered range.
    const Policy& at(int t) const;
    const std::vector<Policy>& gains() const noexcept { return gains_; }

    /// New sequence with `gain` prepended at first_index - 1.
    PolicySequence prepend(Policy gain) const;

private:
    int first_ = 0;
    int horizon_ = 0;
    std::vector<Policy> gains_;
};

/// Realized states x_h..x_N and inputs u_h..u_{N-1}.
struct Trajectory {
    int start_index = 0;
    std::vector<Vector> states;
    std::vector<Vector> inputs;
};

/// A plant with its cost and data-generating laws.
struct SystemInstance {
    LinearDynamics dynamics;
    CostWeights weights;
    InitialStateDistribution initial;
    NoiseModel noise;

    void validate() const;
};

/// Simulates u_t = -K_t x_t from t = policies.first_index() to the horizon.
/// `rng` is only consumed when the noise model is enabled.
Trajectory rollout(const LinearDynamics& dynamics, const PolicySequence& policies,
                   const Vector& x_start, const NoiseModel& noise, Rng& rng);

/// Running cost with realized inputs plus the terminal term.
double finite_horizon_cost(const Trajectory& trajectory, const CostWeights& weights);

/// Single-sample value J_h(K_h; x_h): K_h at step h = tail.first_index() - 1,
/// tail gains thereafter, terminal weight at tail.horizon().
double subproblem_cost(const LinearDynamics& dynamics, const CostWeights& weights,
                       const PolicySequence& tail, const Matrix& K_h,
                       const Vector& x_h);

/// Same as subproblem_cost, with process noise drawn from `rng`.
double subproblem_cost(const LinearDynamics& dynamics, const CostWeights& weights,
                       const PolicySequence& tail, const Matrix& K_h,
                       const Vector& x_h, const NoiseModel& noise, Rng& rng);

Vector sample_initial_state(const InitialStateDistribution& dist, Rng& rng);

/// sup_z sqrt(z'X'WXz / z'Wz) = ||W^{1/2} X W^{-1/2}||_2.
double induced_norm(const Matrix& X, const Matrix& W);

/// max |lambda_i(X)|.
double spectral_radius(const Matrix& X);

}  // namespace rhpg

#endif  // RHPG_SYSTEM_MODEL_HPP
