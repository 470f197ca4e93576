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

#include "rhpg/system_model.hpp"

#include <cmath>
#include <string>

namespace rhpg {

namespace linalg {

Matrix symmetrize(const Matrix& M) { return 0.5 * (M + M.transpose()); }

bool all_finite(const Matrix& M) { return M.allFinite(); }

double min_eigenvalue(const Matrix& S) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(S), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double max_eigenvalue(const Matrix& S) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(S), Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

namespace {
double definiteness_scale(const Matrix& S) {
    const double norm = S.cwiseAbs().maxCoeff();
    return kDefinitenessTol * (norm > 0.0 ? norm : 1.0);
}
}  // namespace

bool is_positive_definite(const Matrix& S) {
    if (S.size() == 0 || S.rows() != S.cols() || !S.allFinite()) return false;
    return min_eigenvalue(S) > definiteness_scale(S);
}

bool is_positive_semidefinite(const Matrix& S) {
    if (S.rows() != S.cols() || !S.allFinite()) return false;
    if (S.size() == 0) return true;
    return min_eigenvalue(S) >= -definiteness_scale(S);
}

Matrix sqrt_psd(const Matrix& S) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(S));
    const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

double spectral_norm(const Matrix& X) {
    if (X.size() == 0) return 0.0;
    if (X.size() == 1) return std::abs(X(0, 0));
    Eigen::JacobiSVD<Matrix> svd(X);
    return svd.singularValues()(0);
}

double condition_number(const Matrix& S) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(S), Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (lo <= 0.0) throw NumericalError("condition number of a non-pd matrix", lo);
    return hi / lo;
}

}  // namespace linalg

namespace {

std::string shape(const Matrix& M) {
    return std::to_string(M.rows()) + "x" + std::to_string(M.cols());
}

void require_finite(const Matrix& M, const char* name) {
    if (!M.allFinite()) throw ConfigError(std::string(name) + " has non-finite entries");
}

}  // namespace

LinearDynamics::LinearDynamics(Matrix A, Matrix B) : A_(std::move(A)), B_(std::move(B)) {
    if (A_.rows() < 1 || A_.rows() != A_.cols())
        throw ConfigError("A must be square with n >= 1, got " + shape(A_));
    if (B_.rows() != A_.rows() || B_.cols() < 1)
        throw ConfigError("B must be n x m with m >= 1, got " + shape(B_));
    require_finite(A_, "A");
    require_finite(B_, "B");
}

CostWeights::CostWeights(Matrix Q, Matrix R, Matrix QN) {
    if (Q.rows() != Q.cols()) throw ConfigError("Q must be square, got " + shape(Q));
    if (R.rows() != R.cols()) throw ConfigError("R must be square, got " + shape(R));
    if (QN.rows() != Q.rows() || QN.cols() != Q.cols())
        throw ConfigError("QN must match Q, got " + shape(QN));
    require_finite(Q, "Q");
    require_finite(R, "R");
    require_finite(QN, "QN");
    Q_ = linalg::symmetrize(Q);
    R_ = linalg::symmetrize(R);
    QN_ = linalg::symmetrize(QN);
    if (!linalg::is_positive_definite(Q_)) throw ConfigError("Q must be positive definite");
    if (!linalg::is_positive_definite(R_)) throw ConfigError("R must be positive definite");
    if (!linalg::is_positive_semidefinite(QN_))
        throw ConfigError("QN must be positive semi-definite");
}

void CostWeights::check_compatible(const LinearDynamics& dynamics) const {
    if (Q_.rows() != dynamics.state_dim())
        throw ConfigError("Q is " + shape(Q_) + " but the plant has n=" +
                          std::to_string(dynamics.state_dim()));
    if (R_.rows() != dynamics.input_dim())
        throw ConfigError("R is " + shape(R_) + " but the plant has m=" +
                          std::to_string(dynamics.input_dim()));
}

InitialStateDistribution InitialStateDistribution::gaussian(const Matrix& sigma0) {
    require_finite(sigma0, "Sigma0");
    const Matrix s = linalg::symmetrize(sigma0);
    if (!linalg::is_positive_definite(s)) throw ConfigError("Sigma0 must be positive definite");
    InitialStateDistribution d;
    d.kind_ = Kind::gaussian;
    d.second_moment_ = s;
    d.factor_ = Eigen::LLT<Matrix>(s).matrixL();
    return d;
}

InitialStateDistribution InitialStateDistribution::deterministic(const Vector& x0) {
    if (x0.size() < 1) throw ConfigError("x0 must be non-empty");
    require_finite(x0, "x0");
    InitialStateDistribution d;
    d.kind_ = Kind::deterministic;
    d.x0_ = x0;
    d.second_moment_ = x0 * x0.transpose();
    return d;
}

InitialStateDistribution InitialStateDistribution::scaled_basis(const Matrix& sigma0) {
    require_finite(sigma0, "Sigma0");
    const Matrix s = linalg::symmetrize(sigma0);
    if (!linalg::is_positive_definite(s)) throw ConfigError("Sigma0 must be positive definite");
    InitialStateDistribution d;
    d.kind_ = Kind::scaled_basis;
    d.second_moment_ = s;
    d.factor_ = linalg::sqrt_psd(s);
    return d;
}

Vector InitialStateDistribution::sample(Rng& rng) const {
    const int n = dim();
    switch (kind_) {
        case Kind::deterministic:
            return x0_;
        case Kind::gaussian: {
            std::normal_distribution<double> normal(0.0, 1.0);
            Vector z(n);
            for (int i = 0; i < n; ++i) z(i) = normal(rng);
            return factor_ * z;
        }
        case Kind::scaled_basis: {
            std::uniform_int_distribution<int> pick(0, 2 * n - 1);
            const int k = pick(rng);
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            return sign * std::sqrt(static_cast<double>(n)) * factor_.col(k / 2);
        }
    }
    return Vector::Zero(n);
}

NoiseModel::NoiseModel(const Matrix& W) : enabled_(true) {
    require_finite(W, "W");
    W_ = linalg::symmetrize(W);
    if (!linalg::is_positive_definite(W_)) throw ConfigError("W must be positive definite");
    factor_ = Eigen::LLT<Matrix>(W_).matrixL();
}

Vector NoiseModel::sample(Rng& rng) const {
    if (!enabled_) return Vector();
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector z(W_.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    return factor_ * z;
}

Policy::Policy(Matrix K) : K_(std::move(K)) {
    if (!K_.allFinite()) throw ConfigError("policy gain has non-finite entries");
}

PolicySequence::PolicySequence(int first_index, int horizon, std::vector<Policy> gains)
    : first_(first_index), horizon_(horizon), gains_(std::move(gains)) {
    if (first_ < 0 || horizon_ < first_)
        throw ConfigError("invalid policy range [" + std::to_string(first_) + ", " +
                          std::to_string(horizon_) + ")");
    if (static_cast<int>(gains_.size()) != horizon_ - first_)
        throw ConfigError("policy sequence over [" + std::to_string(first_) + ", " +
                          std::to_string(horizon_) + ") needs " +
                          std::to_string(horizon_ - first_) + " gains, got " +
                          std::to_string(gains_.size()));
    for (std::size_t i = 1; i < gains_.size(); ++i) {
        if (gains_[i].gain().rows() != gains_[0].gain().rows() ||
            gains_[i].gain().cols() != gains_[0].gain().cols())
            throw ConfigError("policy sequence mixes gain shapes");
    }
}

const Policy& PolicySequence::at(int t) const {
    if (!contains(t))
        throw ConfigError("no gain for t=" + std::to_string(t) + " in [" +
                          std::to_string(first_) + ", " + std::to_string(horizon_) + ")");
    return gains_[static_cast<std::size_t>(t - first_)];
}

PolicySequence PolicySequence::prepend(Policy gain) const {
    if (first_ == 0) throw ConfigError("cannot prepend before t=0");
    std::vector<Policy> g;
    g.reserve(gains_.size() + 1);
    g.push_back(std::move(gain));
    g.insert(g.end(), gains_.begin(), gains_.end());
    return {first_ - 1, horizon_, std::move(g)};
}

void SystemInstance::validate() const {
    weights.check_compatible(dynamics);
    if (initial.dim() != dynamics.state_dim())
        throw ConfigError("initial-state distribution has dimension " +
                          std::to_string(initial.dim()) + ", plant has n=" +
                          std::to_string(dynamics.state_dim()));
    if (noise.enabled() && noise.covariance().rows() != dynamics.state_dim())
        throw ConfigError("noise covariance does not match the state dimension");
}

namespace {

void check_gain_shape(const Matrix& K, const LinearDynamics& dynamics, int t) {
    if (K.rows() != dynamics.input_dim() || K.cols() != dynamics.state_dim())
        throw ConfigError("gain at t=" + std::to_string(t) + " is " + shape(K) +
                          ", expected " + std::to_string(dynamics.input_dim()) + "x" +
                          std::to_string(dynamics.state_dim()));
}

void check_state(const Vector& x, const LinearDynamics& dynamics) {
    if (x.size() != dynamics.state_dim())
        throw ConfigError("state has dimension " + std::to_string(x.size()) +
                          ", expected " + std::to_string(dynamics.state_dim()));
}

// Hot path of every zeroth-order query; avoids temporaries inside the loop.
double accumulate_subproblem(const LinearDynamics& dynamics, const CostWeights& weights,
                             const PolicySequence& tail, const Matrix& K_h,
                             const Vector& x_h, const NoiseModel* noise, Rng* rng) {
    const int h = tail.first_index() - 1;
    const int N = tail.horizon();
    if (h < 0) throw ConfigError("tail must start at t >= 1");
    check_state(x_h, dynamics);
    check_gain_shape(K_h, dynamics, h);
    weights.check_compatible(dynamics);
    if (!tail.gains().empty()) check_gain_shape(tail.gains().front().gain(), dynamics, h + 1);

    const Matrix& A = dynamics.A();
    const Matrix& B = dynamics.B();
    const Matrix& Q = weights.Q();
    const Matrix& R = weights.R();
    const bool noisy = noise != nullptr && noise->enabled();

    if (A.size() == 1 && B.size() == 1 && !noisy) {
        const double a = A(0, 0), b = B(0, 0), q = Q(0, 0), r = R(0, 0);
        double x = x_h(0);
        double cost = 0.0;
        for (int t = h; t < N; ++t) {
            const double k = (t == h) ? K_h(0, 0) : tail.at(t).gain()(0, 0);
            const double u = -k * x;
            cost += q * x * x + r * u * u;
            x = a * x + b * u;
        }
        return cost + weights.QN()(0, 0) * x * x;
    }

    Vector x = x_h;
    Vector next(x.size());
    Vector u(dynamics.input_dim());
    Vector qx(x.size());
    Vector ru(u.size());
    double cost = 0.0;
    for (int t = h; t < N; ++t) {
        const Matrix& K = (t == h) ? K_h : tail.at(t).gain();
        u.noalias() = -K * x;
        qx.noalias() = Q * x;
        ru.noalias() = R * u;
        cost += x.dot(qx) + u.dot(ru);
        next.noalias() = A * x;
        next.noalias() += B * u;
        if (noisy) next += noise->sample(*rng);
        x.swap(next);
    }
    qx.noalias() = weights.QN() * x;
    return cost + x.dot(qx);
}

}  // namespace

Trajectory rollout(const LinearDynamics& dynamics, const PolicySequence& policies,
                   const Vector& x_start, const NoiseModel& noise, Rng& rng) {
    check_state(x_start, dynamics);
    if (noise.enabled() && noise.covariance().rows() != dynamics.state_dim())
        throw ConfigError("noise covariance does not match the state dimension");
    Trajectory traj;
    traj.start_index = policies.first_index();
    traj.states.reserve(policies.size() + 1);
    traj.inputs.reserve(policies.size());
    traj.states.push_back(x_start);
    for (int t = policies.first_index(); t < policies.horizon(); ++t) {
        const Matrix& K = policies.at(t).gain();
        check_gain_shape(K, dynamics, t);
        const Vector& x = traj.states.back();
        Vector u = -K * x;
        Vector next = dynamics.A() * x + dynamics.B() * u;
        if (noise.enabled()) next += noise.sample(rng);
        traj.inputs.push_back(std::move(u));
        traj.states.push_back(std::move(next));
    }
    return traj;
}

double finite_horizon_cost(const Trajectory& trajectory, const CostWeights& weights) {
    if (trajectory.states.size() != trajectory.inputs.size() + 1)
        throw ConfigError("trajectory must hold one more state than inputs");
    const Eigen::Index n = weights.Q().rows();
    const Eigen::Index m = weights.R().rows();
    double cost = 0.0;
    for (std::size_t t = 0; t < trajectory.inputs.size(); ++t) {
        const Vector& x = trajectory.states[t];
        const Vector& u = trajectory.inputs[t];
        if (x.size() != n || u.size() != m)
            throw ConfigError("trajectory dimensions do not match the weights");
        cost += x.dot(weights.Q() * x) + u.dot(weights.R() * u);
    }
    const Vector& xN = trajectory.states.back();
    if (xN.size() != n) throw ConfigError("terminal state dimension does not match QN");
    return cost + xN.dot(weights.QN() * xN);
}

double subproblem_cost(const LinearDynamics& dynamics, const CostWeights& weights,
                       const PolicySequence& tail, const Matrix& K_h, const Vector& x_h) {
    return accumulate_subproblem(dynamics, weights, tail, K_h, x_h, nullptr, nullptr);
}

double subproblem_cost(const LinearDynamics& dynamics, const CostWeights& weights,
                       const PolicySequence& tail, const Matrix& K_h, const Vector& x_h,
                       const NoiseModel& noise, Rng& rng) {
    if (noise.enabled() && noise.covariance().rows() != dynamics.state_dim())
        throw ConfigError("noise covariance does not match the state dimension");
    return accumulate_subproblem(dynamics, weights, tail, K_h, x_h, &noise, &rng);
}

Vector sample_initial_state(const InitialStateDistribution& dist, Rng& rng) {
    return dist.sample(rng);
}

double induced_norm(const Matrix& X, const Matrix& W) {
    if (W.rows() != W.cols() || X.rows() != W.rows() || X.cols() != W.rows())
        throw ConfigError("induced_norm needs square X and W of the same size");
    if (!W.allFinite() || !X.allFinite()) throw ConfigError("induced_norm: non-finite input");
    Eigen::SelfAdjointEigenSolver<Matrix> es(linalg::symmetrize(W));
    const Vector& lambda = es.eigenvalues();
    if (lambda.minCoeff() < 1e-12)
        throw ConfigError("induced_norm: W is not positive definite (min eigenvalue " +
                          std::to_string(lambda.minCoeff()) + ")");
    const Matrix& V = es.eigenvectors();
    const Matrix root = V * lambda.cwiseSqrt().asDiagonal() * V.transpose();
    const Matrix inv_root = V * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * V.transpose();
    return linalg::spectral_norm(root * X * inv_root);
}

double spectral_radius(const Matrix& X) {
    if (X.rows() != X.cols() || X.size() == 0)
        throw ConfigError("spectral_radius needs a non-empty square matrix, got " + shape(X));
    if (!X.allFinite()) throw ConfigError("spectral_radius: non-finite input");
    if (X.size() == 1) return std::abs(X(0, 0));
    Eigen::EigenSolver<Matrix> es(X, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace rhpg
