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

#ifndef RHPG_ERRORS_HPP
#define RHPG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rhpg {

/// Invalid input: bad dimensions, missing gains, malformed config files.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A result file could not be written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure failed to produce a usable answer.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what, double residual = 0.0)
        : std::runtime_error(what), residual_(residual) {}

    /// Last residual (or offending value) seen before the failure.
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// A zeroth-order estimate produced a non-finite value.
class EstimationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// The inner policy-gradient loop left the divergence guard.
class InnerDivergence : public NumericalError {
public:
    InnerDivergence(int stage, long long iteration, double stepsize,
                    double radius, double gain_norm)
        : NumericalError("inner divergence at h=" + std::to_string(stage) +
                             ", i=" + std::to_string(iteration) +
                             ", eta=" + std::to_string(stepsize) +
                             ", r=" + std::to_string(radius) +
                             " (gain norm " + std::to_string(gain_norm) + ")",
                         gain_norm),
          stage_(stage), iteration_(iteration), stepsize_(stepsize),
          radius_(radius) {}

    int stage() const noexcept { return stage_; }
    long long iteration() const noexcept { return iteration_; }
    double stepsize() const noexcept { return stepsize_; }
    double radius() const noexcept { return radius_; }

private:
    int stage_;
    long long iteration_;
    double stepsize_;
    double radius_;
};

}  // namespace rhpg

#endif  // RHPG_ERRORS_HPP
