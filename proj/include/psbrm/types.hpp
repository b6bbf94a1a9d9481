#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace psbrm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A Q-function stored as a flat vector, index s * num_actions + a.
using QTable = Vector;

/// Malformed input: bad shapes, non-stochastic rows, out-of-range parameters.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to produce a usable answer.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reading or writing an artifact failed.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline Eigen::Index flat_index(Eigen::Index state, Eigen::Index action, Eigen::Index num_actions)
{
    return state * num_actions + action;
}

/// Strictly positive softmax temperature.
class Temperature {
public:
    explicit Temperature(double lambda) : lambda_(lambda)
    {
        if (!(lambda > 0.0) || !std::isfinite(lambda))
            throw ValidationError("temperature must be finite and > 0, got " + std::to_string(lambda));
    }
    double value() const noexcept { return lambda_; }

private:
    double lambda_;
};

} // namespace psbrm
