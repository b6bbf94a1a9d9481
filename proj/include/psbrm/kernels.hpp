#pragma once

// Hot loops shared by every solver in the toolkit.
//
// Two implementations with identical signatures:
//   reference::  plain serial loops, the ground truth for tests;
//   parallel::   OpenMP over rows / fixed-size chunks.
//
// The parallel reductions split the index range into fixed chunks of
// kReductionChunk elements independent of the thread count, sum each chunk in
// index order and then combine the partial sums serially in chunk order. The
// result is therefore identical across runs and thread counts, and identical
// to the reference whenever n <= kReductionChunk.

#include "psbrm/mdp.hpp"

namespace psbrm::kernels {

inline constexpr Eigen::Index kReductionChunk = 1024;
// Below this many rows the OpenMP regions run on the calling thread.
inline constexpr Eigen::Index kParallelRows = 2048;

/// x^e for e >= 0 by repeated squaring.
inline double ipow(double x, int e) noexcept
{
    double result = 1.0;
    while (e > 0) {
        if (e & 1)
            result *= x;
        x *= x;
        e >>= 1;
    }
    return result;
}

/// |x|^p; repeated squaring for integer p, exp(p log|x|) otherwise.
inline double abs_pow(double x, double p) noexcept
{
    const double ax = std::fabs(x);
    if (p == std::floor(p) && p <= 1 << 20)
        return ipow(ax, static_cast<int>(p));
    if (ax == 0.0)
        return 0.0;
    return std::exp(p * std::log(ax));
}

/// Serial ground truth.
namespace reference {
void soft_state_values(const QTable& q, double lambda, Eigen::Index num_actions, Vector& out);
void soft_backup(const TabularMDP& mdp, double lambda, const QTable& q, QTable& out);
void boltzmann(const QTable& q, double lambda, Eigen::Index num_actions, Matrix& out);
void residual_jacobian(const TabularMDP& mdp, const Matrix& policy, const Matrix& phi, Matrix& out);
double weighted_power_sum(const Vector& x, const Vector& w, int p, double scale);
double weighted_power_sum(const Vector& x, const Vector& w, double p, double scale);
void weighted_gradient(const Matrix& jacobian, const Vector& w, const Vector& delta, int p, double scale,
                       Vector& out);
} // namespace reference

/// OpenMP versions used by the library.
namespace parallel {
void soft_state_values(const QTable& q, double lambda, Eigen::Index num_actions, Vector& out);
void soft_backup(const TabularMDP& mdp, double lambda, const QTable& q, QTable& out);
void boltzmann(const QTable& q, double lambda, Eigen::Index num_actions, Matrix& out);
void residual_jacobian(const TabularMDP& mdp, const Matrix& policy, const Matrix& phi, Matrix& out);
double weighted_power_sum(const Vector& x, const Vector& w, int p, double scale);
double weighted_power_sum(const Vector& x, const Vector& w, double p, double scale);
void weighted_gradient(const Matrix& jacobian, const Vector& w, const Vector& delta, int p, double scale,
                       Vector& out);
} // namespace parallel

// Semantics shared by both namespaces:
//
// soft_state_values   out(s) = lambda * log sum_u exp(q(s,u) / lambda), max-shifted.
// soft_backup         out = R + gamma * P * soft_state_values(q).
// boltzmann           out(s, a) = softmax_a(q(s, .) / lambda), |S| x |A|.
// residual_jacobian   out = gamma * P * (Pi^policy * phi) - phi, i.e. (gamma P Pi - I) phi,
//                     assembled without forming the n x n composite.
// weighted_power_sum  sum_i w_i |x_i / scale|^p (scale > 0).
// weighted_gradient   out = J^T c with c_i = w_i (delta_i / scale)^(p - 1); p - 1 odd keeps sign.

} // namespace psbrm::kernels
