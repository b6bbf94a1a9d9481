#pragma once

// Independent test-side oracles. Nothing here calls into the kernels under
// test; formulas are written out directly with plain loops.

#include "psbrm/experiments.hpp"
#include "psbrm/mdp.hpp"
#include "psbrm/norms.hpp"
#include "psbrm/rng.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace testing_support {

using psbrm::Matrix;
using psbrm::Vector;

/// Random MDP with Dirichlet-like rows (normalized uniforms, some zeroed).
inline psbrm::TabularMDP random_mdp(psbrm::Xoshiro256& rng, int S, int A, double gamma)
{
    std::vector<Matrix> P(static_cast<std::size_t>(A), Matrix::Zero(S, S));
    for (int a = 0; a < A; ++a)
        for (int s = 0; s < S; ++s) {
            double total = 0.0;
            for (int t = 0; t < S; ++t) {
                const double u = rng.uniform();
                P[a](s, t) = u < 0.3 ? 0.0 : u;
                total += P[a](s, t);
            }
            if (total == 0.0) {
                P[a](s, static_cast<int>(rng.below(S))) = 1.0;
                total = 1.0;
            }
            P[a].row(s) /= total;
            // Push any rounding residue onto the largest entry so the row sums to 1.
            Eigen::Index j;
            P[a].row(s).maxCoeff(&j);
            P[a](s, j) += 1.0 - P[a].row(s).sum();
        }
    Matrix R(S, A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
            R(s, a) = rng.uniform(-2.0, 2.0);
    return psbrm::build_mdp(P, R, gamma);
}

inline Vector random_vector(psbrm::Xoshiro256& rng, Eigen::Index n, double scale = 1.0)
{
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = scale * rng.normal();
    return v;
}

inline psbrm::WeightVector random_weights(psbrm::Xoshiro256& rng, Eigen::Index n)
{
    Vector w(n);
    for (Eigen::Index i = 0; i < n; ++i)
        w(i) = 0.05 + rng.uniform();
    w /= w.sum();
    return psbrm::WeightVector(w);
}

/// Soft backup written from the definition with an explicit sum over next states.
/// Unshifted log-sum-exp, so only valid for moderate Q / lambda.
inline Vector naive_soft_backup(const psbrm::TabularMDP& mdp, double lambda, const Vector& q)
{
    const Eigen::Index S = mdp.num_states();
    const Eigen::Index A = mdp.num_actions();
    std::vector<double> v(static_cast<std::size_t>(S));
    for (Eigen::Index s = 0; s < S; ++s) {
        double sum = 0.0;
        for (Eigen::Index a = 0; a < A; ++a)
            sum += std::exp(q(s * A + a) / lambda);
        v[static_cast<std::size_t>(s)] = lambda * std::log(sum);
    }
    Vector out(S * A);
    for (Eigen::Index s = 0; s < S; ++s)
        for (Eigen::Index a = 0; a < A; ++a) {
            double expect = 0.0;
            for (Eigen::Index t = 0; t < S; ++t)
                expect += mdp.transition(s, a, t) * v[static_cast<std::size_t>(t)];
            out(s * A + a) = mdp.reward(s, a) + mdp.discount() * expect;
        }
    return out;
}

/// (sum w_i |x_i|^p)^(1/p) straight from the definition.
inline double naive_weighted_norm(const Vector& x, double p, const Vector& w)
{
    double sum = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i)
        sum += w(i) * std::pow(std::fabs(x(i)), p);
    return std::pow(sum, 1.0 / p);
}

/// Central difference of a scalar function, step h_j = 1e-6 (1 + |theta_j|).
template <typename F>
Vector central_difference(F&& f, const Vector& theta)
{
    Vector g(theta.size());
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
        const double h = 1e-6 * (1.0 + std::fabs(theta(j)));
        Vector up = theta, down = theta;
        up(j) += h;
        down(j) -= h;
        g(j) = (f(up) - f(down)) / (2.0 * h);
    }
    return g;
}

/// Column-wise central difference of a vector function.
template <typename F>
Matrix central_difference_jacobian(F&& f, const Vector& theta)
{
    const Vector f0 = f(theta);
    Matrix J(f0.size(), theta.size());
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
        const double h = 1e-6 * (1.0 + std::fabs(theta(j)));
        Vector up = theta, down = theta;
        up(j) += h;
        down(j) -= h;
        J.col(j) = (f(up) - f(down)) / (2.0 * h);
    }
    return J;
}

inline double relative_l2_error(const Vector& a, const Vector& b)
{
    return (a - b).norm() / std::max(b.norm(), 1e-300);
}

/// Single-state MDP whose residual at theta = 0 under phi = I is exactly r (gamma = 0).
inline psbrm::TabularMDP bandit(const Vector& r)
{
    const auto A = r.size();
    std::vector<Matrix> P(static_cast<std::size_t>(A), Matrix::Ones(1, 1));
    return psbrm::build_mdp(P, r.transpose(), 0.0);
}

} // namespace testing_support
