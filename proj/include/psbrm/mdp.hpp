#pragma once

#include "psbrm/types.hpp"

#include <vector>

namespace psbrm {

/// Finite discounted MDP with expected one-step rewards R(s, a).
///
/// Transitions are held as an n x |S| row-major matrix whose row
/// s * |A| + a is the distribution P(. | s, a). Instances can only be obtained
/// through build_mdp, so every TabularMDP in circulation is validated.
class TabularMDP {
public:
    Eigen::Index num_states() const noexcept { return num_states_; }
    Eigen::Index num_actions() const noexcept { return num_actions_; }
    /// n = |S| * |A|.
    Eigen::Index size() const noexcept { return num_states_ * num_actions_; }
    double discount() const noexcept { return discount_; }

    const RowMatrix& transitions() const noexcept { return transitions_; }
    /// Flat rewards, same indexing as QTable.
    const Vector& rewards() const noexcept { return rewards_; }

    double transition(Eigen::Index s, Eigen::Index a, Eigen::Index next) const
    {
        return transitions_(flat_index(s, a, num_actions_), next);
    }
    double reward(Eigen::Index s, Eigen::Index a) const { return rewards_(flat_index(s, a, num_actions_)); }

private:
    friend TabularMDP build_mdp(const std::vector<Matrix>&, const Matrix&, double);
    TabularMDP() = default;

    Eigen::Index num_states_ = 0;
    Eigen::Index num_actions_ = 0;
    RowMatrix transitions_;
    Vector rewards_;
    double discount_ = 0.0;
};

/// Validates and assembles an MDP.
///
/// `per_action[a]` is the |S| x |S| matrix P(s' | s, a) (rows s, columns s'),
/// matching how the model is usually written down one action at a time.
/// `rewards` is |S| x |A|. Throws ValidationError naming the offending (s, a)
/// on a non-stochastic row, negative or non-finite entry, or a discount outside
/// [0, 1).
TabularMDP build_mdp(const std::vector<Matrix>& per_action, const Matrix& rewards, double discount);

inline constexpr double kStochasticTolerance = 1e-12;

/// Row-stochastic |S| x |A| matrix of action probabilities.
class PolicyMatrix {
public:
    explicit PolicyMatrix(Matrix probs);

    const Matrix& probs() const noexcept { return probs_; }
    Eigen::Index num_states() const noexcept { return probs_.rows(); }
    Eigen::Index num_actions() const noexcept { return probs_.cols(); }
    double operator()(Eigen::Index s, Eigen::Index a) const { return probs_(s, a); }

private:
    struct Unchecked {};
    PolicyMatrix(Matrix probs, Unchecked) : probs_(std::move(probs)) {}
    friend PolicyMatrix boltzmann_policy(const QTable&, Temperature, Eigen::Index);

    Matrix probs_;
};

/// (F_lambda Q)(s,a) = R(s,a) + gamma * sum_s' P(s'|s,a) * lambda * log sum_u exp(Q(s',u) / lambda),
/// evaluated in max-shifted form.
QTable soft_backup(const TabularMDP& mdp, Temperature lambda, const QTable& q);

/// Per-state soft value lambda * log sum_u exp(Q(s,u) / lambda).
Vector soft_state_values(const QTable& q, Temperature lambda, Eigen::Index num_actions);

/// Softmax of Q(s, .) / lambda for every state.
PolicyMatrix boltzmann_policy(const QTable& q, Temperature lambda, Eigen::Index num_actions);

/// Dense n x |S| matrix P with row s * |A| + a equal to P(. | s, a).
Matrix transition_operator(const TabularMDP& mdp);

/// Dense |S| x n matrix Pi with Pi(i, i * |A| + a) = pi(a | i).
Matrix policy_averaging_operator(const PolicyMatrix& policy);

} // namespace psbrm
