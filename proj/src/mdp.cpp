#include "psbrm/mdp.hpp"

#include "psbrm/kernels.hpp"

#include <sstream>

namespace psbrm {

namespace {

std::string at(Eigen::Index s, Eigen::Index a)
{
    std::ostringstream os;
    os << "(s=" << s << ", a=" << a << ")";
    return os.str();
}

} // namespace

TabularMDP build_mdp(const std::vector<Matrix>& per_action, const Matrix& rewards, double discount)
{
    if (per_action.empty())
        throw ValidationError("MDP needs at least one action");
    const Eigen::Index num_actions = static_cast<Eigen::Index>(per_action.size());
    const Eigen::Index num_states = per_action.front().rows();
    if (num_states == 0)
        throw ValidationError("MDP needs at least one state");
    if (!(discount >= 0.0 && discount < 1.0))
        throw ValidationError("discount must lie in [0, 1), got " + std::to_string(discount));
    if (rewards.rows() != num_states || rewards.cols() != num_actions)
        throw ValidationError("rewards must be |S| x |A| = " + std::to_string(num_states) + " x " +
                              std::to_string(num_actions));

    TabularMDP mdp;
    mdp.num_states_ = num_states;
    mdp.num_actions_ = num_actions;
    mdp.discount_ = discount;
    mdp.transitions_.resize(num_states * num_actions, num_states);
    mdp.rewards_.resize(num_states * num_actions);

    for (Eigen::Index a = 0; a < num_actions; ++a) {
        const Matrix& Pa = per_action[static_cast<std::size_t>(a)];
        if (Pa.rows() != num_states || Pa.cols() != num_states)
            throw ValidationError("transition matrix for action " + std::to_string(a) + " must be " +
                                  std::to_string(num_states) + " x " + std::to_string(num_states));
        for (Eigen::Index s = 0; s < num_states; ++s) {
            double row_sum = 0.0;
            for (Eigen::Index next = 0; next < num_states; ++next) {
                const double v = Pa(s, next);
                if (!std::isfinite(v))
                    throw ValidationError("non-finite transition probability at " + at(s, a));
                if (v < 0.0)
                    throw ValidationError("negative transition probability at " + at(s, a));
                row_sum += v;
            }
            if (std::fabs(row_sum - 1.0) > kStochasticTolerance) {
                std::ostringstream os;
                os.precision(17);
                os << "transition row " << at(s, a) << " sums to " << row_sum << ", expected 1";
                throw ValidationError(os.str());
            }
            mdp.transitions_.row(flat_index(s, a, num_actions)) = Pa.row(s);

            const double r = rewards(s, a);
            if (!std::isfinite(r))
                throw ValidationError("non-finite reward at " + at(s, a));
            mdp.rewards_(flat_index(s, a, num_actions)) = r;
        }
    }
    return mdp;
}

PolicyMatrix::PolicyMatrix(Matrix probs) : probs_(std::move(probs))
{
    for (Eigen::Index s = 0; s < probs_.rows(); ++s) {
        for (Eigen::Index a = 0; a < probs_.cols(); ++a)
            if (!(probs_(s, a) >= 0.0 && probs_(s, a) <= 1.0))
                throw ValidationError("policy entry outside [0, 1] at " + at(s, a));
        if (std::fabs(probs_.row(s).sum() - 1.0) > kStochasticTolerance)
            throw ValidationError("policy row " + std::to_string(s) + " does not sum to 1");
    }
}

Vector soft_state_values(const QTable& q, Temperature lambda, Eigen::Index num_actions)
{
    Vector out;
    kernels::parallel::soft_state_values(q, lambda.value(), num_actions, out);
    return out;
}

QTable soft_backup(const TabularMDP& mdp, Temperature lambda, const QTable& q)
{
    if (q.size() != mdp.size())
        throw ValidationError("Q-table length " + std::to_string(q.size()) + " does not match |S||A| = " +
                              std::to_string(mdp.size()));
    QTable out;
    kernels::parallel::soft_backup(mdp, lambda.value(), q, out);
    return out;
}

PolicyMatrix boltzmann_policy(const QTable& q, Temperature lambda, Eigen::Index num_actions)
{
    if (num_actions <= 0 || q.size() % num_actions != 0)
        throw ValidationError("Q-table length is not a multiple of the action count");
    if (!q.allFinite())
        throw ValidationError("Boltzmann policy of a non-finite Q-table");
    Matrix probs;
    kernels::parallel::boltzmann(q, lambda.value(), num_actions, probs);
    return PolicyMatrix(std::move(probs), PolicyMatrix::Unchecked{});
}

Matrix transition_operator(const TabularMDP& mdp)
{
    return mdp.transitions();
}

Matrix policy_averaging_operator(const PolicyMatrix& policy)
{
    const Eigen::Index num_states = policy.num_states();
    const Eigen::Index num_actions = policy.num_actions();
    Matrix out = Matrix::Zero(num_states, num_states * num_actions);
    for (Eigen::Index s = 0; s < num_states; ++s)
        for (Eigen::Index a = 0; a < num_actions; ++a)
            out(s, flat_index(s, a, num_actions)) = policy(s, a);
    return out;
}

} // namespace psbrm
