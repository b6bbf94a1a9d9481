#include "psbrm/kernels.hpp"

#include <algorithm>

namespace psbrm::kernels::reference {

void soft_state_values(const QTable& q, double lambda, Eigen::Index num_actions, Vector& out)
{
    const Eigen::Index num_states = q.size() / num_actions;
    out.resize(num_states);
    for (Eigen::Index s = 0; s < num_states; ++s) {
        const double* row = q.data() + s * num_actions;
        const double m = *std::max_element(row, row + num_actions);
        double acc = 0.0;
        for (Eigen::Index a = 0; a < num_actions; ++a)
            acc += std::exp((row[a] - m) / lambda);
        out(s) = m + lambda * std::log(acc);
    }
}

void soft_backup(const TabularMDP& mdp, double lambda, const QTable& q, QTable& out)
{
    Vector values;
    soft_state_values(q, lambda, mdp.num_actions(), values);
    const RowMatrix& P = mdp.transitions();
    const double gamma = mdp.discount();
    out.resize(mdp.size());
    for (Eigen::Index i = 0; i < mdp.size(); ++i) {
        double expected = 0.0;
        for (Eigen::Index next = 0; next < mdp.num_states(); ++next)
            expected += P(i, next) * values(next);
        out(i) = mdp.rewards()(i) + gamma * expected;
    }
}

void boltzmann(const QTable& q, double lambda, Eigen::Index num_actions, Matrix& out)
{
    const Eigen::Index num_states = q.size() / num_actions;
    out.resize(num_states, num_actions);
    for (Eigen::Index s = 0; s < num_states; ++s) {
        const double* row = q.data() + s * num_actions;
        const double m = *std::max_element(row, row + num_actions);
        double total = 0.0;
        for (Eigen::Index a = 0; a < num_actions; ++a) {
            out(s, a) = std::exp((row[a] - m) / lambda);
            total += out(s, a);
        }
        for (Eigen::Index a = 0; a < num_actions; ++a)
            out(s, a) /= total;
    }
}

void residual_jacobian(const TabularMDP& mdp, const Matrix& policy, const Matrix& phi, Matrix& out)
{
    const Eigen::Index num_states = mdp.num_states();
    const Eigen::Index num_actions = mdp.num_actions();
    const Eigen::Index d = phi.cols();

    // expected(s', .) = sum_u pi(u | s') phi(s' * |A| + u, .)
    Matrix expected = Matrix::Zero(num_states, d);
    for (Eigen::Index s = 0; s < num_states; ++s)
        for (Eigen::Index a = 0; a < num_actions; ++a)
            for (Eigen::Index j = 0; j < d; ++j)
                expected(s, j) += policy(s, a) * phi(flat_index(s, a, num_actions), j);

    const RowMatrix& P = mdp.transitions();
    const double gamma = mdp.discount();
    out.resize(mdp.size(), d);
    for (Eigen::Index i = 0; i < mdp.size(); ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            double acc = 0.0;
            for (Eigen::Index next = 0; next < num_states; ++next)
                acc += P(i, next) * expected(next, j);
            out(i, j) = gamma * acc - phi(i, j);
        }
    }
}

double weighted_power_sum(const Vector& x, const Vector& w, int p, double scale)
{
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i)
        acc += w(i) * ipow(std::fabs(x(i) / scale), p);
    return acc;
}

double weighted_power_sum(const Vector& x, const Vector& w, double p, double scale)
{
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i)
        acc += w(i) * abs_pow(x(i) / scale, p);
    return acc;
}

void weighted_gradient(const Matrix& jacobian, const Vector& w, const Vector& delta, int p, double scale,
                       Vector& out)
{
    out = Vector::Zero(jacobian.cols());
    for (Eigen::Index i = 0; i < jacobian.rows(); ++i) {
        const double c = w(i) * ipow(delta(i) / scale, p - 1);
        for (Eigen::Index j = 0; j < jacobian.cols(); ++j)
            out(j) += c * jacobian(i, j);
    }
}

} // namespace psbrm::kernels::reference
