#include "psbrm/kernels.hpp"

#include <algorithm>
#include <vector>

namespace psbrm::kernels::parallel {

namespace {

Eigen::Index num_chunks(Eigen::Index n)
{
    return (n + kReductionChunk - 1) / kReductionChunk;
}

// Deterministic chunked sum of term(i) over [0, n).
template <typename Term>
double chunked_sum(Eigen::Index n, Term term)
{
    const Eigen::Index chunks = num_chunks(n);
    std::vector<double> partial(static_cast<std::size_t>(chunks), 0.0);
#pragma omp parallel for schedule(static) if (n >= kParallelRows)
    for (Eigen::Index c = 0; c < chunks; ++c) {
        const Eigen::Index end = std::min(n, (c + 1) * kReductionChunk);
        double acc = 0.0;
        for (Eigen::Index i = c * kReductionChunk; i < end; ++i)
            acc += term(i);
        partial[static_cast<std::size_t>(c)] = acc;
    }
    double total = 0.0;
    for (double v : partial)
        total += v;
    return total;
}

} // namespace

void soft_state_values(const QTable& q, double lambda, Eigen::Index num_actions, Vector& out)
{
    const Eigen::Index num_states = q.size() / num_actions;
    out.resize(num_states);
#pragma omp parallel for schedule(static) if (q.size() >= kParallelRows)
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
    const Eigen::Index n = mdp.size();
    const Eigen::Index num_states = mdp.num_states();
    out.resize(n);
#pragma omp parallel for schedule(static) if (n >= kParallelRows)
    for (Eigen::Index i = 0; i < n; ++i) {
        const double* row = P.data() + i * num_states;
        double expected = 0.0;
        for (Eigen::Index next = 0; next < num_states; ++next)
            expected += row[next] * values(next);
        out(i) = mdp.rewards()(i) + gamma * expected;
    }
}

void boltzmann(const QTable& q, double lambda, Eigen::Index num_actions, Matrix& out)
{
    const Eigen::Index num_states = q.size() / num_actions;
    out.resize(num_states, num_actions);
#pragma omp parallel for schedule(static) if (q.size() >= kParallelRows)
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
    const Eigen::Index n = mdp.size();

    Matrix expected = Matrix::Zero(num_states, d);
#pragma omp parallel for schedule(static) if (n >= kParallelRows)
    for (Eigen::Index s = 0; s < num_states; ++s)
        for (Eigen::Index a = 0; a < num_actions; ++a)
            for (Eigen::Index j = 0; j < d; ++j)
                expected(s, j) += policy(s, a) * phi(flat_index(s, a, num_actions), j);

    const RowMatrix& P = mdp.transitions();
    const double gamma = mdp.discount();
    out.resize(n, d);
#pragma omp parallel for schedule(static) if (n >= kParallelRows)
    for (Eigen::Index i = 0; i < n; ++i) {
        const double* row = P.data() + i * num_states;
        for (Eigen::Index j = 0; j < d; ++j) {
            double acc = 0.0;
            for (Eigen::Index next = 0; next < num_states; ++next)
                acc += row[next] * expected(next, j);
            out(i, j) = gamma * acc - phi(i, j);
        }
    }
}

double weighted_power_sum(const Vector& x, const Vector& w, int p, double scale)
{
    return chunked_sum(x.size(), [&](Eigen::Index i) { return w(i) * ipow(std::fabs(x(i) / scale), p); });
}

double weighted_power_sum(const Vector& x, const Vector& w, double p, double scale)
{
    return chunked_sum(x.size(), [&](Eigen::Index i) { return w(i) * abs_pow(x(i) / scale, p); });
}

void weighted_gradient(const Matrix& jacobian, const Vector& w, const Vector& delta, int p, double scale,
                       Vector& out)
{
    const Eigen::Index n = jacobian.rows();
    const Eigen::Index d = jacobian.cols();
    const Eigen::Index chunks = num_chunks(n);
    Matrix partial = Matrix::Zero(d, chunks);
#pragma omp parallel for schedule(static) if (n >= kParallelRows)
    for (Eigen::Index c = 0; c < chunks; ++c) {
        const Eigen::Index end = std::min(n, (c + 1) * kReductionChunk);
        for (Eigen::Index i = c * kReductionChunk; i < end; ++i) {
            const double coeff = w(i) * ipow(delta(i) / scale, p - 1);
            for (Eigen::Index j = 0; j < d; ++j)
                partial(j, c) += coeff * jacobian(i, j);
        }
    }
    out = Vector::Zero(d);
    for (Eigen::Index c = 0; c < chunks; ++c)
        out += partial.col(c);
}

} // namespace psbrm::kernels::parallel
