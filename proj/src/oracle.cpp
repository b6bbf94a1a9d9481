#include "psbrm/oracle.hpp"

#include "psbrm/kernels.hpp"
#include "psbrm/lp_fit.hpp"

#include <sstream>

namespace psbrm {

FixedPointResult soft_fixed_point(const TabularMDP& mdp, Temperature lambda, double tol, int max_iter,
                                  const std::optional<QTable>& q0)
{
    if (!(tol > 0.0))
        throw ValidationError("fixed-point tolerance must be > 0");
    if (max_iter < 1)
        throw ValidationError("fixed-point iteration budget must be >= 1");
    if (q0 && q0->size() != mdp.size())
        throw ValidationError("initial Q-table has the wrong length");

    const double gamma = mdp.discount();
    const double stop_gap = gamma > 0.0 ? tol * (1.0 - gamma) / gamma : std::numeric_limits<double>::infinity();

    FixedPointResult result;
    QTable q = q0 ? *q0 : QTable::Zero(mdp.size());
    QTable next;
    for (int k = 1; k <= max_iter; ++k) {
        kernels::parallel::soft_backup(mdp, lambda.value(), q, next);
        const double gap = sup_norm(next - q);
        result.gap_trace.push_back(gap);
        q.swap(next);
        result.iterations = k;
        result.final_sup_gap = gap;
        if (gap <= stop_gap) {
            result.converged = true;
            break;
        }
    }
    result.q_star = std::move(q);
    return result;
}

Vector best_approximation(const QTable& target, const FeatureMap& phi, EvenP p, const WeightVector& w,
                          double tol, int max_iter)
{
    if (target.size() != phi.rows())
        throw ValidationError("target length does not match the feature map");
    const LpFitResult fit = fit_lp(phi.matrix(), target, p, w, tol, max_iter);
    if (!fit.converged) {
        std::ostringstream os;
        os << "best approximation (p=" << p.value() << ") stalled at stationarity " << fit.stationarity
           << " after " << fit.iterations << " Newton steps";
        throw NumericalError(os.str());
    }
    return fit.theta;
}

BoundReport make_report(double lhs, double rhs)
{
    BoundReport r;
    r.lhs = lhs;
    r.rhs = rhs;
    r.slack = rhs - lhs;
    r.satisfied = r.slack >= -1e-9 * std::max(1.0, std::fabs(rhs));
    return r;
}

std::optional<SandwichReport> check_sandwich(const Vector& theta, const TabularMDP& mdp, Temperature lambda,
                                             const FeatureMap& phi, EvenP p, const WeightVector& w,
                                             const QTable& q_star)
{
    const double rate = effective_contraction_rate(mdp.discount(), p, mdp.size(), w);
    if (rate >= 1.0)
        return std::nullopt;
    const double distance = weighted_lp_norm(phi.q(theta) - q_star, p, w);
    const double residual = weighted_lp_norm(bellman_residual(theta, mdp, lambda, phi), p, w);
    return SandwichReport{make_report((1.0 - rate) * distance, residual),
                          make_report(residual, (1.0 + rate) * distance)};
}

std::optional<QuasiOptimalityReport> check_quasi_optimality(const Vector& theta_solution, const Vector& theta_best,
                                                            const FeatureMap& phi, const QTable& q_star, EvenP p,
                                                            const WeightVector& w, double gamma_pw)
{
    if (!(gamma_pw < 1.0))
        return std::nullopt;
    const double c = (1.0 + gamma_pw) / (1.0 - gamma_pw);
    const QTable q_solution = phi.q(theta_solution);
    const QTable q_best = phi.q(theta_best);
    const double best_error = weighted_lp_norm(q_best - q_star, p, w);
    const double solution_error = weighted_lp_norm(q_solution - q_star, p, w);
    const double deviation = weighted_lp_norm(q_best - q_solution, p, w);
    return QuasiOptimalityReport{make_report(solution_error, c * best_error),
                                 make_report(deviation, (1.0 + c) * best_error)};
}

} // namespace psbrm
