#pragma once

// Ground-truth quantities computed independently of the residual-minimization
// path: the soft fixed point, the best approximation in the feature span, and
// numerical checks of the error bounds that relate them.

#include "psbrm/mdp.hpp"
#include "psbrm/norms.hpp"
#include "psbrm/residual.hpp"

#include <optional>
#include <vector>

namespace psbrm {

struct FixedPointResult {
    QTable q_star;
    int iterations = 0;
    /// ||Q_{k+1} - Q_k||_inf at termination.
    double final_sup_gap = 0.0;
    bool converged = false;
    /// gap after every sweep, first entry is ||F Q_0 - Q_0||_inf.
    std::vector<double> gap_trace;
};

/// Soft value iteration Q_{k+1} = F_lambda Q_k from q0 (zero by default).
///
/// Stops once ||Q_{k+1} - Q_k||_inf <= tol (1 - gamma) / gamma, which bounds
/// ||F Q - Q||_inf at the returned iterate by tol (1 + gamma) / (1 - gamma)
/// and ||Q - Q*||_inf by tol. With gamma == 0 one sweep is exact. Exhausting
/// max_iter returns the last iterate with converged == false.
FixedPointResult soft_fixed_point(const TabularMDP& mdp, Temperature lambda, double tol, int max_iter,
                                  const std::optional<QTable>& q0 = std::nullopt);

/// argmin_theta ||phi theta - target||_{p,w}. Throws NumericalError if the
/// inner Newton solver does not reach `tol` (scale-free stationarity, see
/// lp_fit_stationarity) within its budget.
Vector best_approximation(const QTable& target, const FeatureMap& phi, EvenP p, const WeightVector& w,
                          double tol, int max_iter = 2000);

struct BoundReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0; ///< rhs - lhs
    bool satisfied = false;
};

/// satisfied iff rhs - lhs >= -1e-9 max(1, |rhs|).
BoundReport make_report(double lhs, double rhs);

struct SandwichReport {
    BoundReport lower; ///< (1 - gamma_pw) ||Q_theta - Q*||_{p,w} <= J_p(theta)
    BoundReport upper; ///< J_p(theta) <= (1 + gamma_pw) ||Q_theta - Q*||_{p,w}
};

/// Residual sandwich around the distance to Q*. Both sides are compared after
/// taking the p-th root, which orders them exactly like
/// (1 -+ gamma_pw)^p / p ||.||^p versus f_p but cannot underflow at large p.
/// nullopt when gamma_pw >= 1.
std::optional<SandwichReport> check_sandwich(const Vector& theta, const TabularMDP& mdp, Temperature lambda,
                                             const FeatureMap& phi, EvenP p, const WeightVector& w,
                                             const QTable& q_star);

struct QuasiOptimalityReport {
    /// ||Q_sol - Q*|| <= C(p) ||Q_best - Q*||
    BoundReport quasi_optimality;
    /// ||Q_best - Q_sol|| <= (1 + C(p)) ||Q_best - Q*||
    BoundReport best_comparison;
};

/// nullopt when gamma_pw >= 1. All norms are L_{p,w}.
std::optional<QuasiOptimalityReport> check_quasi_optimality(const Vector& theta_solution, const Vector& theta_best,
                                                            const FeatureMap& phi, const QTable& q_star, EvenP p,
                                                            const WeightVector& w, double gamma_pw);

} // namespace psbrm
