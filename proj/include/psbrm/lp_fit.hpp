#pragma once

#include "psbrm/norms.hpp"

namespace psbrm {

/// Outcome of minimizing ||phi * theta - target||_{p,w}.
struct LpFitResult {
    Vector theta;
    int iterations = 0;
    /// Scale-free first-order measure, see lp_fit_stationarity.
    double stationarity = 0.0;
    bool converged = false;
};

/// theta = (phi^T W phi)^{-1} phi^T W target. Throws NumericalError when the
/// weighted Gram matrix has condition number above 1e12.
Vector weighted_least_squares(const Matrix& phi, const Vector& target, const WeightVector& w);

/// || sum_i w_i u_i^(p-1) phi_i ||_2 with u = r / ||r||_inf, r = phi * theta - target.
///
/// This is the gradient of the even-p objective after dividing the residual by
/// its sup norm. It vanishes exactly where the unscaled gradient does, and it
/// stays representable for p in the hundreds where r^(p-1) would overflow.
/// Returns 0 when r == 0.
double lp_fit_stationarity(const Matrix& phi, const Vector& target, EvenP p, const WeightVector& w,
                           const Vector& theta);

/// Newton directions on sum_i w_i (r_i / s)^p, s = ||r||_inf refreshed every
/// iteration, each followed by an exact line search (bracketing plus bisection
/// on the directional derivative). A unit Newton step on a p-th power only
/// shrinks the error by (p - 2) / (p - 1); the line search recovers the full
/// step length. When the Hessian's condition estimate exceeds
/// 1e12 a ridge of 1e-12 * lambda_max is added, which bends the step toward
/// steepest descent. Starts from `warm_start` if given, otherwise from the
/// weighted least-squares solution. Targets inside span(phi) return the exact
/// least-squares coefficients.
LpFitResult fit_lp(const Matrix& phi, const Vector& target, EvenP p, const WeightVector& w, double tol,
                   int max_iter, const Vector* warm_start = nullptr);

} // namespace psbrm
