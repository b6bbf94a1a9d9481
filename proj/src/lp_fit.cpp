#include "psbrm/lp_fit.hpp"

#include "psbrm/kernels.hpp"

#include <Eigen/Eigenvalues>

namespace psbrm {

namespace {

constexpr double kConditionLimit = 1e12;
constexpr int kBisections = 100;

// g = sum_i w_i u_i^(p-1) phi_i
Vector scaled_gradient(const Matrix& phi, const Vector& r, const WeightVector& w, int p, double s)
{
    Vector g;
    kernels::parallel::weighted_gradient(phi, w.values(), r, p, s, g);
    return g;
}

// Sign of d/dt sum_i w_i (r_i + t b_i)^p, evaluated after dividing by max|r + t b|.
double directional_slope(const Vector& r, const Vector& b, const WeightVector& w, int p, double t)
{
    const Vector moved = r + t * b;
    const double s = sup_norm(moved);
    if (s == 0.0)
        return 0.0;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i)
        acc += w(i) * kernels::ipow(moved(i) / s, p - 1) * b(i);
    return acc;
}

// Minimizer over t >= 0 of the convex polynomial h(t) = sum_i w_i (r_i + t b_i)^p.
// Brackets by doubling from t = 1, then bisects on the sign of h'(t).
double exact_line_search(const Vector& r, const Vector& b, const WeightVector& w, int p)
{
    if (directional_slope(r, b, w, p, 0.0) >= 0.0)
        return 0.0;
    double lo = 0.0;
    double hi = 1.0;
    while (directional_slope(r, b, w, p, hi) < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12)
            return lo;
    }
    for (int i = 0; i < kBisections; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        if (directional_slope(r, b, w, p, mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

Vector weighted_least_squares(const Matrix& phi, const Vector& target, const WeightVector& w)
{
    if (phi.rows() != target.size() || phi.rows() != w.size())
        throw ValidationError("feature rows, target length and weight length must agree");
    const Matrix gram = phi.transpose() * w.values().asDiagonal() * phi;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > kConditionLimit)
        throw NumericalError("weighted Gram matrix is numerically singular");
    const Vector rhs = phi.transpose() * (w.values().asDiagonal() * target);
    return gram.ldlt().solve(rhs);
}

double lp_fit_stationarity(const Matrix& phi, const Vector& target, EvenP p, const WeightVector& w,
                           const Vector& theta)
{
    const Vector r = phi * theta - target;
    const double s = sup_norm(r);
    if (s == 0.0)
        return 0.0;
    return scaled_gradient(phi, r, w, p.value(), s).norm();
}

LpFitResult fit_lp(const Matrix& phi, const Vector& target, EvenP p, const WeightVector& w, double tol,
                   int max_iter, const Vector* warm_start)
{
    if (!(tol > 0.0))
        throw ValidationError("fit tolerance must be > 0");
    const int pe = p.value();

    LpFitResult result;
    const Vector ls = weighted_least_squares(phi, target, w);
    const double target_scale = std::max(1.0, sup_norm(target));
    if (pe == 2 || sup_norm(phi * ls - target) <= 1e-12 * target_scale) {
        result.theta = ls;
        result.stationarity = lp_fit_stationarity(phi, target, p, w, ls);
        result.converged = true;
        return result;
    }

    Vector theta = (warm_start != nullptr && warm_start->size() == phi.cols()) ? *warm_start : ls;
    const Eigen::Index d = phi.cols();

    for (int k = 0; k < max_iter; ++k) {
        const Vector r = phi * theta - target;
        const double s = sup_norm(r);
        result.iterations = k;
        if (s == 0.0) {
            result.stationarity = 0.0;
            result.converged = true;
            break;
        }
        const Vector g = scaled_gradient(phi, r, w, pe, s);
        result.stationarity = g.norm();
        if (result.stationarity <= tol) {
            result.converged = true;
            break;
        }

        // M = sum_i w_i u_i^(p-2) phi_i phi_i^T; Hessian of the scaled objective is p(p-1)/s^2 M.
        Vector curvature(r.size());
        for (Eigen::Index i = 0; i < r.size(); ++i)
            curvature(i) = w(i) * kernels::ipow(r(i) / s, pe - 2);
        Matrix M = phi.transpose() * curvature.asDiagonal() * phi;
        Eigen::SelfAdjointEigenSolver<Matrix> eig(M, Eigen::EigenvaluesOnly);
        const double hi = eig.eigenvalues().maxCoeff();
        const double lo = eig.eigenvalues().minCoeff();
        if (!(lo > 0.0) || hi / lo > kConditionLimit)
            M += (hi * 1e-12) * Matrix::Identity(d, d);
        const Vector step = -(s / static_cast<double>(pe - 1)) * M.ldlt().solve(g);

        const Vector slope_dir = phi * step;
        const double t = exact_line_search(r, slope_dir, w, pe);
        if (!(t > 0.0))
            break; // no representable decrease left
        theta += t * step;
        result.iterations = k + 1;
    }

    result.theta = theta;
    result.stationarity = lp_fit_stationarity(phi, target, p, w, theta);
    result.converged = result.stationarity <= tol;
    return result;
}

} // namespace psbrm
