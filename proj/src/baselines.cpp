#include "psbrm/baselines.hpp"

#include "psbrm/lp_fit.hpp"
#include "psbrm/rng.hpp"

#include <sstream>

namespace psbrm {

Vector l2w_projection(const QTable& target, const FeatureMap& phi, const WeightVector& w)
{
    if (target.size() != phi.rows())
        throw ValidationError("projection target length does not match the feature map");
    return weighted_least_squares(phi.matrix(), target, w);
}

Vector lpw_projection(const QTable& target, const FeatureMap& phi, EvenP p, const WeightVector& w,
                      double inner_tol, const Vector* warm_start, int max_inner_iter)
{
    if (target.size() != phi.rows())
        throw ValidationError("projection target length does not match the feature map");
    const LpFitResult fit = fit_lp(phi.matrix(), target, p, w, inner_tol, max_inner_iter, warm_start);
    if (!fit.converged) {
        std::ostringstream os;
        os << "L_" << p.value() << " projection stalled at stationarity " << fit.stationarity << " after "
           << fit.iterations << " Newton steps";
        throw NumericalError(os.str());
    }
    return fit.theta;
}

void PviConfig::validate() const
{
    if (max_iter < 0)
        throw ValidationError("max_iter must be >= 0");
    if (!(divergence_threshold > 0.0))
        throw ValidationError("divergence threshold must be > 0");
    if (variant == PviVariant::Lpw && !(inner_tol > 0.0))
        throw ValidationError("inner tolerance must be > 0");
    if (max_inner_iter < 1)
        throw ValidationError("inner iteration budget must be >= 1");
}

RunTrajectory pvi_iterate(const TabularMDP& mdp, const FeatureMap& phi, const PviConfig& config,
                          const std::optional<QTable>& q0, const std::optional<QTable>& q_star)
{
    config.validate();
    if (phi.rows() != mdp.size() || config.weights.size() != mdp.size())
        throw ValidationError("feature map and weights must match the MDP size");
    if ((q0 && q0->size() != mdp.size()) || (q_star && q_star->size() != mdp.size()))
        throw ValidationError("Q-table has the wrong length");

    const WeightVector& w = config.weights;
    const EvenP p = config.p;

    auto record = [&](int k, const Vector& theta, const QTable& q, const QTable& backup) {
        IterationRecord rec;
        rec.iteration = k;
        rec.theta = theta;
        const Vector delta = backup - q;
        rec.J_inf = sup_norm(delta);
        rec.J_p = weighted_lp_norm(delta, p, w);
        rec.f_p = std::pow(rec.J_p, p.value()) / p.value();
        if (q_star) {
            const Vector err = q - *q_star;
            rec.err_pw = weighted_lp_norm(err, p, w);
            rec.err_linf = sup_norm(err);
            rec.err_l2u = uniform_l2_norm(err);
        }
        return rec;
    };

    auto project = [&](const QTable& target, const Vector& previous, int k) -> Vector {
        if (config.variant == PviVariant::L2)
            return l2w_projection(target, phi, w);
        try {
            return lpw_projection(target, phi, p, w, config.inner_tol, &previous, config.max_inner_iter);
        } catch (const NumericalError& e) {
            throw NumericalError("PVI outer iteration " + std::to_string(k) + ": " + e.what());
        }
    };

    RunTrajectory traj;
    QTable q = q0 ? *q0 : QTable::Zero(mdp.size());
    Vector theta = l2w_projection(q, phi, w);
    QTable backup = soft_backup(mdp, config.lambda, q);
    traj.records.push_back(record(0, theta, q, backup));

    for (int k = 1;; ++k) {
        if (sup_norm(q) > config.divergence_threshold || !q.allFinite()) {
            traj.termination = Termination::Diverged;
            traj.diverged = true;
            break;
        }
        if (k > config.max_iter) {
            traj.termination = Termination::MaxIterations;
            break;
        }
        theta = project(backup, theta, k);
        QTable next = phi.q(theta);
        const double step = sup_norm(next - q);
        q.swap(next);
        backup = soft_backup(mdp, config.lambda, q);
        traj.records.push_back(record(k, theta, q, backup));
        if (step <= kPviFixedPointTolerance) {
            traj.termination = Termination::FixedPointTolerance;
            break;
        }
    }
    return traj;
}

std::optional<double> projection_expansion_ratio(const FeatureMap& phi, EvenP p, const WeightVector& w,
                                                 const QTable& a, const QTable& b, double inner_tol)
{
    const double denom = weighted_lp_norm(a - b, p, w);
    if (denom == 0.0)
        return std::nullopt;
    auto project = [&](const QTable& q) -> QTable {
        if (p.value() == 2)
            return phi.q(l2w_projection(q, phi, w));
        return phi.q(lpw_projection(q, phi, p, w, inner_tol));
    };
    return weighted_lp_norm(project(a) - project(b), p, w) / denom;
}

ProbeResult expansiveness_probe(const FeatureMap& phi, EvenP p, const WeightVector& w, int num_trials,
                                std::uint64_t seed, double inner_tol)
{
    if (num_trials < 1)
        throw ValidationError("probe needs at least one trial");
    const Eigen::Index n = phi.rows();
    Xoshiro256 rng(seed);
    auto gaussian = [&](double scale) {
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i)
            v(i) = scale * rng.normal();
        return v;
    };

    ProbeResult result;
    for (int t = 0; t < num_trials; ++t) {
        const Vector a = gaussian(1.0);
        const Vector b = (t % 2 == 0) ? gaussian(1.0) : Vector(a + gaussian(1e-2));
        ++result.trials;
        const auto ratio = projection_expansion_ratio(phi, p, w, a, b, inner_tol);
        if (!ratio) {
            ++result.skipped;
            continue;
        }
        result.max_ratio = std::max(result.max_ratio, *ratio);
    }
    return result;
}

} // namespace psbrm
