#include "psbrm/residual.hpp"

#include "psbrm/kernels.hpp"
#include "psbrm/rng.hpp"

#include <Eigen/SVD>

namespace psbrm {

namespace {

void check_dims(const Vector& theta, const TabularMDP& mdp, const FeatureMap& phi)
{
    if (phi.rows() != mdp.size())
        throw ValidationError("feature map has " + std::to_string(phi.rows()) + " rows, MDP has n = " +
                              std::to_string(mdp.size()));
    if (theta.size() != phi.dim())
        throw ValidationError("parameter length " + std::to_string(theta.size()) + " does not match d = " +
                              std::to_string(phi.dim()));
}

void check_weights(const TabularMDP& mdp, const WeightVector& w)
{
    if (w.size() != mdp.size())
        throw ValidationError("weight vector length does not match n");
}

// Residual and the Boltzmann policy it was computed with; the policy is reused for the Jacobian.
struct ResidualState {
    Vector delta;
    Matrix policy;
};

ResidualState evaluate(const Vector& theta, const TabularMDP& mdp, double lambda, const FeatureMap& phi)
{
    const QTable q = phi.q(theta);
    ResidualState state;
    kernels::parallel::soft_backup(mdp, lambda, q, state.delta);
    state.delta -= q;
    if (q.allFinite())
        kernels::parallel::boltzmann(q, lambda, mdp.num_actions(), state.policy);
    return state;
}

Matrix jacobian_from(const TabularMDP& mdp, const Matrix& policy, const FeatureMap& phi)
{
    Matrix jac;
    kernels::parallel::residual_jacobian(mdp, policy, phi.matrix(), jac);
    return jac;
}

double fp_from_delta(const Vector& delta, int p, const WeightVector& w)
{
    const double s = sup_norm(delta);
    if (s == 0.0)
        return 0.0;
    const double sum = kernels::parallel::weighted_power_sum(delta, w.values(), p, s);
    return std::pow(s, p) * sum / static_cast<double>(p);
}

} // namespace

std::string_view to_string(Termination t) noexcept
{
    switch (t) {
    case Termination::GradientTolerance: return "gradient-tolerance";
    case Termination::ResidualTolerance: return "residual-tolerance";
    case Termination::FixedPointTolerance: return "fixed-point-tolerance";
    case Termination::MaxIterations: return "max-iterations";
    case Termination::Diverged: return "diverged";
    }
    return "unknown";
}

FeatureMap::FeatureMap(Matrix phi) : phi_(std::move(phi))
{
    if (phi_.cols() == 0 || phi_.cols() > phi_.rows())
        throw ValidationError("feature map must satisfy 1 <= d <= n");
    if (!has_full_column_rank(phi_))
        throw ValidationError("feature map is not of full column rank");
}

bool FeatureMap::has_full_column_rank(const Matrix& phi)
{
    if (!phi.allFinite() || phi.cols() == 0 || phi.cols() > phi.rows())
        return false;
    Eigen::JacobiSVD<Matrix> svd(phi);
    const auto& sv = svd.singularValues();
    return sv(sv.size() - 1) > 1e-10 * sv(0);
}

Vector bellman_residual(const Vector& theta, const TabularMDP& mdp, Temperature lambda, const FeatureMap& phi)
{
    check_dims(theta, mdp, phi);
    return evaluate(theta, mdp, lambda.value(), phi).delta;
}

double objective_fp(const Vector& theta, const TabularMDP& mdp, Temperature lambda, const FeatureMap& phi,
                    EvenP p, const WeightVector& w)
{
    check_dims(theta, mdp, phi);
    check_weights(mdp, w);
    return fp_from_delta(evaluate(theta, mdp, lambda.value(), phi).delta, p.value(), w);
}

Matrix residual_jacobian(const Vector& theta, const TabularMDP& mdp, Temperature lambda, const FeatureMap& phi)
{
    check_dims(theta, mdp, phi);
    const PolicyMatrix policy = boltzmann_policy(phi.q(theta), lambda, mdp.num_actions());
    return jacobian_from(mdp, policy.probs(), phi);
}

Vector gradient_fp(const Vector& theta, const TabularMDP& mdp, Temperature lambda, const FeatureMap& phi,
                   EvenP p, const WeightVector& w)
{
    check_dims(theta, mdp, phi);
    check_weights(mdp, w);
    const ResidualState state = evaluate(theta, mdp, lambda.value(), phi);
    const Matrix jac = jacobian_from(mdp, state.policy, phi);
    Vector g;
    kernels::parallel::weighted_gradient(jac, w.values(), state.delta, p.value(), 1.0, g);
    return g;
}

Vector normalized_gradient(const Vector& theta, const TabularMDP& mdp, Temperature lambda,
                           const FeatureMap& phi, EvenP p, const WeightVector& w)
{
    check_dims(theta, mdp, phi);
    check_weights(mdp, w);
    const ResidualState state = evaluate(theta, mdp, lambda.value(), phi);
    const double s = sup_norm(state.delta);
    if (s == 0.0)
        return Vector::Zero(phi.dim());
    const Matrix jac = jacobian_from(mdp, state.policy, phi);
    Vector g;
    kernels::parallel::weighted_gradient(jac, w.values(), state.delta, p.value(), s, g);
    return g;
}

ResidualFunctionals residual_functionals(const Vector& theta, const TabularMDP& mdp, Temperature lambda,
                                         const FeatureMap& phi, EvenP p, const WeightVector& w)
{
    check_dims(theta, mdp, phi);
    check_weights(mdp, w);
    const Vector delta = evaluate(theta, mdp, lambda.value(), phi).delta;
    ResidualFunctionals out;
    out.J_p = weighted_lp_norm(delta, p, w);
    out.J_inf = sup_norm(delta);
    const double inv_p = 1.0 / p.value();
    const double n = static_cast<double>(delta.size());
    const double upper = std::pow(n, inv_p) * std::pow(w.max(), inv_p) - 1.0;
    const double lower = 1.0 - std::pow(w.min(), inv_p);
    out.gap_bound = std::max(upper, lower) * out.J_inf;
    return out;
}

void PsbrmConfig::validate() const
{
    if (!(step_size > 0.0) || !std::isfinite(step_size))
        throw ValidationError("step size must be finite and > 0");
    if (!(step_decay > 0.0 && step_decay <= 1.0))
        throw ValidationError("step decay must lie in (0, 1]");
    if (max_iter < 0)
        throw ValidationError("max_iter must be >= 0");
    if (!(grad_tol >= 0.0) || !(residual_tol >= 0.0))
        throw ValidationError("tolerances must be >= 0");
}

RunTrajectory run_psbrm(const TabularMDP& mdp, const FeatureMap& phi, const PsbrmConfig& config,
                        const std::optional<QTable>& q_star)
{
    config.validate();
    check_weights(mdp, config.weights);
    if (phi.rows() != mdp.size())
        throw ValidationError("feature map rows do not match the MDP");
    if (q_star && q_star->size() != mdp.size())
        throw ValidationError("reference Q* has the wrong length");

    const int p = config.p.value();
    const double lambda = config.lambda.value();
    const WeightVector& w = config.weights;

    Vector theta = Vector::Zero(phi.dim());
    if (config.init == ThetaInit::Gaussian) {
        Xoshiro256 rng(config.seed);
        for (Eigen::Index j = 0; j < theta.size(); ++j)
            theta(j) = rng.normal();
    }

    RunTrajectory traj;
    traj.records.reserve(static_cast<std::size_t>(config.max_iter) + 1);
    double alpha = config.step_size;

    for (int k = 0;; ++k) {
        const ResidualState state = evaluate(theta, mdp, lambda, phi);
        IterationRecord rec;
        rec.iteration = k;
        rec.theta = theta;
        rec.J_inf = sup_norm(state.delta);
        rec.J_p = weighted_lp_norm(state.delta, config.p, w);
        rec.f_p = fp_from_delta(state.delta, p, w);
        if (q_star) {
            const Vector err = phi.q(theta) - *q_star;
            rec.err_pw = weighted_lp_norm(err, config.p, w);
            rec.err_linf = sup_norm(err);
            rec.err_l2u = uniform_l2_norm(err);
        }

        if (!std::isfinite(rec.J_inf) || !std::isfinite(rec.f_p) || !state.delta.allFinite()) {
            traj.records.push_back(std::move(rec));
            traj.termination = Termination::Diverged;
            traj.diverged = true;
            break;
        }
        if (rec.J_inf == 0.0 || rec.J_inf <= config.residual_tol) {
            rec.grad_norm = 0.0;
            traj.records.push_back(std::move(rec));
            traj.termination = Termination::ResidualTolerance;
            break;
        }

        const Matrix jac = jacobian_from(mdp, state.policy, phi);
        Vector direction;
        kernels::parallel::weighted_gradient(jac, w.values(), state.delta, p, rec.J_inf, direction);
        rec.grad_norm = direction.norm();
        const double grad_norm = rec.grad_norm;
        traj.records.push_back(std::move(rec));

        if (grad_norm <= config.grad_tol) {
            traj.termination = Termination::GradientTolerance;
            break;
        }
        if (k >= config.max_iter) {
            traj.termination = Termination::MaxIterations;
            break;
        }
        theta -= alpha * direction;
        alpha *= config.step_decay;
    }
    return traj;
}

} // namespace psbrm
