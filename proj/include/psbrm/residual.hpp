#pragma once

// Soft Bellman residual minimization in weighted L_p norms.

#include "psbrm/mdp.hpp"
#include "psbrm/norms.hpp"
#include "psbrm/trajectory.hpp"

#include <cstdint>
#include <optional>

namespace psbrm {

/// Full-column-rank n x d feature matrix; Q_theta = phi * theta.
class FeatureMap {
public:
    explicit FeatureMap(Matrix phi);

    const Matrix& matrix() const noexcept { return phi_; }
    Eigen::Index rows() const noexcept { return phi_.rows(); }
    Eigen::Index dim() const noexcept { return phi_.cols(); }
    QTable q(const Vector& theta) const { return phi_ * theta; }

    /// True when sigma_min > 1e-10 sigma_max and every entry is finite.
    static bool has_full_column_rank(const Matrix& phi);

private:
    Matrix phi_;
};

/// delta_theta = F_lambda(phi theta) - phi theta.
Vector bellman_residual(const Vector& theta, const TabularMDP& mdp, Temperature lambda, const FeatureMap& phi);

/// f_p(theta) = (1/p) sum_i w_i delta_i^p. May overflow to +inf for huge residuals.
double objective_fp(const Vector& theta, const TabularMDP& mdp, Temperature lambda, const FeatureMap& phi,
                    EvenP p, const WeightVector& w);

/// (gamma P Pi^{pi_theta} - I) phi, with pi_theta the Boltzmann policy of phi theta.
Matrix residual_jacobian(const Vector& theta, const TabularMDP& mdp, Temperature lambda, const FeatureMap& phi);

/// grad f_p = J^T (w .* delta^(p-1)).
Vector gradient_fp(const Vector& theta, const TabularMDP& mdp, Temperature lambda, const FeatureMap& phi,
                   EvenP p, const WeightVector& w);

/// J^T (w .* (delta / ||delta||_inf)^(p-1)), i.e. gradient_fp times ||delta||_inf^-(p-1).
/// Zero vector when delta == 0.
Vector normalized_gradient(const Vector& theta, const TabularMDP& mdp, Temperature lambda,
                           const FeatureMap& phi, EvenP p, const WeightVector& w);

struct ResidualFunctionals {
    double J_p = 0.0;       ///< ||delta||_{p,w}
    double J_inf = 0.0;     ///< ||delta||_inf
    double gap_bound = 0.0; ///< max{n^(1/p) w_max^(1/p) - 1, 1 - w_min^(1/p)} * J_inf
};

ResidualFunctionals residual_functionals(const Vector& theta, const TabularMDP& mdp, Temperature lambda,
                                         const FeatureMap& phi, EvenP p, const WeightVector& w);

enum class ThetaInit { Zero, Gaussian };

struct PsbrmConfig {
    EvenP p{80};
    Temperature lambda{1.0};
    WeightVector weights = WeightVector::uniform(1);
    double step_size = 0.1;
    /// alpha_k = step_size * step_decay^k; 1 keeps the step constant.
    double step_decay = 1.0;
    int max_iter = 10000;
    double grad_tol = 0.0;
    double residual_tol = 0.0;
    ThetaInit init = ThetaInit::Zero;
    std::uint64_t seed = 0;

    /// Throws ValidationError on a non-positive step, decay outside (0, 1],
    /// negative tolerances or negative iteration budget.
    void validate() const;
};

/// Normalized gradient descent theta_{k+1} = theta_k - alpha_k * normalized_gradient(theta_k).
///
/// Records iterations 0..K. Stops on ||normalized gradient||_2 <= grad_tol,
/// ||delta||_inf <= residual_tol (including delta == 0), max_iter updates, or a
/// non-finite residual/objective (flagged diverged). When q_star is given,
/// each record carries ||Q_theta - Q*|| in L_{p,w}, L_inf and L_{2,uniform}.
RunTrajectory run_psbrm(const TabularMDP& mdp, const FeatureMap& phi, const PsbrmConfig& config,
                        const std::optional<QTable>& q_star = std::nullopt);

} // namespace psbrm
