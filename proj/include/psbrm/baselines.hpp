#pragma once

// Projected value iteration baselines and a probe for projection expansiveness.
// The L2 soft residual baseline is run_psbrm with p = 2; it has no code of its own.

#include "psbrm/mdp.hpp"
#include "psbrm/norms.hpp"
#include "psbrm/residual.hpp"

#include <cstdint>
#include <optional>

namespace psbrm {

/// Weighted least-squares projection coefficients (phi^T W phi)^{-1} phi^T W q.
/// Throws NumericalError when phi^T W phi has condition estimate above 1e12.
Vector l2w_projection(const QTable& target, const FeatureMap& phi, const WeightVector& w);

/// L_{p,w} metric projection coefficients. Converges when
/// lp_fit_stationarity <= inner_tol; throws NumericalError otherwise.
Vector lpw_projection(const QTable& target, const FeatureMap& phi, EvenP p, const WeightVector& w,
                      double inner_tol, const Vector* warm_start = nullptr, int max_inner_iter = 2000);

enum class PviVariant { L2, Lpw };

struct PviConfig {
    PviVariant variant = PviVariant::L2;
    /// Projection exponent for Lpw; the L2 variant ignores it for projection
    /// but still uses it to report f_p / J_p.
    EvenP p{2};
    WeightVector weights = WeightVector::uniform(1);
    Temperature lambda{1.0};
    int max_iter = 1000;
    double divergence_threshold = 1e6;
    double inner_tol = 1e-10;
    int max_inner_iter = 2000;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Q_{k+1} = phi * project(F_lambda Q_k) starting from q0 (zero by default).
///
/// Record 0 describes q0 itself (theta is its least-squares coefficient vector);
/// record k >= 1 describes phi theta_k. Stops when ||Q_{k+1} - Q_k||_inf <= 1e-10,
/// when ||Q_k||_inf exceeds divergence_threshold (diverged), or after max_iter
/// projections. The Lpw projection is warm-started from the previous theta.
/// Inner projection failures throw NumericalError naming the outer iteration.
RunTrajectory pvi_iterate(const TabularMDP& mdp, const FeatureMap& phi, const PviConfig& config,
                          const std::optional<QTable>& q0 = std::nullopt,
                          const std::optional<QTable>& q_star = std::nullopt);

inline constexpr double kPviFixedPointTolerance = 1e-10;

struct ProbeResult {
    double max_ratio = 0.0;
    int trials = 0;
    /// Pairs skipped because Q == Q'.
    int skipped = 0;
};

/// ||Gamma a - Gamma b||_{p,w} / ||a - b||_{p,w}; nullopt when a == b.
std::optional<double> projection_expansion_ratio(const FeatureMap& phi, EvenP p, const WeightVector& w,
                                                 const QTable& a, const QTable& b, double inner_tol = 1e-12);

/// Samples pairs (Q, Q') and reports max ||Gamma Q - Gamma Q'||_{p,w} / ||Q - Q'||_{p,w}
/// for the L_{p,w} metric projection Gamma onto span(phi). Half of the pairs are
/// independent standard normals, half are a normal Q with a small normal
/// perturbation, which probes the local Lipschitz constant.
ProbeResult expansiveness_probe(const FeatureMap& phi, EvenP p, const WeightVector& w, int num_trials,
                                std::uint64_t seed, double inner_tol = 1e-12);

} // namespace psbrm
