#pragma once

// Experiment driver behind the command-line tool: the benchmark MDP, seeded
// feature matrices, run descriptors parsed from JSON, the comparison /
// ablation / C(p) experiments and the numerical checks of the error bounds.

#include "psbrm/baselines.hpp"
#include "psbrm/mdp.hpp"
#include "psbrm/oracle.hpp"
#include "psbrm/residual.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace psbrm {

/// The six-state, two-action cyclic benchmark MDP with gamma = 0.95.
TabularMDP benchmark_mdp();

struct GeneratedFeatures {
    FeatureMap phi;
    /// Seed that produced phi; differs from the requested seed only if earlier draws were rank deficient.
    std::uint64_t used_seed;
    int rejected_draws;
};

/// n x d standard-normal matrix from Xoshiro256(seed), filled row by row.
/// Redraws with seed + 1, seed + 2, ... until the full-column-rank check passes.
GeneratedFeatures random_feature_matrix(std::uint64_t seed, Eigen::Index n, Eigen::Index d);

enum class Algorithm { Psbrm, Pvi };

/// One solver run as written in the experiment config. Fields not used by the
/// chosen algorithm keep their defaults and are ignored.
struct RunDescriptor {
    std::string id;
    Algorithm algorithm = Algorithm::Psbrm;
    int p = 80;
    // psbrm
    double step_size = 0.1;
    double step_decay = 0.9995;
    int max_iter = 20000;
    double grad_tol = 1e-9;
    double residual_tol = 1e-12;
    ThetaInit init = ThetaInit::Zero;
    std::uint64_t seed = 0;
    // pvi
    PviVariant variant = PviVariant::L2;
    double divergence_threshold = 1e6;
    double inner_tol = 1e-10;
    int max_inner_iter = 2000;
};

struct CpCurveSpec {
    double p_min = 1.5;
    double p_max = 5000.0;
    int num_points = 200;
};

struct ProbeSpec {
    int p = 80;
    int trials = 1000;
    std::uint64_t seed = 0;
};

struct SeedSearchSpec {
    std::uint64_t first_seed = 0;
    int count = 64;
};

struct ExperimentConfig {
    /// "benchmark" or a path to an MDP JSON document.
    std::string mdp_source = "benchmark";
    std::uint64_t phi_seed = 0;
    Eigen::Index phi_rows = 12;
    Eigen::Index phi_cols = 6;
    double lambda = 1.0;
    /// Empty means uniform.
    std::vector<double> weights;
    double oracle_tol = 1e-10;
    int oracle_max_iter = 100000;
    std::filesystem::path output_dir = "out";

    std::vector<RunDescriptor> runs;
    RunDescriptor solve;
    std::vector<int> ablation_p;
    RunDescriptor ablation_run;
    CpCurveSpec cp_curve;
    ProbeSpec probe;
    SeedSearchSpec seed_search;
};

/// Parses and validates a config document. Relative MDP paths are resolved
/// against `base_dir`. Unknown keys and malformed values throw ValidationError.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Fully resolved config (defaults filled in) as JSON; parse(to_json(c)) == c.
nlohmann::json to_json(const ExperimentConfig& config);

/// The shipped benchmark setup: benchmark MDP, 12 x 6 features from the pinned seed,
/// lambda = 1, uniform weights, the four comparison runs and the p ablation.
ExperimentConfig default_experiment_config();

/// Everything the runs share.
struct ExperimentContext {
    TabularMDP mdp;
    GeneratedFeatures features;
    WeightVector weights;
    Temperature lambda;
    FixedPointResult oracle;
};

/// Loads the MDP, draws phi, and solves for Q*. Throws NumericalError if
/// value iteration does not reach the oracle tolerance.
ExperimentContext prepare_context(const ExperimentConfig& config);

PsbrmConfig make_psbrm_config(const RunDescriptor& run, const ExperimentContext& ctx);
PviConfig make_pvi_config(const RunDescriptor& run, const ExperimentContext& ctx);

/// Executes one run against the shared context, with Q* as the error reference.
RunTrajectory execute_run(const RunDescriptor& run, const ExperimentContext& ctx);

/// Numerical check of the residual sandwich along a PSBRM trajectory and of
/// the quasi-optimality and best-approximation comparison bounds at its last
/// iterate, all in L_{p,w} with the run's p.
struct BoundCheck {
    bool in_regime = false;
    double gamma_pw = 0.0;
    int points_checked = 0;
    int sandwich_violations = 0;
    /// Smallest slack seen over the trajectory.
    BoundReport tightest_lower;
    BoundReport tightest_upper;
    std::optional<QuasiOptimalityReport> final_bounds;
    /// min_theta ||Q_theta - Q*||_{p,w}
    double best_error = 0.0;

    bool all_satisfied() const;
};

BoundCheck verify_bounds(const RunDescriptor& run, const RunTrajectory& traj, const ExperimentContext& ctx);

struct RunOutcome {
    RunDescriptor run;
    RunTrajectory trajectory;
    /// Present for PSBRM runs only.
    std::optional<BoundCheck> bounds;
};

/// Runs every descriptor concurrently (one run per OpenMP task) and joins.
std::vector<RunOutcome> execute_runs(const std::vector<RunDescriptor>& runs, const ExperimentContext& ctx);

struct ComparisonResult {
    std::vector<RunOutcome> outcomes;
    const RunOutcome* find(const std::string& id) const;
};

struct AblationRow {
    int p = 0;
    double gamma_pw = 0.0;
    std::optional<double> c_p;
    RunOutcome outcome;
};

struct AblationResult {
    std::vector<AblationRow> rows;
};

ComparisonResult compute_comparison(const ExperimentConfig& config, const ExperimentContext& ctx);
AblationResult compute_ablation(const ExperimentConfig& config, const ExperimentContext& ctx);

/// Writes compare_<id>.csv (+ .meta.json, .plot.py) per run; returns the CSV paths.
std::vector<std::filesystem::path> write_comparison(const ComparisonResult& result, const ExperimentConfig& config,
                                                    const ExperimentContext& ctx, const std::filesystem::path& dir);

/// Writes ablate_p<p>.csv per p plus ablate_summary.csv; returns the CSV paths.
std::vector<std::filesystem::path> write_ablation(const AblationResult& result, const ExperimentConfig& config,
                                                  const ExperimentContext& ctx, const std::filesystem::path& dir);

struct CpRow {
    double p = 0.0;
    double gamma_pw = 0.0;
    std::optional<double> c_p;
};

/// Log-spaced grid of num_points exponents in [p_min, p_max].
std::vector<CpRow> cp_curve(double gamma, Eigen::Index n, const WeightVector& w, double p_min, double p_max,
                            int num_points);

/// Columns p,gamma_pw,C_p; out-of-regime rows carry the literal "out_of_regime".
std::string cp_curve_csv(const std::vector<CpRow>& rows);

/// Outcome for one candidate feature seed of the adversarial search.
struct SeedVerdict {
    std::uint64_t seed = 0;
    bool l2_pvi_diverged = false;
    bool psbrm_stable = false;
    bool lp_pvi_excursion = false;
    bool ablation_monotone = false;
    bool qualifies() const { return l2_pvi_diverged && psbrm_stable && lp_pvi_excursion && ablation_monotone; }
};

/// True when some error value exceeds the running minimum before it by more than 10%.
bool has_upward_excursion(const RunTrajectory& traj, double fraction = 0.10);

/// True when the final err_linf values are nonincreasing in the row order.
bool final_errors_monotone(const AblationResult& result);

/// Evaluates seed_search.count consecutive seeds starting at first_seed.
std::vector<SeedVerdict> search_adversarial_seeds(const ExperimentConfig& config);

/// FNV-1a of the resolved config with output_dir left out, so moving the
/// output does not change the hash.
std::string config_hash(const ExperimentConfig& config);

/// Metadata common to every artifact of an experiment.
nlohmann::json experiment_metadata(const ExperimentConfig& config, const ExperimentContext& ctx);

/// Regime information for exponent p under the context's gamma, n and weights.
nlohmann::json regime_metadata(double p, const ExperimentContext& ctx);

} // namespace psbrm
