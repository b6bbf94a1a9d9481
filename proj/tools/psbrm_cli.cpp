// psbrm: command-line front end for the soft Bellman residual experiments.
//
// Exit codes: 0 success, 2 invalid config or arguments, 3 numerical failure,
// 4 I/O failure.

#include "psbrm/artifacts.hpp"
#include "psbrm/experiments.hpp"
#include "psbrm/mdp_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace psbrm;
using nlohmann::json;

namespace {

struct Options {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

ExperimentConfig resolve_config(const Options& opt)
{
    ExperimentConfig cfg = opt.config_path.empty() ? default_experiment_config()
                                                   : load_experiment_config(opt.config_path);
    if (opt.seed)
        cfg.phi_seed = *opt.seed;
    if (!opt.out_dir.empty())
        cfg.output_dir = opt.out_dir;
    return cfg;
}

ExperimentContext context_for(const ExperimentConfig& cfg, const Options& opt)
{
    ExperimentContext ctx = prepare_context(cfg);
    if (!opt.quiet && ctx.features.rejected_draws > 0)
        std::fprintf(stderr, "feature seed %llu was rank deficient; used seed %llu after %d redraws\n",
                     static_cast<unsigned long long>(cfg.phi_seed),
                     static_cast<unsigned long long>(ctx.features.used_seed), ctx.features.rejected_draws);
    return ctx;
}

std::string describe_c(const std::optional<double>& c)
{
    return c ? format_real(*c) : std::string("out_of_regime");
}

void print_outcome(const RunOutcome& o)
{
    const auto& last = o.trajectory.final();
    std::printf("  %-12s iters=%-6d term=%-19s err_linf=%-12.6g J_inf=%-12.6g", o.run.id.c_str(), last.iteration,
                std::string(to_string(o.trajectory.termination)).c_str(), last.err_linf, last.J_inf);
    if (o.bounds) {
        if (o.bounds->in_regime)
            std::printf(" bounds=%s", o.bounds->all_satisfied() ? "ok" : "VIOLATED");
        else
            std::printf(" bounds=out_of_regime");
    }
    std::printf("\n");
}

void print_paths(const std::vector<fs::path>& paths, const Options& opt)
{
    if (opt.quiet)
        return;
    for (const auto& p : paths)
        std::printf("wrote %s\n", p.string().c_str());
}

int cmd_solve(const Options& opt)
{
    const ExperimentConfig cfg = resolve_config(opt);
    const ExperimentContext ctx = context_for(cfg, opt);
    const std::vector<RunOutcome> outcomes = execute_runs({cfg.solve}, ctx);
    const RunOutcome& o = outcomes.front();

    const fs::path csv = cfg.output_dir / ("solve_p" + std::to_string(o.run.p) + ".csv");
    json meta = experiment_metadata(cfg, ctx);
    meta["experiment"] = "solve";
    meta["regime"] = regime_metadata(o.run.p, ctx);
    meta["termination"] = std::string(to_string(o.trajectory.termination));
    meta["diverged"] = o.trajectory.diverged;
    json theta = json::array();
    for (Eigen::Index i = 0; i < o.trajectory.final().theta.size(); ++i)
        theta.push_back(o.trajectory.final().theta(i));
    meta["final_theta"] = theta;
    write_artifact(csv, trajectory_csv(o.trajectory), meta,
                   plot_script(csv, "iteration", {"J_p", "J_inf"}, "PSBRM residual", true));
    if (!opt.quiet) {
        print_outcome(o);
        print_paths({csv}, opt);
    }
    return 0;
}

int cmd_compare(const Options& opt)
{
    const ExperimentConfig cfg = resolve_config(opt);
    const ExperimentContext ctx = context_for(cfg, opt);
    const ComparisonResult result = compute_comparison(cfg, ctx);
    const auto paths = write_comparison(result, cfg, ctx, cfg.output_dir);
    if (!opt.quiet) {
        std::printf("compare (phi seed %llu)\n", static_cast<unsigned long long>(cfg.phi_seed));
        for (const auto& o : result.outcomes)
            print_outcome(o);
    }
    print_paths(paths, opt);
    return 0;
}

int cmd_ablate(const Options& opt)
{
    const ExperimentConfig cfg = resolve_config(opt);
    const ExperimentContext ctx = context_for(cfg, opt);
    const AblationResult result = compute_ablation(cfg, ctx);
    const auto paths = write_ablation(result, cfg, ctx, cfg.output_dir);
    if (!opt.quiet) {
        std::printf("ablate (phi seed %llu)\n", static_cast<unsigned long long>(cfg.phi_seed));
        for (const auto& row : result.rows) {
            std::printf("  p=%-4d gamma_pw=%-10.6f C_p=%-14s", row.p, row.gamma_pw, describe_c(row.c_p).c_str());
            print_outcome(row.outcome);
        }
        std::printf("  final err_linf monotone in p: %s\n", final_errors_monotone(result) ? "yes" : "no");
    }
    print_paths(paths, opt);
    return 0;
}

int cmd_cp_curve(const Options& opt)
{
    const ExperimentConfig cfg = resolve_config(opt);
    // Only gamma, n and the weights matter here; no need for Q* or features.
    const TabularMDP mdp = cfg.mdp_source == "benchmark" ? benchmark_mdp() : load_mdp(cfg.mdp_source);
    const WeightVector w = cfg.weights.empty()
                               ? WeightVector::uniform(mdp.size())
                               : WeightVector(Eigen::Map<const Vector>(cfg.weights.data(), mdp.size()));
    const auto rows = cp_curve(mdp.discount(), mdp.size(), w, cfg.cp_curve.p_min, cfg.cp_curve.p_max,
                               cfg.cp_curve.num_points);

    const fs::path csv = cfg.output_dir / "cp_curve.csv";
    const json cfg_json = to_json(cfg);
    json meta = {{"tool", "psbrm"},
                 {"tool_version", PSBRM_VERSION},
                 {"experiment", "cp-curve"},
                 {"config", cfg_json},
                 {"config_hash", config_hash(cfg)},
                 {"gamma", mdp.discount()},
                 {"n", mdp.size()},
                 {"weights", cfg.weights.empty() ? "uniform" : "explicit"},
                 {"p_bar", contraction_threshold(mdp.discount(), mdp.size(), w)},
                 {"limit_C", limiting_quasi_optimality_constant(mdp.discount())}};
    write_artifact(csv, cp_curve_csv(rows), meta, plot_script(csv, "p", {"C_p"}, "C(p)", true));
    if (!opt.quiet) {
        std::printf("p_bar = %.6f, limit (1+gamma)/(1-gamma) = %.6f\n", meta["p_bar"].get<double>(),
                    meta["limit_C"].get<double>());
        if (!rows.empty())
            std::printf("C(p_max = %g) = %s\n", rows.back().p, describe_c(rows.back().c_p).c_str());
    }
    print_paths({csv}, opt);
    return 0;
}

int cmd_probe(const Options& opt)
{
    const ExperimentConfig cfg = resolve_config(opt);
    const GeneratedFeatures features = random_feature_matrix(cfg.phi_seed, cfg.phi_rows, cfg.phi_cols);
    const WeightVector w = cfg.weights.empty()
                               ? WeightVector::uniform(cfg.phi_rows)
                               : WeightVector(Eigen::Map<const Vector>(cfg.weights.data(), cfg.phi_rows));
    const ProbeResult r = expansiveness_probe(features.phi, EvenP(cfg.probe.p), w, cfg.probe.trials, cfg.probe.seed);

    const fs::path csv = cfg.output_dir / ("probe_p" + std::to_string(cfg.probe.p) + ".csv");
    const std::string text = "p,trials,skipped,max_ratio\n" + std::to_string(cfg.probe.p) + ',' +
                             std::to_string(r.trials) + ',' + std::to_string(r.skipped) + ',' +
                             format_real(r.max_ratio) + '\n';
    const json cfg_json = to_json(cfg);
    const json meta = {{"tool", "psbrm"},
                       {"tool_version", PSBRM_VERSION},
                       {"experiment", "probe-projection"},
                       {"config", cfg_json},
                       {"config_hash", config_hash(cfg)},
                       {"phi_seed_used", features.used_seed},
                       {"expansive", r.max_ratio > 1.0}};
    write_artifact(csv, text, meta, plot_script(csv, "p", {"max_ratio"}, "projection expansion", false));
    if (!opt.quiet)
        std::printf("p=%d trials=%d max ||Gamma Q - Gamma Q'|| / ||Q - Q'|| = %.12g\n", cfg.probe.p, r.trials,
                    r.max_ratio);
    print_paths({csv}, opt);
    return 0;
}

int cmd_fixed_point(const Options& opt)
{
    const ExperimentConfig cfg = resolve_config(opt);
    const TabularMDP mdp = cfg.mdp_source == "benchmark" ? benchmark_mdp() : load_mdp(cfg.mdp_source);
    const FixedPointResult fp = soft_fixed_point(mdp, Temperature(cfg.lambda), cfg.oracle_tol, cfg.oracle_max_iter);
    if (!fp.converged)
        throw NumericalError("soft value iteration did not converge within " + std::to_string(cfg.oracle_max_iter) +
                             " sweeps");

    std::string text = "state,action,q_star\n";
    for (Eigen::Index s = 0; s < mdp.num_states(); ++s)
        for (Eigen::Index a = 0; a < mdp.num_actions(); ++a)
            text += std::to_string(s) + ',' + std::to_string(a) + ',' +
                    format_real(fp.q_star(flat_index(s, a, mdp.num_actions()))) + '\n';
    const fs::path csv = cfg.output_dir / "fixed_point.csv";
    const json cfg_json = to_json(cfg);
    const json meta = {{"tool", "psbrm"},
                       {"tool_version", PSBRM_VERSION},
                       {"experiment", "fixed-point"},
                       {"config", cfg_json},
                       {"config_hash", config_hash(cfg)},
                       {"lambda", cfg.lambda},
                       {"gamma", mdp.discount()},
                       {"iterations", fp.iterations},
                       {"final_sup_gap", fp.final_sup_gap}};
    write_artifact(csv, text, meta, plot_script(csv, "state", {"q_star"}, "Q*", false));
    if (!opt.quiet)
        std::printf("converged in %d sweeps, final gap %.3g\n", fp.iterations, fp.final_sup_gap);
    print_paths({csv}, opt);
    return 0;
}

int cmd_search_seed(const Options& opt)
{
    const ExperimentConfig cfg = resolve_config(opt);
    const auto verdicts = search_adversarial_seeds(cfg);
    std::string text = "seed,l2_pvi_diverged,psbrm_stable,lp_pvi_excursion,ablation_monotone,qualifies\n";
    std::optional<std::uint64_t> first;
    for (const auto& v : verdicts) {
        text += std::to_string(v.seed) + ',' + (v.l2_pvi_diverged ? "1" : "0") + ',' + (v.psbrm_stable ? "1" : "0") +
                ',' + (v.lp_pvi_excursion ? "1" : "0") + ',' + (v.ablation_monotone ? "1" : "0") + ',' +
                (v.qualifies() ? "1" : "0") + '\n';
        if (!first && v.qualifies())
            first = v.seed;
    }
    const fs::path csv = cfg.output_dir / "seed_search.csv";
    const json cfg_json = to_json(cfg);
    const json meta = {{"tool", "psbrm"},
                       {"tool_version", PSBRM_VERSION},
                       {"experiment", "search-seed"},
                       {"config", cfg_json},
                       {"config_hash", config_hash(cfg)},
                       {"first_qualifying_seed", first ? json(*first) : json(nullptr)}};
    write_artifact(csv, text, meta, plot_script(csv, "seed", {"qualifies"}, "qualifying seeds", false));
    if (!opt.quiet) {
        if (first)
            std::printf("first qualifying seed: %llu\n", static_cast<unsigned long long>(*first));
        else
            std::printf("no qualifying seed in range\n");
    }
    print_paths({csv}, opt);
    return first ? 0 : 3;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Soft Bellman residual minimization in weighted L_p norms"};
    app.set_version_flag("--version", PSBRM_VERSION);
    app.require_subcommand(1);
    app.fallthrough();

    Options opt;
    std::uint64_t seed = 0;
    app.add_option("--config", opt.config_path, "experiment config (JSON)");
    app.add_option("--out", opt.out_dir, "output directory (overrides the config)");
    auto* seed_opt = app.add_option("--seed", seed, "feature-matrix seed (overrides the config)");
    app.add_flag("--quiet", opt.quiet, "suppress progress output");

    struct Command {
        const char* name;
        const char* help;
        int (*run)(const Options&);
    };
    const Command commands[] = {
        {"solve", "single PSBRM run", cmd_solve},
        {"compare", "PSBRM vs L2-SBRM vs projected value iteration", cmd_compare},
        {"ablate", "PSBRM over a list of exponents p", cmd_ablate},
        {"cp-curve", "quasi-optimality constant C(p) over a grid of p", cmd_cp_curve},
        {"probe-projection", "sample the Lipschitz ratio of the L_{p,w} projection", cmd_probe},
        {"fixed-point", "dump the soft-optimal Q* from value iteration", cmd_fixed_point},
        {"search-seed", "scan feature seeds for the adversarial PVI setup", cmd_search_seed},
    };
    for (const auto& c : commands)
        app.add_subcommand(c.name, c.help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (seed_opt->count() > 0)
        opt.seed = seed;

    try {
        for (const auto& c : commands)
            if (app.got_subcommand(c.name))
                return c.run(opt);
    } catch (const ValidationError& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const IoError& e) {
        std::cerr << "I/O failure: " << e.what() << '\n';
        return 4;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "I/O failure: " << e.what() << '\n';
        return 4;
    }
    return 2;
}
