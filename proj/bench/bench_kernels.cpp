// Serial reference kernels against their OpenMP counterparts.
// Run with OMP_NUM_THREADS set to compare scaling.

#include "psbrm/kernels.hpp"
#include "psbrm/mdp.hpp"
#include "psbrm/rng.hpp"

#include <map>

#include <benchmark/benchmark.h>

namespace {

using namespace psbrm;
namespace ref = kernels::reference;
namespace par = kernels::parallel;

struct Problem {
    TabularMDP mdp;
    Vector q;
    Matrix policy;
    Matrix phi;
    Matrix jacobian;
    Vector w;
};

const Problem& problem(int S)
{
    static std::map<int, Problem> cache;
    auto it = cache.find(S);
    if (it != cache.end())
        return it->second;

    constexpr int A = 4;
    constexpr int d = 16;
    Xoshiro256 rng(static_cast<std::uint64_t>(S));
    std::vector<Matrix> P(A, Matrix::Zero(S, S));
    for (auto& Pa : P) {
        for (int s = 0; s < S; ++s) {
            for (int t = 0; t < S; ++t)
                Pa(s, t) = rng.uniform();
            Pa.row(s) /= Pa.row(s).sum();
        }
    }
    Matrix R(S, A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
            R(s, a) = rng.normal();

    Problem pr{build_mdp(P, R, 0.95), Vector(S * A), Matrix(), Matrix(S * A, d), Matrix(), Vector(S * A)};
    for (Eigen::Index i = 0; i < pr.q.size(); ++i) {
        pr.q(i) = rng.normal();
        pr.w(i) = 0.5 + rng.uniform();
    }
    pr.w /= pr.w.sum();
    for (Eigen::Index i = 0; i < pr.phi.size(); ++i)
        pr.phi.data()[i] = rng.normal();
    ref::boltzmann(pr.q, 1.0, A, pr.policy);
    ref::residual_jacobian(pr.mdp, pr.policy, pr.phi, pr.jacobian);
    return cache.emplace(S, std::move(pr)).first->second;
}

template <bool Parallel>
void soft_backup(benchmark::State& state)
{
    const Problem& pr = problem(static_cast<int>(state.range(0)));
    QTable out;
    for (auto _ : state) {
        if constexpr (Parallel)
            par::soft_backup(pr.mdp, 1.0, pr.q, out);
        else
            ref::soft_backup(pr.mdp, 1.0, pr.q, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Parallel>
void boltzmann(benchmark::State& state)
{
    const Problem& pr = problem(static_cast<int>(state.range(0)));
    Matrix out;
    for (auto _ : state) {
        if constexpr (Parallel)
            par::boltzmann(pr.q, 1.0, pr.mdp.num_actions(), out);
        else
            ref::boltzmann(pr.q, 1.0, pr.mdp.num_actions(), out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Parallel>
void residual_jacobian(benchmark::State& state)
{
    const Problem& pr = problem(static_cast<int>(state.range(0)));
    Matrix out;
    for (auto _ : state) {
        if constexpr (Parallel)
            par::residual_jacobian(pr.mdp, pr.policy, pr.phi, out);
        else
            ref::residual_jacobian(pr.mdp, pr.policy, pr.phi, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Parallel>
void weighted_power_sum(benchmark::State& state)
{
    const Problem& pr = problem(static_cast<int>(state.range(0)));
    const double scale = pr.q.cwiseAbs().maxCoeff();
    for (auto _ : state) {
        double v;
        if constexpr (Parallel)
            v = par::weighted_power_sum(pr.q, pr.w, 80, scale);
        else
            v = ref::weighted_power_sum(pr.q, pr.w, 80, scale);
        benchmark::DoNotOptimize(v);
    }
}

template <bool Parallel>
void weighted_gradient(benchmark::State& state)
{
    const Problem& pr = problem(static_cast<int>(state.range(0)));
    const double scale = pr.q.cwiseAbs().maxCoeff();
    Vector out;
    for (auto _ : state) {
        if constexpr (Parallel)
            par::weighted_gradient(pr.jacobian, pr.w, pr.q, 80, scale, out);
        else
            ref::weighted_gradient(pr.jacobian, pr.w, pr.q, 80, scale, out);
        benchmark::DoNotOptimize(out.data());
    }
}

#define PSBRM_BENCH_PAIR(fn)                                                            \
    BENCHMARK_TEMPLATE(fn, false)->Name(#fn "/reference")->Arg(100)->Arg(500)->Arg(2000); \
    BENCHMARK_TEMPLATE(fn, true)->Name(#fn "/parallel")->Arg(100)->Arg(500)->Arg(2000)

PSBRM_BENCH_PAIR(soft_backup);
PSBRM_BENCH_PAIR(boltzmann);
PSBRM_BENCH_PAIR(residual_jacobian);
PSBRM_BENCH_PAIR(weighted_power_sum);
PSBRM_BENCH_PAIR(weighted_gradient);

} // namespace

BENCHMARK_MAIN();
