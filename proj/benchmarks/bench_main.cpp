#include <benchmark/benchmark.h>

#include "crs/analysis.hpp"
#include "crs/fluid.hpp"
#include "crs/random.hpp"
#include "crs/simulator.hpp"

namespace {

crs::SbmParams table_params(std::int64_t n, int cap) {
    crs::SbmParams p;
    p.n_population = n;
    p.pi = {1.0 / 3.0, 2.0 / 3.0};
    p.lambda = crs::SquareMatrix{{2.0, 3.0}, {3.0, 4.0}};
    p.coupon_cap = cap;
    p.seed_fraction = 0.01;
    return p;
}

void BM_Binomial(benchmark::State& state) {
    crs::Rng rng(1);
    const auto n = state.range(0);
    const double p = 3.0 / static_cast<double>(n) * 10.0;
    std::int64_t acc = 0;
    for (auto _ : state) acc += crs::sample_binomial(rng, n, std::min(p, 0.5));
    benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_Binomial)->Arg(100)->Arg(10000)->Arg(1000000);

void BM_ChainRun(benchmark::State& state) {
    const auto p = table_params(state.range(0), 3);
    crs::Rng rng(7);
    for (auto _ : state) {
        const auto sizes = crs::sample_block_sizes(p, rng);
        auto traj = crs::run(p, sizes, rng);
        benchmark::DoNotOptimize(traj.n0());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ChainRun)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_GraphRun(benchmark::State& state) {
    const auto p = table_params(state.range(0), 3);
    crs::Rng rng(11);
    for (auto _ : state) {
        const auto sizes = crs::sample_block_sizes(p, rng);
        const auto g = crs::sample_adjacency(p, sizes, rng);
        auto traj = crs::run_on_graph(p, g, rng);
        benchmark::DoNotOptimize(traj.n0());
    }
}
BENCHMARK(BM_GraphRun)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Integrate(benchmark::State& state) {
    const auto p = table_params(1000, static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto path = crs::integrate(crs::initial_state(p), p);
        benchmark::DoNotOptimize(path.t0);
    }
}
BENCHMARK(BM_Integrate)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_PathDistance(benchmark::State& state) {
    const auto p = table_params(state.range(0), 3);
    crs::IntegrateOptions ode;
    ode.step = 0.25 / static_cast<double>(p.n_population);
    const auto fluid = crs::integrate(crs::initial_state(p), p, ode);
    crs::Rng rng(3);
    const auto traj = crs::run(p, crs::sample_block_sizes(p, rng), rng);
    const crs::RenormalizedPath path(traj);
    for (auto _ : state) benchmark::DoNotOptimize(crs::path_distance_l1(path, fluid));
}
BENCHMARK(BM_PathDistance)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
