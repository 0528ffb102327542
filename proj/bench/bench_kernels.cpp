// OpenMP kernels against their serial references.
//
//   OMP_NUM_THREADS=4 ./tsslab_bench

#include "tsslab/assessment.hpp"
#include "tsslab/boa.hpp"

#include <benchmark/benchmark.h>

using namespace tsslab;

namespace {

GseParams recovered_stage() { return gse_from_stage(SystemParams{}, 1.0, 0.34, 1.2); }

GridSpec small_grid()
{
    GridSpec g;
    g.n_phi = 41;
    g.n_x = 21;
    return g;
}

SweepSpec eac_boa_sweep()
{
    SweepSpec s;
    s.base.Ug2 = 0.2;
    s.base.i_rq2 = -0.93;
    s.axes = {{"i_rd2", {0.3, 0.34, 0.4, 0.45, 0.5, 0.55}}};
    s.methods = parse_methods({"eac", "boa"});
    return s;
}

void BM_grid_parallel(benchmark::State& st)
{
    const GseParams g = recovered_stage();
    for (auto _ : st)
        benchmark::DoNotOptimize(membership_grid(g, small_grid()));
}

void BM_grid_serial(benchmark::State& st)
{
    const GseParams g = recovered_stage();
    for (auto _ : st)
        benchmark::DoNotOptimize(membership_grid_serial(g, small_grid()));
}

void BM_sweep_parallel(benchmark::State& st)
{
    const SweepSpec s = eac_boa_sweep();
    for (auto _ : st)
        benchmark::DoNotOptimize(run_sweep(s, 0));
}

void BM_sweep_serial(benchmark::State& st)
{
    const SweepSpec s = eac_boa_sweep();
    for (auto _ : st)
        benchmark::DoNotOptimize(run_sweep_serial(s));
}

} // namespace

BENCHMARK(BM_grid_parallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_grid_serial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_sweep_parallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_sweep_serial)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
