#include <benchmark/benchmark.h>

#include "qbm2/propagator.hpp"

namespace {

qbm2::ReducedDensity cat_density()
{
    const auto kt = qbm2::tabulate_kernels(qbm2::SpectralDensity::ohmic(2.0, 0.1, 20.0), 10.0, 1.0, 0.005);
    const auto pd = qbm2::build_propagator(qbm2::build_elementary(kt, 1.0, 2.0, 1.0), kt);
    qbm2::SuperpositionSpec sp;
    sp.L0 = 1.5;
    sp.delta = 0.5;
    sp.s = {1.0, 0.0, 0.0, 1.0};
    return qbm2::ReducedDensity(pd, qbm2::normalized(sp));
}

void BM_BuildPropagator(benchmark::State& state)
{
    const auto kt = qbm2::tabulate_kernels(qbm2::SpectralDensity::ohmic(2.0, 0.1, 20.0), 10.0, 1.0, 0.005);
    for (auto _ : state) {
        benchmark::DoNotOptimize(qbm2::build_propagator(qbm2::build_elementary(kt, 1.0, 2.0, 1.0), kt));
    }
}
BENCHMARK(BM_BuildPropagator)->Unit(benchmark::kMillisecond);

void BM_DensityLattice(benchmark::State& state)
{
    const auto rho = cat_density();
    const auto n = static_cast<std::size_t>(state.range(0));
    const qbm2::LatticeAxis ax{-4.0, 4.0, n};
    for (auto _ : state) {
        benchmark::DoNotOptimize(qbm2::sample_density(rho, {ax, ax, ax, ax}));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n * n * n));
}
BENCHMARK(BM_DensityLattice)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_WignerPoint(benchmark::State& state)
{
    const auto rho = cat_density();
    for (auto _ : state) {
        benchmark::DoNotOptimize(rho.wigner({0.1, -0.2, 0.3, 0.4}));
    }
}
BENCHMARK(BM_WignerPoint);

}  // namespace
