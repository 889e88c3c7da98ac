#include <benchmark/benchmark.h>

#include "qbm2/kernels.hpp"

namespace {

void BM_NoiseKernelPoint(benchmark::State& state)
{
    const auto sd = qbm2::SpectralDensity::ohmic(2.0, 0.1, 20.0);
    double s = 0.3;
    for (auto _ : state) {
        benchmark::DoNotOptimize(qbm2::noise_kernel(sd, 10.0, s));
        s += 1e-9;
    }
}
BENCHMARK(BM_NoiseKernelPoint);

void BM_TabulateKernels(benchmark::State& state)
{
    const auto sd = qbm2::SpectralDensity::ohmic(2.0, 0.1, 20.0);
    const double t_max = static_cast<double>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(qbm2::tabulate_kernels(sd, 10.0, t_max, 0.005));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(t_max / 0.005));
}
BENCHMARK(BM_TabulateKernels)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
