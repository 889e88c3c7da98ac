#include <benchmark/benchmark.h>

#include "qbm2/coefficients.hpp"

namespace {

void BM_CoefficientTrajectory(benchmark::State& state)
{
    const double t_max = static_cast<double>(state.range(0));
    const auto kt = qbm2::tabulate_kernels(qbm2::SpectralDensity::ohmic(2.0, 0.1, 20.0), 10.0, t_max, 0.01);
    for (auto _ : state) {
        benchmark::DoNotOptimize(qbm2::coefficient_trajectory(kt, 1.0, 2.0, t_max));
    }
}
BENCHMARK(BM_CoefficientTrajectory)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace
