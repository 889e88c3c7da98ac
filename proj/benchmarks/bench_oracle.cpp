#include <benchmark/benchmark.h>

#include "qbm2/oracle.hpp"

namespace {

qbm2::GaussianState lab_state()
{
    qbm2::GaussianState s;
    s.ordering = qbm2::Ordering::Lab;
    s.mean << 0.7, 0.2, -0.3, 0.5;
    s.cov = Eigen::Vector4d(0.5, 0.6, 0.3, 1.2).asDiagonal();
    return s;
}

void BM_ExactEvolution(benchmark::State& state)
{
    const auto modes = static_cast<std::size_t>(state.range(0));
    const auto bath = qbm2::discretize_ohmic(qbm2::SpectralDensity::ohmic(2.0, 0.1, 20.0), modes, 80.0);
    qbm2::SystemConfig cfg;
    cfg.mass = 1.0;
    cfg.omega = 2.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(qbm2::evolve_exact(bath, cfg, lab_state(), 10.0, {10.0, 0.005, 20}));
    }
}
BENCHMARK(BM_ExactEvolution)->Arg(50)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

}  // namespace
