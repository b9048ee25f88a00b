#include <benchmark/benchmark.h>

#include <cmath>

#include "critlab/drift.hpp"
#include "critlab/heat.hpp"
#include "critlab/lorentz.hpp"
#include "critlab/solver.hpp"

using namespace critlab;

namespace {

Field bump(std::size_t n) {
    return Field::sample(Grid(8.0, n), [](double x) { return std::exp(-x * x); });
}

void BM_LorentzNorm(benchmark::State& state) {
    const Field f = bump(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(lorentz_norm(f, LorentzIndex(3.0, 2.0), Convention::double_star));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LorentzNorm)->RangeMultiplier(4)->Range(1 << 10, 1 << 18)->Complexity();

void BM_Convolve(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Field f = bump(n);
    const Field g = heat_kernel(0.1, Grid(8.0, n)).values;
    const auto method = state.range(1) ? ConvolutionMethod::fft : ConvolutionMethod::direct;
    for (auto _ : state)
        benchmark::DoNotOptimize(convolve(f, g, method));
}
BENCHMARK(BM_Convolve)->ArgsProduct({{256, 1024, 4096}, {0, 1}});

void BM_SolverStep(benchmark::State& state) {
    RunConfig cfg;
    cfg.k = 1.0;
    cfg.drift = DriftSpec::saturating(1.0, 1.0);
    cfg.u0 = bump(static_cast<std::size_t>(state.range(0)));
    const SolverState s = SolverState::initial(cfg);
    const double dt = 0.5 * cfl_limit(s, cfg);
    for (auto _ : state)
        benchmark::DoNotOptimize(step(s, cfg, dt));
}
BENCHMARK(BM_SolverStep)->RangeMultiplier(4)->Range(256, 1 << 16);

}  // namespace

BENCHMARK_MAIN();
