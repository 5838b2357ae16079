#include <benchmark/benchmark.h>

#include <cmath>

#include "fracwsgl/corrections.hpp"
#include "fracwsgl/fode.hpp"
#include "fracwsgl/glweights.hpp"
#include "fracwsgl/problems.hpp"
#include "fracwsgl/tfpde.hpp"

using namespace fracwsgl;

static void BM_WsglWeights(benchmark::State& state) {
    const auto K = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        WSGLWeightTable g(0.37, K);
        benchmark::DoNotOptimize(g[K]);
    }
}
BENCHMARK(BM_WsglWeights)->Arg(1 << 10)->Arg(1 << 14);

static void BM_StartingWeights(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto m = static_cast<std::size_t>(state.range(1));
    const WSGLWeightTable g(0.5, n);
    const auto set = CorrectionSet::linear(m, 0.5, 1.0);
    for (auto _ : state) {
        auto w = StartingWeights::fractional(0.5, set, g, n);
        benchmark::DoNotOptimize(w.row(n).data());
    }
}
BENCHMARK(BM_StartingWeights)->Args({1 << 10, 3})->Args({1 << 12, 3})->Args({1 << 12, 8});

static void BM_FodeSolve(benchmark::State& state) {
    const auto p = problems::two_term_mittag_leffler(0.5);
    SolverConfig cfg;
    cfg.tau = std::ldexp(1.0, -static_cast<int>(state.range(0)));
    cfg.corrections = {CorrectionSet::linear(3, 0.5, 1.0)};
    for (auto _ : state) {
        auto path = solve_corrected_wsgl(p, cfg);
        benchmark::DoNotOptimize(path.values.back());
    }
}
BENCHMARK(BM_FodeSolve)->Arg(8)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);

static void BM_WaveSolve(benchmark::State& state) {
    const auto p = problems::wave_smooth(0.5);
    WaveCorrections c;
    c.sigmas = problems::wave_smooth_sigmas();
    c.m3 = 2;
    const double tau = std::ldexp(1.0, -static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto h = solve_wave(p, tau, c);
        benchmark::DoNotOptimize(h.u.back().data());
    }
}
BENCHMARK(BM_WaveSolve)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
