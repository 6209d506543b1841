#include <random>

#include <benchmark/benchmark.h>

#include "mqcavity/experiments.hpp"

using namespace mqc;

namespace {

Mat randomHermitian(int n)
{
    std::mt19937 rng(7);
    std::normal_distribution<double> d;
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = cplx(d(rng), d(rng));
    return 0.5 * (m + m.adjoint());
}

void BM_Expm(benchmark::State& st)
{
    const Mat a = cplx(0, -1) * randomHermitian(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(expm(a));
}
BENCHMARK(BM_Expm)->Arg(16)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_ExpmHermitian(benchmark::State& st)
{
    const Mat h = randomHermitian(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(expmHermitian(h, 1.0));
}
BENCHMARK(BM_ExpmHermitian)->Arg(16)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

SystemParams iswapSystem()
{
    SystemParams p;
    p.g_f = 0.0118;
    return p;
}

void BM_ISwapClosed(benchmark::State& st)
{
    const SystemParams p = iswapSystem();
    ISwapOptions o;
    for (auto _ : st) benchmark::DoNotOptimize(runISwap(p, o));
}
BENCHMARK(BM_ISwapClosed)->Unit(benchmark::kMillisecond);

void BM_ISwapLossy(benchmark::State& st)
{
    const SystemParams p = iswapSystem();
    ISwapOptions o;
    o.with_losses = true;
    for (auto _ : st) benchmark::DoNotOptimize(runISwap(p, o));
}
BENCHMARK(BM_ISwapLossy)->Unit(benchmark::kMillisecond);

// one point of the ramp sweep, by chain length
void BM_RampRun(benchmark::State& st)
{
    SystemParams p;
    p.g_f = 0.07;
    p.g_q1f = p.g_q2f = 0.05;
    p.nu_q1_idle = 4.6;
    RampOptions o;
    const int n = static_cast<int>(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(rampRun(p, n, 10.0, o));
}
BENCHMARK(BM_RampRun)->Arg(1)->Arg(3)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_FftSpectrum(benchmark::State& st)
{
    std::vector<double> x(static_cast<std::size_t>(st.range(0)));
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::cos(0.3 * static_cast<double>(i));
    for (auto _ : st) benchmark::DoNotOptimize(fftSpectrum(x, 0.5));
}
BENCHMARK(BM_FftSpectrum)->Arg(500)->Arg(4096);

} // namespace

BENCHMARK_MAIN();
