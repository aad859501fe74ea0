// Serial reference kernels against their OpenMP versions. Both variants produce
// identical results, so the only difference measured is scheduling.

#include <benchmark/benchmark.h>

#include <random>

#include "sigcmp/kernels.hpp"
#include "sigcmp/power.hpp"

using namespace sigcmp;
using kernels::Exec;
using kernels::ResampleStatistic;

namespace {

std::vector<double> sample(std::size_t n) {
    std::mt19937_64 eng(n);
    std::normal_distribution<double> dist(0.1, 1.0);
    std::vector<double> x(n);
    for (auto& v : x) v = dist(eng);
    return x;
}

double sum(const std::vector<double>& x) {
    double s = 0;
    for (double v : x) s += v;
    return s;
}

template <Exec E>
void BM_SignFlipExact(benchmark::State& state) {
    const auto d = sample(static_cast<std::size_t>(state.range(0)));
    const double obs = sum(d);
    for (auto _ : state) {
        benchmark::DoNotOptimize(kernels::sign_flip_exact(d, Direction::two_sided, obs, 1e-9, E));
    }
}

template <Exec E>
void BM_SignFlipSampled(benchmark::State& state) {
    const auto d = sample(static_cast<std::size_t>(state.range(0)));
    const double obs = sum(d);
    for (auto _ : state) {
        benchmark::DoNotOptimize(kernels::sign_flip_sampled(d, Direction::two_sided, obs, 1e-9, 10000, 7, E));
    }
}

template <Exec E, ResampleStatistic S>
void BM_Bootstrap(benchmark::State& state) {
    const auto d = sample(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(kernels::bootstrap_replicates(d, S, 0.1, 10000, 7, E));
    }
}

template <Exec E>
void BM_PowerCurve(benchmark::State& state) {
    const std::vector<std::size_t> sizes{30, 100, 300};
    for (auto _ : state) {
        benchmark::DoNotOptimize(retrospective_power_mc({0.3, 1.0}, PowerTest{}, sizes, 1000, 7, E));
    }
}

}  // namespace

BENCHMARK(BM_SignFlipExact<Exec::serial>)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SignFlipExact<Exec::parallel>)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SignFlipSampled<Exec::serial>)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SignFlipSampled<Exec::parallel>)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Bootstrap<Exec::serial, ResampleStatistic::studentized_mean>)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Bootstrap<Exec::parallel, ResampleStatistic::studentized_mean>)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Bootstrap<Exec::serial, ResampleStatistic::median>)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Bootstrap<Exec::parallel, ResampleStatistic::median>)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PowerCurve<Exec::serial>)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PowerCurve<Exec::parallel>)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
