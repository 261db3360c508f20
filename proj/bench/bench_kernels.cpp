// Serial reference vs OpenMP kernels at the bars training shape
// (576 visible × 200 hidden, minibatch 50), plus one full CD-1 step.
// Thread count for the omp variants is the benchmark argument.

#include <benchmark/benchmark.h>

#include "capbm/kernels.hpp"
#include "capbm/learning.hpp"

using namespace capbm;
namespace k = capbm::kernels;

namespace {

constexpr Eigen::Index nv = 576, nh = 200, batch = 50;

struct Fixture {
    CapRbmParams params;
    k::Activity visible;
    k::Field field;

    Fixture() {
        Rng rng(1);
        params = random_caprbm(nv, nh, rng, 0.1);
        visible = k::random_activity(nv, batch, 2, 0.3);
        field = k::serial::hidden_field(params, visible);
    }
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

template <class Fn>
void run_with_threads(benchmark::State& state, Fn&& fn) {
    k::set_max_threads(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(fn());
}

void BM_HiddenFieldSerial(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(k::serial::hidden_field(f.params, f.visible));
}
void BM_HiddenFieldOmp(benchmark::State& state) {
    const auto& f = fixture();
    run_with_threads(state, [&] { return k::omp::hidden_field(f.params, f.visible); });
}

void BM_SampleSerial(benchmark::State& state) {
    const auto& f = fixture();
    std::uint64_t key = 0;
    for (auto _ : state) benchmark::DoNotOptimize(k::serial::sample(f.field, f.params.hidden_bias, ++key));
}
void BM_SampleOmp(benchmark::State& state) {
    const auto& f = fixture();
    std::uint64_t key = 0;
    run_with_threads(state, [&] { return k::omp::sample(f.field, f.params.hidden_bias, ++key); });
}

void BM_RateSerial(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(k::serial::rate(f.field, f.params.hidden_bias));
}
void BM_RateOmp(benchmark::State& state) {
    const auto& f = fixture();
    run_with_threads(state, [&] { return k::omp::rate(f.field, f.params.hidden_bias); });
}

void BM_StatsSerial(benchmark::State& state) {
    const auto& f = fixture();
    const auto h = k::serial::rate(f.field, f.params.hidden_bias);
    for (auto _ : state) benchmark::DoNotOptimize(k::serial::collect_stats(f.visible, h));
}
void BM_StatsOmp(benchmark::State& state) {
    const auto& f = fixture();
    const auto h = k::serial::rate(f.field, f.params.hidden_bias);
    run_with_threads(state, [&] { return k::omp::collect_stats(f.visible, h); });
}

void BM_Cd1Step(benchmark::State& state) {
    const auto& f = fixture();
    CapRbmParams p = f.params;
    TrainConfig cfg;
    Rng rng(3);
    k::set_max_threads(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(cd1_update(p, f.visible.z, cfg, rng).recon_amp_cos);
}

}  // namespace

BENCHMARK(BM_HiddenFieldSerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_HiddenFieldOmp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SampleSerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SampleOmp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_RateSerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_RateOmp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_StatsSerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_StatsOmp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Cd1Step)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
