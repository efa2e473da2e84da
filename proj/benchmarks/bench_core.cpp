// Throughput of the per-window and per-session hot paths at recording scale.

#include <benchmark/benchmark.h>

#include <bit>

#include "lfptd/classify.hpp"
#include "lfptd/preprocess.hpp"
#include "lfptd/sdp.hpp"
#include "lfptd/synth.hpp"
#include "lfptd/validate.hpp"

using namespace lfptd;

namespace {

// First n samples of a power-of-two fGn path.
Signal fgn_prefix(std::size_t n, double hurst, std::uint64_t seed) {
  const auto full = gen_fgn(std::bit_ceil(n), hurst, seed);
  return Signal(std::vector<double>(full.values().begin(), full.values().begin() + static_cast<std::ptrdiff_t>(n)));
}

void BM_Fgn(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(gen_fgn(n, 0.85, seed++));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Fgn)->RangeMultiplier(8)->Range(1 << 14, 1 << 20)->Unit(benchmark::kMillisecond);

void BM_Bandpass(benchmark::State& state) {
  const auto x = gen_fgn(static_cast<std::size_t>(state.range(0)), 0.85, 1);
  for (auto _ : state) benchmark::DoNotOptimize(bandpass(x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Bandpass)->Arg(1 << 19)->Unit(benchmark::kMillisecond);

// One 5 s window at 1 kHz, as in validation.
void BM_Hurst(benchmark::State& state) {
  const auto x = fgn_prefix(static_cast<std::size_t>(state.range(0)), 0.7, 2);
  for (auto _ : state) benchmark::DoNotOptimize(hurst_rs(x));
}
BENCHMARK(BM_Hurst)->Arg(5000)->Arg(1 << 17)->Unit(benchmark::kMillisecond);

void BM_Lyapunov(benchmark::State& state) {
  const auto x = bandpass(fgn_prefix(static_cast<std::size_t>(state.range(0)), 0.85, 3));
  for (auto _ : state) benchmark::DoNotOptimize(lyapunov_max(x));
}
BENCHMARK(BM_Lyapunov)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_Kld1d(benchmark::State& state) {
  const auto pre = gen_fgn(1 << 19, 0.85, 4);
  const auto post = gen_fgn(1 << 19, 0.85, 5);
  for (auto _ : state) benchmark::DoNotOptimize(kld1d_score(pre, post));
}
BENCHMARK(BM_Kld1d)->Unit(benchmark::kMillisecond);

void BM_SdpTransform(benchmark::State& state) {
  const auto x = gen_fgn(1 << 16, 0.85, 6);
  for (auto _ : state) benchmark::DoNotOptimize(sdp_transform(x));
  state.SetItemsProcessed(state.iterations() * (1 << 16));
}
BENCHMARK(BM_SdpTransform)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
