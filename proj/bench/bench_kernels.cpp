// Serial reference vs OpenMP kernels. Set OMP_NUM_THREADS to compare scaling.

#include <benchmark/benchmark.h>

#include <random>

#include "trc/conv.hpp"
#include "trc/tr_conv.hpp"
#include "trc/tr_svd.hpp"

using namespace trc;

namespace {

Tensor64 gaussian(Shape dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Tensor64 t(std::move(dims));
  for (auto& v : t.data()) v = n(rng);
  return t;
}

kernels::Exec exec_of(const benchmark::State& s) {
  return s.range(0) ? kernels::Exec::parallel : kernels::Exec::serial;
}

void BM_Conv2dDirect(benchmark::State& state) {
  const auto x = gaussian({32, 32, 64}, 1);
  const auto w = gaussian({64, 64, 3, 3}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(conv2d_direct(x, w, {1, 1}, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * 64 * 64 * 9 * 32 * 32);
}
BENCHMARK(BM_Conv2dDirect)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

void BM_TRConvolution(benchmark::State& state) {
  const auto w = gaussian({64, 64, 3, 3}, 3);
  const TRConvLayer layer(tr_svd(w, {0.3, 1, 1}), {1, 1});
  const auto x = gaussian({32, 32, 64}, 4);
  std::uint64_t macs = 0;
  for (auto _ : state) {
    auto r = tr_convolution(x, layer, exec_of(state));
    macs = r.flops.total();
    benchmark::DoNotOptimize(r);
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(macs));
}
BENCHMARK(BM_TRConvolution)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

void BM_StageConvVertical(benchmark::State& state) {
  const auto z = gaussian({32, 32, 8, 8}, 5);
  const auto core = gaussian({8, 3, 8}, 6);
  for (auto _ : state) benchmark::DoNotOptimize(stage_conv_vertical(z, core, {1, 1}, nullptr, exec_of(state)));
}
BENCHMARK(BM_StageConvVertical)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMicrosecond);

void BM_Reconstruct(benchmark::State& state) {
  const auto c = tr_svd(gaussian({64, 64, 3, 3}, 7), {0.0, 0, 1});
  for (auto _ : state) benchmark::DoNotOptimize(tr_reconstruct(c, exec_of(state)));
}
BENCHMARK(BM_Reconstruct)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMicrosecond);

void BM_RsdtrSearch(benchmark::State& state) {
  const auto w = gaussian({64, 64, 3, 3}, 8);
  SearchOptions opts;
  opts.parallel = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(rsdtr_search(w, 0.3, opts));
}
BENCHMARK(BM_RsdtrSearch)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
