#include <benchmark/benchmark.h>

#include <random>

#include "agf/agfilter.hpp"
#include "agf/attention.hpp"
#include "agf/autodiff.hpp"
#include "agf/boxfilter.hpp"

namespace {

agf::Tensor random_tensor(std::uint32_t seed, int h, int w, int c, float lo, float hi) {
  std::mt19937 rng(seed);
  agf::Tensor t(h, w, c);
  for (auto& v : t.values())
    v = lo + static_cast<float>(rng() >> 8) * (1.0f / 16777216.0f) * (hi - lo);
  return t;
}

void WindowedMean(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int radius = static_cast<int>(state.range(1));
  const agf::Tensor image = random_tensor(1, n, n, 1, 0.0f, 1.0f);
  for (auto _ : state) {
    agf::Tensor out = agf::windowed_mean(image, radius);
    benchmark::DoNotOptimize(out.values().data());
  }
  state.SetComplexityN(static_cast<std::int64_t>(n) * n);
}
BENCHMARK(WindowedMean)
    ->Args({512, 2})
    ->Args({512, 15})
    ->Args({1024, 2})
    ->Args({1024, 15})
    ->Complexity(benchmark::oN);

void IntegralBuild(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const agf::Tensor image = random_tensor(2, n, n, 1, 0.0f, 1.0f);
  for (auto _ : state) {
    agf::IntegralImage<float> integral(image);
    benchmark::DoNotOptimize(integral.rect_sum(0, n - 1, 0, n - 1, 0));
  }
  state.SetComplexityN(static_cast<std::int64_t>(n) * n);
}
BENCHMARK(IntegralBuild)->Arg(256)->Arg(512)->Arg(1024)->Complexity(benchmark::oN);

void BilinearResize(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const agf::Tensor low = random_tensor(3, n / 2, n / 2, 1, 0.0f, 1.0f);
  for (auto _ : state) {
    agf::Tensor out = agf::bilinear_resize(low, n, n);
    benchmark::DoNotOptimize(out.values().data());
  }
}
BENCHMARK(BilinearResize)->Arg(512)->Arg(1024);

void GuidedFilterUpsample(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const agf::Tensor guidance = random_tensor(4, n, n, 1, 0.0f, 1.0f);
  const agf::Tensor filtering = random_tensor(5, n / 2, n / 2, 1, 0.0f, 1.0f);
  const agf::FilterParams params;
  for (auto _ : state) {
    agf::Tensor out = agf::guided_filter(guidance, filtering, params);
    benchmark::DoNotOptimize(out.values().data());
  }
}
BENCHMARK(GuidedFilterUpsample)->Arg(256)->Arg(512)->Arg(1024);

void AttentionGuidedFilterUpsample(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const agf::Tensor guidance = random_tensor(6, n, n, 1, 0.0f, 1.0f);
  const agf::Tensor filtering = random_tensor(7, n / 2, n / 2, 1, 0.0f, 1.0f);
  const agf::AttentionWeights weights = agf::default_attention_weights(1);
  const agf::FilterParams params;
  for (auto _ : state) {
    const agf::Tensor guidance_low = agf::bilinear_resize(guidance, n / 2, n / 2);
    const agf::Tensor attention = agf::attention_block(filtering, guidance_low, weights);
    agf::Tensor out = agf::attention_guided_filter(guidance, filtering, attention, params);
    benchmark::DoNotOptimize(out.values().data());
  }
}
BENCHMARK(AttentionGuidedFilterUpsample)->Arg(256)->Arg(512);

void FilterBackward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const agf::Tensor guidance = random_tensor(8, n, n, 1, 0.0f, 1.0f);
  const agf::Tensor filtering = random_tensor(9, n / 2, n / 2, 1, 0.0f, 1.0f);
  const agf::Tensor attention = random_tensor(10, n / 2, n / 2, 1, 0.3f, 0.9f);
  const agf::Tensor upstream = random_tensor(11, n, n, 1, -1.0f, 1.0f);
  const agf::FilterParams params;
  for (auto _ : state) {
    agf::GradBundle grads =
        agf::ag_filter_vjp(guidance, filtering, attention, params, upstream);
    benchmark::DoNotOptimize(grads.d_guidance.values().data());
  }
}
BENCHMARK(FilterBackward)->Arg(128)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
