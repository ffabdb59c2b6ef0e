#include <benchmark/benchmark.h>

#include <random>

#include "lanecast/pipeline.hpp"

using namespace lanecast;

namespace {

Tensor3<Real> random_input(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Tensor3<Real> t(4, 8, 30);
  for (auto& v : t.values()) v = static_cast<Real>(dist(rng));
  return t;
}

StoredModel model(ModuleKind kind, std::uint64_t seed) {
  StoredModel m{Network<Real>(NetworkConfig{.kind = kind}), Normalizer{}};
  m.network.initialize(seed);
  return m;
}

void BM_FirstConvLayer(benchmark::State& state) {
  const auto specs = trunk_specs(NetworkConfig{});
  const auto& spec = specs[0];
  std::vector<Real> w(spec.out_channels * spec.in_channels * spec.kernel_rows * spec.kernel_cols, Real{0.01});
  std::vector<Real> b(spec.out_channels, Real{0});
  const auto in = random_input(1);
  for (auto _ : state) {
    auto out = conv2d_forward<Real>(in, spec, w, b);
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_FirstConvLayer);

void BM_TrunkFeatures(benchmark::State& state) {
  const auto m = model(ModuleKind::classifier, 2);
  const auto in = random_input(3);
  for (auto _ : state) {
    auto f = m.network.features(in);
    benchmark::DoNotOptimize(f);
  }
}
BENCHMARK(BM_TrunkFeatures);

// classify then regress on one sample; the latency budget is 5 ms
void BM_PredictOneSample(benchmark::State& state) {
  const Predictor p(model(ModuleKind::classifier, 4), model(ModuleKind::regressor, 5));
  NeighborhoodTensor t;
  t.values = random_input(6);
  for (auto _ : state) {
    auto pred = p.predict(t);
    benchmark::DoNotOptimize(pred);
  }
}
BENCHMARK(BM_PredictOneSample)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
