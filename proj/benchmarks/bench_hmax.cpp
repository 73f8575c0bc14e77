#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "hmax/pipeline.hpp"
#include "hmax/rng.hpp"
#include "hmax/svm.hpp"

using namespace hmax;

namespace {

GrayImage noise_image(int side, uint64_t seed) {
  std::mt19937_64 g(seed);
  std::vector<uint8_t> px(static_cast<size_t>(side) * side);
  for (auto& p : px) p = static_cast<uint8_t>(bounded_draw(g, 256));
  return make_image(side, side, std::move(px));
}

const GrayImage& bench_image() {
  static const GrayImage img = noise_image(128, 1);
  return img;
}

const std::vector<SeparableKernelSet>& fixed_bank() {
  static const auto bank = make_filter_bank(Mode::kFixed);
  return bank;
}

const C1Stack<uint16_t>& bench_stack() {
  static const C1Stack<uint16_t> stack = c1_stack_fixed(bench_image(), fixed_bank());
  return stack;
}

PatchDictionary bench_dictionary(int per_size) {
  return imprint({bench_stack()}, per_size, 7);
}

FeatureMatrix random_features(size_t samples, size_t features, uint64_t seed) {
  std::mt19937_64 g(seed);
  FeatureMatrix m;
  m.samples = samples;
  m.features = features;
  m.values.resize(samples * features);
  for (auto& v : m.values) v = unit_real(g);
  return m;
}

}  // namespace

static void BM_S1Fixed(benchmark::State& state) {
  const auto& k = fixed_bank()[state.range(0) - 1];
  for (auto _ : state) {
    benchmark::DoNotOptimize(s1_apply_fixed(bench_image(), k));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_S1Fixed)->Arg(1)->Arg(8)->Arg(16);

static void BM_S1Float(benchmark::State& state) {
  static const auto bank = make_filter_bank(Mode::kFloat);
  const auto& k = bank[state.range(0) - 1];
  for (auto _ : state) {
    benchmark::DoNotOptimize(s1_apply_float(bench_image(), k));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_S1Float)->Arg(1)->Arg(8)->Arg(16);

static void BM_C1StackFixed(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(c1_stack_fixed(bench_image(), fixed_bank()));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_C1StackFixed);

static void BM_S2DistanceMap(benchmark::State& state) {
  static const PatchDictionary dict = bench_dictionary(1);  // one patch per size
  const Patch& p = dict.patches[state.range(0) - 1];
  const C1Maps<uint16_t>& band = bench_stack()[p.band - 1];
  for (auto _ : state) {
    benchmark::DoNotOptimize(s2_distance_map(band, p));
  }
}
BENCHMARK(BM_S2DistanceMap)->Arg(1)->Arg(2)->Arg(3)->Arg(4);

static void BM_C2Features(benchmark::State& state) {
  const PatchDictionary dict = bench_dictionary(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(c2_features(bench_stack(), dict));
  }
  state.SetItemsProcessed(state.iterations() * (int64_t)dict.patches.size());
}
BENCHMARK(BM_C2Features)->Arg(16)->Arg(320)->Unit(benchmark::kMillisecond);

static void BM_ExtractorThroughput(benchmark::State& state) {
  static const PatchDictionary dict = bench_dictionary(32);  // 128 patches
  std::vector<ExtractionJob> jobs;
  for (uint64_t i = 0; i < 8; ++i) jobs.push_back({i, noise_image(128, 100 + i)});
  for (auto _ : state) {
    FeatureExtractor fx(dict, Mode::kFixed, (int)state.range(0));
    benchmark::DoNotOptimize(fx.run(jobs));
  }
  state.SetItemsProcessed(state.iterations() * (int64_t)jobs.size());
}
BENCHMARK(BM_ExtractorThroughput)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_TrainBoost(benchmark::State& state) {
  static const FeatureMatrix m = random_features(100, 128, 9);
  static const std::vector<int> labels = [] {
    std::vector<int> y(100);
    for (size_t i = 0; i < y.size(); ++i) y[i] = i % 2 == 0 ? 1 : -1;
    return y;
  }();
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_gentleboost(m, labels, (int)state.range(0)));
  }
}
BENCHMARK(BM_TrainBoost)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

static void BM_TrainSvm(benchmark::State& state) {
  static const FeatureMatrix m = random_features(100, 128, 11);
  static const std::vector<int> labels = [] {
    std::vector<int> y(100);
    for (size_t i = 0; i < y.size(); ++i) y[i] = (int)(i % 4);
    return y;
  }();
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_linear_svm_ova(m, labels, 4));
  }
}
BENCHMARK(BM_TrainSvm)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  ::benchmark::Initialize(&argc, argv);
  if (::benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  ::benchmark::RunSpecifiedBenchmarks();
  ::benchmark::Shutdown();
  return 0;
}
