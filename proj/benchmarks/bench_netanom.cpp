#include <benchmark/benchmark.h>

#include "netanom/netanom.hpp"

using namespace netanom;

namespace {

// The sensitivity scenario at 5 s cadence, six links over seven days.
const TimeSeriesFrame& sensitivity_frame() {
  static const TimeSeriesFrame frame = [] {
    auto gen = gen_normal(6, kReferenceStart, 7 * 86400, 5, 1);
    TimeSeriesFrame f = std::move(gen.frame);
    for (const auto& e : sensitivity_schedule(kReferenceStart)) f = inject_anomaly(std::move(f), gen.profiles, e);
    return f;
  }();
  return frame;
}

const LabeledSplit& window_split() {
  static const LabeledSplit split = [] {
    const auto& f = sensitivity_frame();
    const auto pair = make_window_pair(f, kReferenceStart + 4 * 86400, 86400, 3600);
    return make_split(f, pair, 0.7, 1);
  }();
  return split;
}

void BM_AdaBoost(benchmark::State& state) {
  const auto& split = window_split();
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_adaboost(split, 50, static_cast<std::size_t>(state.range(0))));
  }
}
BENCHMARK(BM_AdaBoost)->Arg(1)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_MlpEpoch(benchmark::State& state) {
  const auto& split = window_split();
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(train(init_mlp(6, 1), split, cfg));
  }
}
BENCHMARK(BM_MlpEpoch)->Arg(10)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Auc(benchmark::State& state) {
  Rng rng(3);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> scores(n);
  Labels labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = rng.uniform();
    labels[i] = rng.uniform() < 0.1;
  }
  labels[0] = 1;
  labels[1] = 0;
  for (auto _ : state) benchmark::DoNotOptimize(auc(scores, labels));
}
BENCHMARK(BM_Auc)->Arg(1 << 10)->Arg(1 << 16);

void BM_ScanDay(benchmark::State& state) {
  auto cfg = ScanConfig::bdt_defaults();
  cfg.bdt.max_depth = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(scan(sensitivity_frame(), cfg));
}
BENCHMARK(BM_ScanDay)->Arg(1)->Arg(6)->Unit(benchmark::kSecond)->Iterations(1);

}  // namespace
BENCHMARK_MAIN();
