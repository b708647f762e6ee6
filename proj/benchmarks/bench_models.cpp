#include <benchmark/benchmark.h>

#include <cmath>

#include "rulekit/baselines.hpp"
#include "rulekit/cohort.hpp"
#include "rulekit/coxph.hpp"
#include "rulekit/eval.hpp"
#include "rulekit/rng.hpp"

using namespace rulekit;

static void BM_CoxFit(benchmark::State& state) {
  Rng rng(5);
  std::vector<SurvivalRow> rows;
  for (int64_t i = 0; i < state.range(0); ++i) {
    const double x = i % 2 ? 1.0 : 0.0;
    rows.push_back({{x, rng.bernoulli(0.5) ? 1.0 : 0.0},
                    -std::log(1.0 - rng.uniform()) / (0.002 * (1.0 + x)),
                    rng.bernoulli(0.8)});
  }
  for (auto _ : state) {
    auto model = cox_fit(rows, 0.01);
    benchmark::DoNotOptimize(model.beta.data());
  }
}
BENCHMARK(BM_CoxFit)->Arg(1018)->Arg(5000)->Unit(benchmark::kMillisecond);

static void BM_CoxFitWideDesign(benchmark::State& state) {
  // the 75-column dropped-first design of the bundled cohort
  const CategoricalDataset ds = synth_generate(brain_tumour_synth_spec(), 1018, 5);
  auto [rows, names] = survival_design(ds);
  for (auto _ : state) {
    auto model = cox_fit(rows, 0.01, names);
    benchmark::DoNotOptimize(model.beta.data());
  }
}
BENCHMARK(BM_CoxFitWideDesign)->Unit(benchmark::kMillisecond);

static void BM_RandomForestTrain(benchmark::State& state) {
  const CategoricalDataset ds = synth_generate(brain_tumour_synth_spec(), 1018, 5);
  const BinaryMatrix m = one_hot_encode(ds);
  for (auto _ : state) {
    auto model = rf_train(m, ds.label, static_cast<int>(state.range(0)), 3);
    benchmark::DoNotOptimize(model.trees.data());
  }
}
BENCHMARK(BM_RandomForestTrain)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

static void BM_LogisticTrain(benchmark::State& state) {
  const CategoricalDataset ds = synth_generate(brain_tumour_synth_spec(), 1018, 5);
  const BinaryMatrix m = one_hot_encode(ds);
  for (auto _ : state) {
    auto model = lr_train(m, ds.label, 1.0);
    benchmark::DoNotOptimize(model.weights.data());
  }
}
BENCHMARK(BM_LogisticTrain)->Unit(benchmark::kMillisecond);

static void BM_Auroc(benchmark::State& state) {
  Rng rng(9);
  std::vector<double> scores;
  std::vector<uint8_t> labels;
  for (int64_t i = 0; i < state.range(0); ++i) {
    scores.push_back(rng.uniform());
    labels.push_back(rng.bernoulli(0.5));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(auroc(scores, labels));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Auroc)->Arg(1018)->Arg(100000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
