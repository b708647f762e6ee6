#include <benchmark/benchmark.h>

#include "rulekit/cohort.hpp"
#include "rulekit/dataset.hpp"
#include "rulekit/rulemine.hpp"

using namespace rulekit;

static void BM_SynthGenerate(benchmark::State& state) {
  const SynthSpec spec = brain_tumour_synth_spec();
  for (auto _ : state) {
    auto ds = synth_generate(spec, static_cast<size_t>(state.range(0)), 7);
    benchmark::DoNotOptimize(ds.cells.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SynthGenerate)->Arg(1018)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_OneHotEncode(benchmark::State& state) {
  const CategoricalDataset ds =
      synth_generate(brain_tumour_synth_spec(), static_cast<size_t>(state.range(0)), 7);
  for (auto _ : state) {
    auto m = one_hot_encode(ds);
    benchmark::DoNotOptimize(m.values.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_OneHotEncode)->Arg(1018)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_MineAntecedents(benchmark::State& state) {
  SynthSpec spec = brain_tumour_synth_spec();
  spec.planted_rules = {{{{15, 0}}, 0.9}};
  spec.default_positive_prob = 0.4;
  const CategoricalDataset ds = synth_generate(spec, static_cast<size_t>(state.range(0)), 7);
  for (auto _ : state) {
    auto rules = mine_antecedents(ds, 0.10, 0.80, 2);
    benchmark::DoNotOptimize(rules.data());
  }
}
BENCHMARK(BM_MineAntecedents)->Arg(1018)->Arg(5000)->Unit(benchmark::kMillisecond);

static void BM_FpGrowthDeep(benchmark::State& state) {
  // full-depth frequent-pattern growth (no cardinality cap) on cohort rows
  const CategoricalDataset ds =
      synth_generate(brain_tumour_synth_spec(), static_cast<size_t>(state.range(0)), 7);
  std::vector<Itemset> transactions;
  for (size_t r = 0; r < ds.n_rows(); ++r) {
    std::vector<Item> items;
    for (size_t f = 0; f < ds.n_features(); ++f) {
      items.push_back({static_cast<int32_t>(f), ds.category(r, f)});
    }
    transactions.push_back(Itemset::of(std::move(items)));
  }
  for (auto _ : state) {
    auto frequent = fp_growth(transactions, 0.10);
    benchmark::DoNotOptimize(frequent.data());
  }
}
BENCHMARK(BM_FpGrowthDeep)->Arg(1018)->Unit(benchmark::kMillisecond);
