#include <benchmark/benchmark.h>

#include "rulekit/brl.hpp"
#include "rulekit/cohort.hpp"
#include "rulekit/frl.hpp"
#include "rulekit/rulemine.hpp"

using namespace rulekit;

namespace {

CategoricalDataset planted_cohort(size_t n) {
  SynthSpec spec = brain_tumour_synth_spec();
  spec.planted_rules = {{{{15, 0}}, 0.9}, {{{5, 0}}, 0.8}};
  spec.default_positive_prob = 0.45;
  return synth_generate(spec, n, 11);
}

}  // namespace

static void BM_BrlMcmc(benchmark::State& state) {
  const CategoricalDataset ds = planted_cohort(1018);
  const auto pool = antecedent_pool(mine_antecedents(ds, 0.10, 0.80, 2));
  BrlHyper hyper;
  hyper.chains = 1;
  hyper.iterations = static_cast<int>(state.range(0));
  hyper.burn_in = hyper.iterations / 2;
  for (auto _ : state) {
    auto posterior = mcmc_sample(ds, pool, hyper);
    benchmark::DoNotOptimize(posterior.samples.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["pool"] = static_cast<double>(pool.size());
}
BENCHMARK(BM_BrlMcmc)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

static void BM_FrlFit(benchmark::State& state) {
  const CategoricalDataset ds = planted_cohort(1018);
  const auto pool = antecedent_pool(mine_antecedents(ds, 0.10, 0.80, 2));
  FrlHyper hyper;
  hyper.iterations = static_cast<int>(state.range(0));
  hyper.restarts = 2;
  for (auto _ : state) {
    auto list = frl_fit(ds, pool, hyper);
    benchmark::DoNotOptimize(list.risks.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FrlFit)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

static void BM_BrlPredict(benchmark::State& state) {
  const CategoricalDataset ds = planted_cohort(1018);
  const auto pool = antecedent_pool(mine_antecedents(ds, 0.10, 0.80, 2));
  BrlHyper hyper;
  hyper.chains = 1;
  hyper.iterations = 2000;
  hyper.burn_in = 1000;
  const DecisionList list = brl_point(mcmc_sample(ds, pool, hyper), ds);
  size_t row = 0;
  for (auto _ : state) {
    auto p = predict(list, ds.row(row), hyper.alpha_neg, hyper.alpha_pos);
    benchmark::DoNotOptimize(p.prob);
    row = (row + 1) % ds.n_rows();
  }
}
BENCHMARK(BM_BrlPredict);
