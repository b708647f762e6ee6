// Acceptance gates for the full pipeline. Each criterion prints one pass/fail
// line; the binary exits nonzero if any gate fails. Budgets are wall-clock
// seconds and are part of the gate.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rulekit/baselines.hpp"
#include "rulekit/brl.hpp"
#include "rulekit/cohort.hpp"
#include "rulekit/coxph.hpp"
#include "rulekit/dataset.hpp"
#include "rulekit/eval.hpp"
#include "rulekit/frl.hpp"
#include "rulekit/learners.hpp"
#include "rulekit/rng.hpp"
#include "rulekit/rulemine.hpp"
#include "rulekit/stats.hpp"

#include "oracles.hpp"

using namespace rulekit;

namespace {

void check(bool condition, const std::string& message) {
  if (!condition) throw std::runtime_error(message);
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// --- 01: FP-Growth equals brute-force enumeration -----------------------------

void criterion_mining_oracle(std::ostream& log) {
  Rng rng(20240521);
  for (int trial = 0; trial < 200; ++trial) {
    const int n_items = 3 + static_cast<int>(rng.below(10));  // up to 12 distinct items
    const int n_rows = 1 + static_cast<int>(rng.below(64));
    std::vector<Itemset> transactions;
    for (int r = 0; r < n_rows; ++r) {
      std::vector<Item> items;
      for (int i = 0; i < n_items; ++i) {
        if (rng.bernoulli(0.45)) items.push_back({i, 0});
      }
      transactions.push_back(Itemset::of(std::move(items)));
    }
    const double min_support = 0.02 + 0.6 * rng.uniform();
    const auto got = fp_growth(transactions, min_support);
    const auto expected = oracles::brute_force_frequent(transactions, min_support);
    check(got.size() == expected.size(),
          "trial " + std::to_string(trial) + ": size " + std::to_string(got.size()) + " vs " +
              std::to_string(expected.size()));
    std::map<Itemset, int64_t> got_map(got.begin(), got.end());
    check(got_map == std::map<Itemset, int64_t>(expected.begin(), expected.end()),
          "trial " + std::to_string(trial) + ": itemset-count maps differ");
  }
  log << "200 datasets, exact itemset-count map equality";
}

// --- 02: BRL posterior against exhaustive enumeration ---------------------------

CategoricalDataset desk_scale_toy() {
  CategoricalDataset ds;
  ds.schema.features.push_back({"A", FeatureKind::categorical, {"0", "1"}});
  ds.schema.features.push_back({"B", FeatureKind::categorical, {"0", "1"}});
  ds.schema.features.push_back({"C", FeatureKind::categorical, {"0", "1"}});
  const std::vector<std::array<int32_t, 3>> rows = {
      {1, 1, 0}, {1, 0, 1}, {1, 1, 0}, {1, 0, 0}, {1, 1, 1}, {1, 0, 0},
      {0, 1, 1}, {0, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, 1, 0}, {0, 0, 1},
  };
  const std::vector<uint8_t> labels = {1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 1, 0};
  for (size_t r = 0; r < rows.size(); ++r) {
    for (int32_t v : rows[r]) ds.cells.push_back(v);
    ds.survival_days.push_back(labels[r] ? 500 : 100);
    ds.event_observed.push_back(1);
    ds.label.push_back(labels[r]);
  }
  return ds;
}

void enumerate_lists(size_t pool_size, const std::function<void(const std::vector<int32_t>&)>& fn) {
  std::vector<int32_t> current;
  std::vector<uint8_t> used(pool_size, 0);
  std::function<void()> recurse = [&]() {
    fn(current);
    for (size_t a = 0; a < pool_size; ++a) {
      if (used[a]) continue;
      used[a] = 1;
      current.push_back(static_cast<int32_t>(a));
      recurse();
      current.pop_back();
      used[a] = 0;
    }
  };
  recurse();
}

void criterion_brl_posterior(std::ostream& log) {
  const CategoricalDataset ds = desk_scale_toy();
  const std::vector<Itemset> pool = {Itemset::of({{0, 1}}), Itemset::of({{1, 1}}),
                                     Itemset::of({{2, 1}})};
  BrlHyper hyper;
  hyper.expected_list_length = 1.0;
  hyper.chains = 3;
  hyper.iterations = 30000;
  hyper.burn_in = 15000;
  hyper.thin = 10;
  hyper.seed = 7;

  // exact posterior over all 16 enumerable lists
  std::map<std::vector<int32_t>, double> log_post;
  enumerate_lists(pool.size(), [&](const std::vector<int32_t>& ids) {
    DecisionList d;
    for (int32_t id : ids) d.antecedents.push_back(pool[static_cast<size_t>(id)]);
    populate_counts(d, ds);
    log_post[ids] =
        log_prior(d, pool, hyper) + log_likelihood(d, ds, hyper.alpha_neg, hyper.alpha_pos);
  });
  check(log_post.size() == 16, "expected 16 enumerable lists");
  std::vector<double> values;
  for (const auto& [ids, lp] : log_post) values.push_back(lp);
  const double log_z = log_sum_exp(values);
  std::map<std::vector<int32_t>, double> exact;
  for (const auto& [ids, lp] : log_post) exact[ids] = std::exp(lp - log_z);

  const BrlPosterior posterior = mcmc_sample(ds, pool, hyper);
  std::map<std::vector<int32_t>, double> empirical;
  for (const BrlSample& s : posterior.samples) {
    empirical[s.antecedent_ids] += 1.0 / static_cast<double>(posterior.samples.size());
  }
  double tv = 0.0;
  for (const auto& [ids, p] : exact) {
    const auto it = empirical.find(ids);
    tv += std::fabs(p - (it == empirical.end() ? 0.0 : it->second));
  }
  for (const auto& [ids, p] : empirical) {
    if (!exact.count(ids)) tv += p;
  }
  tv *= 0.5;
  check(tv <= 0.05, "total variation " + fmt(tv) + " exceeds 0.05");

  // enumerated constrained MAP: posterior-mean length (rounded), cardinality
  // window, then the highest-posterior list
  double mean_len = 0.0, mean_card = 0.0;
  for (const auto& [ids, p] : exact) {
    mean_len += p * static_cast<double>(ids.size());
    mean_card += p * (ids.empty() ? 0.0 : 1.0);  // every pool antecedent has cardinality 1
  }
  const auto target_len = static_cast<size_t>(std::llround(mean_len));
  const std::vector<int32_t>* map_ids = nullptr;
  double best_lp = 0.0;
  for (const auto& [ids, lp] : log_post) {
    if (ids.size() != target_len) continue;
    const double avg_card = ids.empty() ? 0.0 : 1.0;
    if (std::fabs(avg_card - mean_card) > 0.5) continue;
    if (!map_ids || lp > best_lp) {
      map_ids = &ids;
      best_lp = lp;
    }
  }
  check(map_ids != nullptr, "no list matches the enumerated constrained-MAP filter");

  const DecisionList point = brl_point(posterior, ds);
  std::vector<Itemset> expected_antecedents;
  for (int32_t id : *map_ids) expected_antecedents.push_back(pool[static_cast<size_t>(id)]);
  check(point.antecedents == expected_antecedents,
        "brl_point disagrees with the enumerated constrained MAP");
  log << "TV " << fmt(tv) << " <= 0.05 over 16 lists; point estimate matches the enumerated MAP";
}

// --- 03: BRL predictive closed form -----------------------------------------------

void criterion_brl_predictive(std::ostream& log) {
  Rng rng(99);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int64_t n0 = static_cast<int64_t>(rng.below(250));
    const int64_t n1 = static_cast<int64_t>(rng.below(250));
    DecisionList d;
    d.counts.assign(1, {n0, n1});
    const std::vector<int32_t> row = {};
    const BrlPrediction p = predict(d, row, 1.0, 1.0);
    const double expected_mean =
        static_cast<double>(n1 + 1) / static_cast<double>(n0 + n1 + 2);
    check(std::fabs(p.prob - expected_mean) < 1e-9, "posterior mean formula violated");
    const double lo = oracles::beta_quantile_quadrature(static_cast<double>(n1 + 1),
                                                        static_cast<double>(n0 + 1), 0.025);
    const double hi = oracles::beta_quantile_quadrature(static_cast<double>(n1 + 1),
                                                        static_cast<double>(n0 + 1), 0.975);
    worst = std::max({worst, std::fabs(p.ci_low - lo), std::fabs(p.ci_high - hi)});
  }
  check(worst < 1e-9, "credible interval deviates from the quadrature oracle by " + fmt(worst, 12));
  log << "100 count pairs; worst interval deviation " << fmt(worst, 12);
}

// --- 04: FRL monotonicity fuzz -------------------------------------------------------

void criterion_frl_monotonicity(std::ostream& log) {
  SynthSpec spec = brain_tumour_synth_spec();
  int violations = 0;
  for (uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(4000 + seed);
    spec.planted_rules.clear();
    // plant one or two random single-item rules with random rates
    const int n_rules = 1 + static_cast<int>(rng.below(2));
    for (int k = 0; k < n_rules; ++k) {
      const auto f = static_cast<int32_t>(rng.below(spec.schema.features.size()));
      const auto c = static_cast<int32_t>(
          rng.below(spec.schema.features[static_cast<size_t>(f)].categories.size()));
      spec.planted_rules.push_back({{{f, c}}, rng.uniform()});
    }
    spec.default_positive_prob = 0.2 + 0.6 * rng.uniform();
    const CategoricalDataset ds = synth_generate(spec, 300, 7000 + seed);

    const auto pool = antecedent_pool(mine_antecedents(ds, 0.10, 0.55, 2));
    if (pool.empty()) continue;
    FrlHyper hyper;
    hyper.iterations = 1500;
    hyper.restarts = 2;
    hyper.seed = seed;
    const FallingRuleList fitted = frl_fit(ds, pool, hyper);
    if (!fitted.monotone()) ++violations;
    int64_t total = 0;
    for (int64_t s : fitted.supports) total += s;
    check(total == static_cast<int64_t>(ds.n_rows()), "supports do not partition the rows");
  }
  check(violations == 0, std::to_string(violations) + " monotonicity violations");
  log << "50 fuzz-seeded fits, zero violations";
}

// --- 05: planted-rule recovery at cohort scale -----------------------------------------

void criterion_planted_recovery(std::ostream& log) {
  SynthSpec spec = brain_tumour_synth_spec();
  const int morphology = spec.schema.feature_index("Morphology");
  const int kp = spec.schema.feature_index("KP Score");
  const int diagnosis = spec.schema.feature_index("Diagnosis");
  spec.planted_rules = {
      {{{morphology, 0}}, 0.9},  // Heterogenous
      {{{kp, 0}}, 0.8},          // KP Score 100
      {{{diagnosis, 0}}, 0.2},   // Glioma Malignant
  };
  spec.default_positive_prob = 0.45;
  spec.censor_prob_given_survivor = 0.3;
  const CategoricalDataset cohort = synth_generate(spec, 1018, 20240608);

  RuleLearnerOptions options;  // mining thresholds at their 0.10 / 0.80 defaults

  BrlHyper brl_hyper;
  brl_hyper.chains = 1;
  brl_hyper.iterations = 3000;
  brl_hyper.burn_in = 1500;
  const EvalReport brl_report =
      nested_cv(make_brl_learner(brl_hyper, options), cohort, 3, 5, 3, 11, 2);

  FrlHyper frl_hyper;
  frl_hyper.iterations = 3000;
  frl_hyper.restarts = 2;
  const EvalReport frl_report =
      nested_cv(make_frl_learner(frl_hyper, options), cohort, 3, 5, 3, 11, 2);

  const EvalReport rf_report = nested_cv(make_rf_learner(), cohort, 3, 5, 3, 11, 2);

  check(brl_report.runs.size() == 15 && frl_report.runs.size() == 15 &&
            rf_report.runs.size() == 15,
        "expected 15 runs per model");
  check(brl_report.acc_mean >= 0.75,
        "BRL mean accuracy " + fmt(brl_report.acc_mean) + " below 0.75");
  check(frl_report.acc_mean >= 0.75,
        "FRL mean accuracy " + fmt(frl_report.acc_mean) + " below 0.75");
  check(rf_report.auroc_mean.has_value() && frl_report.auroc_mean.has_value(),
        "missing AUROC aggregates");
  const double gap = *rf_report.auroc_mean - *frl_report.auroc_mean;
  check(gap <= 0.08, "RF-FRL AUROC gap " + fmt(gap) + " exceeds 0.08");
  log << "BRL acc " << fmt(brl_report.acc_mean, 3) << ", FRL acc " << fmt(frl_report.acc_mean, 3)
      << ", RF-FRL AUROC gap " << fmt(gap, 3);
}

// --- 06: Cox against a grid-search maximizer ---------------------------------------------

void criterion_cox_oracle(std::ostream& log) {
  Rng rng(606);
  const size_t n = 5000;
  std::vector<SurvivalRow> rows;
  rows.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    const double x = i % 2 ? 1.0 : 0.0;
    const double rate = 0.001 * (x ? 2.0 : 1.0);
    rows.push_back({{x}, -std::log(1.0 - rng.uniform()) / rate, true});
  }
  const CoxModel model = cox_fit(rows, 0.0);
  check(std::fabs(model.beta[0] - std::log(2.0)) <= 0.1,
        "beta " + fmt(model.beta[0]) + " further than 0.1 from ln 2");

  // independent maximizer: with a binary covariate the risk-set sum collapses
  // to R0 + e^beta R1, so the profile likelihood is cheap on a fine grid
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return rows[a].time > rows[b].time; });
  std::vector<double> r0_at_event, r1_at_event, x_of_event;
  double r0 = 0.0, r1 = 0.0;
  for (size_t idx : order) {  // descending time: risk set grows as time falls
    (rows[idx].covariates[0] != 0.0 ? r1 : r0) += 1.0;
    r0_at_event.push_back(r0);
    r1_at_event.push_back(r1);
    x_of_event.push_back(rows[idx].covariates[0]);
  }
  auto profile_ll = [&](double beta) {
    const double e = std::exp(beta);
    double ll = 0.0;
    for (size_t k = 0; k < x_of_event.size(); ++k) {
      ll += beta * x_of_event[k] - std::log(r0_at_event[k] + e * r1_at_event[k]);
    }
    return ll;
  };
  double grid_best = 0.0, best_ll = -1e300;
  for (double beta = 0.0; beta <= 1.4; beta += 1e-3) {
    const double ll = profile_ll(beta);
    if (ll > best_ll) {
      best_ll = ll;
      grid_best = beta;
    }
  }
  for (double beta = grid_best - 2e-3; beta <= grid_best + 2e-3; beta += 1e-5) {
    const double ll = profile_ll(beta);
    if (ll > best_ll) {
      best_ll = ll;
      grid_best = beta;
    }
  }
  check(std::fabs(model.beta[0] - grid_best) <= 1e-3,
        "fit " + fmt(model.beta[0], 6) + " vs grid " + fmt(grid_best, 6));
  log << "beta " << fmt(model.beta[0]) << " (ln 2 = " << fmt(std::log(2.0))
      << "), grid gap " << fmt(std::fabs(model.beta[0] - grid_best), 6);
}

// --- 07: metric oracles ---------------------------------------------------------------------

void criterion_metric_oracles(std::ostream& log) {
  Rng rng(707);
  for (int trial = 0; trial < 100; ++trial) {
    const size_t n = 10 + rng.below(300);
    std::vector<double> scores;
    std::vector<uint8_t> labels;
    bool pos = false, neg = false;
    for (size_t i = 0; i < n; ++i) {
      scores.push_back(std::floor(rng.uniform() * 10.0) / 10.0);
      labels.push_back(rng.bernoulli(0.45));
      (labels.back() ? pos : neg) = true;
    }
    if (!pos || !neg) continue;
    check(std::fabs(auroc(scores, labels) - oracles::auroc_by_pairs(scores, labels)) < 1e-9,
          "rank AUROC deviates from pair counting");
    const auto curve = roc_curve(scores, labels);
    double integral = 0.0;
    for (size_t i = 1; i < curve.size(); ++i) {
      integral += (curve[i].first - curve[i - 1].first) *
                  (curve[i].second + curve[i - 1].second) / 2.0;
    }
    check(std::fabs(integral - auroc(scores, labels)) < 1e-12,
          "trapezoid integral deviates from AUROC");
  }

  std::vector<int> preds;
  std::vector<uint8_t> labels;
  for (int i = 0; i < 40; ++i) { preds.push_back(1); labels.push_back(1); }  // TP
  for (int i = 0; i < 10; ++i) { preds.push_back(0); labels.push_back(1); }  // FN
  for (int i = 0; i < 20; ++i) { preds.push_back(1); labels.push_back(0); }  // FP
  for (int i = 0; i < 30; ++i) { preds.push_back(0); labels.push_back(0); }  // TN
  check(std::fabs(accuracy(preds, labels) - 0.700) < 1e-12, "confusion-matrix accuracy");
  check(std::fabs(macro_f1(preds, labels) - 0.6970) < 1e-4, "confusion-matrix macro F1");
  log << "rank = pairs to 1e-9, trapezoid = AUROC to 1e-12, confusion matrix exact";
}

// --- 08: protocol shape -----------------------------------------------------------------------

void criterion_protocol_shape(std::ostream& log) {
  const CategoricalDataset cohort = synth_generate(brain_tumour_synth_spec(), 240, 808);
  const LearnerSpec learner = make_lr_learner({0.5, 1.0, 2.0});
  const EvalReport a = nested_cv(learner, cohort, 3, 5, 3, 33, 1);
  check(a.runs.size() == 15, "expected exactly 15 runs");
  const EvalReport b = nested_cv(learner, cohort, 3, 5, 3, 33, 1);
  check(a.to_json() == b.to_json(), "repeated runs differ byte for byte");
  const EvalReport c = nested_cv(learner, cohort, 3, 5, 3, 33, 2);
  check(a.to_json() == c.to_json(), "thread count changes the report bytes");
  log << "15 runs, byte-identical across repeats and thread counts";
}

// --- 09: surrogate fidelity on a linear model ---------------------------------------------------

void criterion_surrogate_fidelity(std::ostream& log) {
  SynthSpec spec;
  for (int f = 0; f < 5; ++f) {
    Feature feat;
    feat.name = "f" + std::to_string(f);
    feat.categories = {"c0", "c1", "c2"};
    spec.schema.features.push_back(feat);
    spec.marginals.push_back({0.4, 0.3, 0.3});
  }
  spec.default_positive_prob = 0.5;
  const CategoricalDataset train = synth_generate(spec, 500, 909);

  // class-1 probability exactly linear in the one-hot columns; group-mean-zero
  // weights make the minimal-norm representation unique
  std::vector<double> weights;
  const double tops[5] = {0.100, 0.090, 0.080, 0.070, 0.060};
  const double mids[5] = {-0.037, -0.033, -0.029, -0.026, -0.022};
  for (int f = 0; f < 5; ++f) {
    weights.push_back(tops[f]);
    weights.push_back(mids[f]);
    weights.push_back(-tops[f] - mids[f]);
  }
  const MatrixScorer scorer = [&weights](const BinaryMatrix& m) {
    std::vector<double> out(m.n_rows, 0.5);
    for (size_t r = 0; r < m.n_rows; ++r) {
      const auto row = m.row(r);
      for (size_t c = 0; c < weights.size(); ++c) {
        if (row[c]) out[r] += weights[c];
      }
    }
    return out;
  };

  SurrogateConfig config;
  config.n_samples = 5000;
  config.seed = 41;
  const std::vector<int32_t> instance = {0, 2, 1, 0, 2};
  const LocalExplanation explanation = local_surrogate_explain(scorer, train, instance, config);

  check(std::fabs(explanation.fidelity_r2 - 1.0) <= 1e-6,
        "fidelity " + fmt(explanation.fidelity_r2, 8) + " not 1 within 1e-6");
  std::vector<size_t> order(weights.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return std::fabs(weights[a]) > std::fabs(weights[b]);
  });
  for (size_t i = 0; i < 10; ++i) {
    const size_t col = order[i];
    check(explanation.weights[col] * weights[col] > 0.0,
          "sign mismatch on top-10 column " + std::to_string(col));
  }
  log << "R^2 " << fmt(explanation.fidelity_r2, 8) << ", top-10 signs reproduced";
}

// --- 10: generator calibration -----------------------------------------------------------------

void criterion_generator_calibration(std::ostream& log) {
  const SynthSpec spec = brain_tumour_synth_spec();
  const size_t n = 100000;
  const CategoricalDataset ds = synth_generate(spec, n, 1010);
  double worst = 0.0;
  std::string worst_name;
  for (size_t f = 0; f < spec.schema.features.size(); ++f) {
    std::vector<double> freq(spec.schema.features[f].categories.size(), 0.0);
    for (size_t r = 0; r < n; ++r) freq[static_cast<size_t>(ds.category(r, f))] += 1.0;
    for (size_t c = 0; c < freq.size(); ++c) {
      const double gap = std::fabs(freq[c] / static_cast<double>(n) - spec.marginals[f][c]);
      if (gap > worst) {
        worst = gap;
        worst_name = spec.schema.features[f].name + ": " + spec.schema.features[f].categories[c];
      }
    }
  }
  check(worst <= 0.01, "marginal gap " + fmt(worst) + " at " + worst_name + " exceeds 0.01");

  // spot-check the two published examples; the first also goes through the
  // miner's support() path
  const int sex = spec.schema.feature_index("Sex");
  double male = 0.0;
  for (size_t r = 0; r < n; ++r) male += ds.category(r, static_cast<size_t>(sex)) == 0;
  check(std::fabs(male / static_cast<double>(n) - 0.505) <= 0.01, "Male frequency off");
  check(std::fabs(support(Itemset::of({{sex, 0}}), ds) - 0.505) <= 0.01,
        "support of Sex=Male off");
  const int diagnosis = spec.schema.feature_index("Diagnosis");
  double glioma = 0.0;
  for (size_t r = 0; r < n; ++r) glioma += ds.category(r, static_cast<size_t>(diagnosis)) == 0;
  check(std::fabs(glioma / static_cast<double>(n) - 0.465) <= 0.01,
        "Glioma Malignant frequency off");
  log << "94 marginals within 0.01 (worst gap " << fmt(worst) << " at " << worst_name << ")";
}

// --- 11: rendering contract ----------------------------------------------------------------------

void criterion_rendering_contract(std::ostream& log) {
  SynthSpec spec = brain_tumour_synth_spec();
  const int morphology = spec.schema.feature_index("Morphology");
  const int kp = spec.schema.feature_index("KP Score");
  spec.planted_rules = {{{{morphology, 0}}, 0.9}, {{{kp, 0}}, 0.75}};
  spec.default_positive_prob = 0.3;
  const CategoricalDataset ds = synth_generate(spec, 600, 1111);
  const auto pool = antecedent_pool(mine_antecedents(ds, 0.10, 0.60, 2));
  check(!pool.empty(), "mining produced no antecedents");

  BrlHyper brl_hyper;
  brl_hyper.chains = 1;
  brl_hyper.iterations = 2000;
  brl_hyper.burn_in = 1000;
  brl_hyper.seed = 5;
  const DecisionList list = brl_point(mcmc_sample(ds, pool, brl_hyper), ds);
  const std::string brl_text =
      render_decision_list(list, ds.schema, brl_hyper.alpha_neg, brl_hyper.alpha_pos);

  FrlHyper frl_hyper;
  frl_hyper.iterations = 2000;
  frl_hyper.restarts = 2;
  frl_hyper.seed = 5;
  const FallingRuleList falling = frl_fit(ds, pool, frl_hyper);
  const std::string frl_text = render_falling_list(falling, ds.schema);

  const std::regex brl_rule(
      R"(^(IF|ELSE IF) .+ THEN probability of survival > 1 yr: \d{1,3}% \(\d{1,3}%, \d{1,3}%\)$)");
  const std::regex brl_default(
      R"(^ELSE probability of survival > 1 yr: \d{1,3}% \(\d{1,3}%, \d{1,3}%\)$)");
  const std::regex frl_rule(
      R"(^(IF|ELSE IF) .+ THEN probability of survival > 1 yr: \d{1,3}% \| support: \d+$)");
  const std::regex frl_default(
      R"(^ELSE probability of survival > 1 yr: \d{1,3}% \| support: \d+$)");

  auto validate = [&](const std::string& text, const std::regex& rule, const std::regex& last,
                      const char* which) {
    std::istringstream stream(text);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(stream, line)) lines.push_back(line);
    check(!lines.empty(), std::string(which) + ": empty rendering");
    for (size_t i = 0; i + 1 < lines.size(); ++i) {
      check(std::regex_match(lines[i], rule),
            std::string(which) + ": bad rule line '" + lines[i] + "'");
    }
    check(std::regex_match(lines.back(), last),
          std::string(which) + ": bad default line '" + lines.back() + "'");
    return lines.size();
  };
  const size_t brl_lines = validate(brl_text, brl_rule, brl_default, "brl");
  const size_t frl_lines = validate(frl_text, frl_rule, frl_default, "frl");
  log << "brl " << brl_lines << " lines, frl " << frl_lines
      << " lines, all matching the credible-interval / support grammars";
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<void(std::ostream&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "fp-growth equals brute-force enumeration", 30.0, criterion_mining_oracle},
      {2, "brl posterior matches exhaustive enumeration", 120.0, criterion_brl_posterior},
      {3, "brl predictive closed form and credible intervals", 60.0, criterion_brl_predictive},
      {4, "frl monotonicity under fuzzing", 120.0, criterion_frl_monotonicity},
      {5, "planted-rule recovery with nested cross-validation", 600.0, criterion_planted_recovery},
      {6, "cox fit matches the grid-search maximizer", 10.0, criterion_cox_oracle},
      {7, "metric oracles", 30.0, criterion_metric_oracles},
      {8, "nested protocol emits 15 reproducible runs", 120.0, criterion_protocol_shape},
      {9, "local surrogate reproduces a linear model", 60.0, criterion_surrogate_fidelity},
      {10, "generator reproduces the cohort marginals", 60.0, criterion_generator_calibration},
      {11, "rule-list rendering grammar", 60.0, criterion_rendering_contract},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::ostringstream detail;
    bool passed = false;
    std::string error;
    try {
      criterion.run(detail);
      passed = true;
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (passed && elapsed > criterion.budget_seconds) {
      passed = false;
      error = "over budget: " + fmt(elapsed, 1) + "s > " + fmt(criterion.budget_seconds, 0) + "s";
    }
    std::printf("[%s] %02d %s (%.1fs): %s\n", passed ? "PASS" : "FAIL", criterion.id,
                criterion.name, elapsed, passed ? detail.str().c_str() : error.c_str());
    std::fflush(stdout);
    if (!passed) ++failures;
  }
  if (failures) {
    std::printf("%d of %zu acceptance criteria failed\n", failures, criteria.size());
    return 1;
  }
  std::printf("all %zu acceptance criteria passed\n", criteria.size());
  return 0;
}
