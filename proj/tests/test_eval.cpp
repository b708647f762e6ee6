#include <doctest.h>

#include <cmath>

#include "rulekit/cohort.hpp"
#include "rulekit/eval.hpp"
#include "rulekit/learners.hpp"
#include "rulekit/rng.hpp"

#include "oracles.hpp"

#include <mutex>
#include <set>

using namespace rulekit;

TEST_CASE("metrics on perfect predictions") {
  const std::vector<int> preds = {1, 0, 1, 0};
  const std::vector<uint8_t> labels = {1, 0, 1, 0};
  CHECK(accuracy(preds, labels) == doctest::Approx(1.0));
  CHECK(macro_f1(preds, labels) == doctest::Approx(1.0));
  const std::vector<double> scores = {0.9, 0.1, 0.8, 0.2};
  CHECK(auroc(scores, labels) == doctest::Approx(1.0));
}

TEST_CASE("hand-computed confusion matrix: TP 40, FN 10, FP 20, TN 30") {
  std::vector<int> preds;
  std::vector<uint8_t> labels;
  for (int i = 0; i < 40; ++i) { preds.push_back(1); labels.push_back(1); }
  for (int i = 0; i < 10; ++i) { preds.push_back(0); labels.push_back(1); }
  for (int i = 0; i < 20; ++i) { preds.push_back(1); labels.push_back(0); }
  for (int i = 0; i < 30; ++i) { preds.push_back(0); labels.push_back(0); }
  CHECK(accuracy(preds, labels) == doctest::Approx(0.700).epsilon(1e-12));
  // F1+ = 80/110, F1- = 60/90, macro = 0.696969...
  CHECK(macro_f1(preds, labels) == doctest::Approx(0.6970).epsilon(1e-4 / 0.697));
  CHECK(std::fabs(macro_f1(preds, labels) - 0.6970) < 1e-4);
}

TEST_CASE("macro f1 zero-support convention") {
  // no predicted and no actual positives: the positive class contributes 0
  const std::vector<int> preds = {0, 0, 0};
  const std::vector<uint8_t> labels = {0, 0, 0};
  CHECK(macro_f1(preds, labels) == doctest::Approx(0.5));  // F1- = 1, F1+ = 0
}

TEST_CASE("rank auroc equals pair counting on fuzz cases") {
  Rng rng(71);
  for (int trial = 0; trial < 100; ++trial) {
    const size_t n = 10 + rng.below(200);
    std::vector<double> scores;
    std::vector<uint8_t> labels;
    bool pos = false, neg = false;
    for (size_t i = 0; i < n; ++i) {
      // coarse scores force plenty of ties
      scores.push_back(std::floor(rng.uniform() * 8.0) / 8.0);
      labels.push_back(rng.bernoulli(0.4));
      (labels.back() ? pos : neg) = true;
    }
    if (!pos || !neg) continue;
    CHECK(std::fabs(auroc(scores, labels) - oracles::auroc_by_pairs(scores, labels)) < 1e-9);
  }
}

TEST_CASE("auroc errors on a single class") {
  const std::vector<double> scores = {0.3, 0.7};
  const std::vector<uint8_t> labels = {1, 1};
  CHECK_THROWS_AS(static_cast<void>(auroc(scores, labels)), std::invalid_argument);
}

TEST_CASE("auroc is invariant under strictly monotone score transforms") {
  Rng rng(73);
  std::vector<double> scores;
  std::vector<uint8_t> labels;
  for (int i = 0; i < 300; ++i) {
    scores.push_back(rng.uniform() * 4.0 - 2.0);
    labels.push_back(rng.bernoulli(0.5));
  }
  const double base = auroc(scores, labels);
  std::vector<double> transformed;
  for (double s : scores) transformed.push_back(std::exp(2.0 * s) + 5.0);
  CHECK(auroc(transformed, labels) == doctest::Approx(base).epsilon(1e-15));
}

TEST_CASE("roc curve shape and integral") {
  SUBCASE("perfect separation passes through (0, 1)") {
    const std::vector<double> scores = {0.9, 0.8, 0.2, 0.1};
    const std::vector<uint8_t> labels = {1, 1, 0, 0};
    const auto curve = roc_curve(scores, labels);
    CHECK(curve.front() == std::pair<double, double>{0.0, 0.0});
    CHECK(curve.back() == std::pair<double, double>{1.0, 1.0});
    bool hits_corner = false;
    for (const auto& [fpr, tpr] : curve) {
      if (fpr == 0.0 && tpr == 1.0) hits_corner = true;
    }
    CHECK(hits_corner);
  }

  SUBCASE("random scores sit near the diagonal") {
    Rng rng(77);
    std::vector<double> scores;
    std::vector<uint8_t> labels;
    for (int i = 0; i < 4000; ++i) {
      scores.push_back(rng.uniform());
      labels.push_back(rng.bernoulli(0.5));
    }
    CHECK(std::fabs(auroc(scores, labels) - 0.5) < 0.03);
  }

  SUBCASE("trapezoid integral equals auroc on fuzz cases") {
    Rng rng(79);
    for (int trial = 0; trial < 100; ++trial) {
      const size_t n = 5 + rng.below(120);
      std::vector<double> scores;
      std::vector<uint8_t> labels;
      bool pos = false, neg = false;
      for (size_t i = 0; i < n; ++i) {
        scores.push_back(std::floor(rng.uniform() * 6.0));
        labels.push_back(rng.bernoulli(0.5));
        (labels.back() ? pos : neg) = true;
      }
      if (!pos || !neg) continue;
      const auto curve = roc_curve(scores, labels);
      double integral = 0.0;
      for (size_t i = 1; i < curve.size(); ++i) {
        integral += (curve[i].first - curve[i - 1].first) *
                    (curve[i].second + curve[i - 1].second) / 2.0;
      }
      CHECK(std::fabs(integral - auroc(scores, labels)) < 1e-12);
    }
  }
}

TEST_CASE("stratified folds preserve class proportions within one row") {
  Rng rng(81);
  std::vector<uint8_t> labels;
  for (int i = 0; i < 437; ++i) labels.push_back(rng.bernoulli(0.44));
  Rng fold_rng(11);
  const auto folds = stratified_folds(labels, 5, fold_rng);
  std::vector<int> pos_counts, sizes;
  for (const auto& fold : folds) {
    int pos = 0;
    for (size_t r : fold) pos += labels[r];
    pos_counts.push_back(pos);
    sizes.push_back(static_cast<int>(fold.size()));
  }
  for (size_t i = 1; i < folds.size(); ++i) {
    CHECK(std::abs(pos_counts[i] - pos_counts[0]) <= 1);
    CHECK(std::abs((sizes[i] - pos_counts[i]) - (sizes[0] - pos_counts[0])) <= 1);
  }
  // folds partition the rows
  std::set<size_t> all;
  for (const auto& fold : folds) all.insert(fold.begin(), fold.end());
  CHECK(all.size() == labels.size());
}

namespace {

LearnerSpec majority_learner() {
  LearnerSpec spec;
  spec.name = "majority";
  spec.hyper_labels = {"default"};
  spec.produces_scores = false;
  spec.fit = [](const CategoricalDataset& train, size_t, uint64_t) {
    int64_t pos = 0;
    for (uint8_t y : train.label) pos += y;
    const int cls = pos * 2 >= static_cast<int64_t>(train.n_rows()) ? 1 : 0;
    FittedModel model;
    model.predict = [cls](const CategoricalDataset& ds) {
      return std::vector<int>(ds.n_rows(), cls);
    };
    return model;
  };
  return spec;
}

}  // namespace

TEST_CASE("nested cv emits exactly 15 runs with defaults and is reproducible") {
  const CategoricalDataset ds = synth_generate(brain_tumour_synth_spec(), 200, 3);
  const EvalReport a = nested_cv(majority_learner(), ds, 3, 5, 3, 17);
  CHECK(a.runs.size() == 15);
  CHECK(a.failed_runs == 0);
  const EvalReport b = nested_cv(majority_learner(), ds, 3, 5, 3, 17);
  CHECK(a.to_json() == b.to_json());  // bit-identical report
  CHECK(a.roc_csv() == b.roc_csv());

  // majority-class accuracy tracks the majority fraction
  int64_t pos = 0;
  for (uint8_t y : ds.label) pos += y;
  const double majority = std::max(static_cast<double>(pos) / static_cast<double>(ds.n_rows()),
                                   1.0 - static_cast<double>(pos) / static_cast<double>(ds.n_rows()));
  CHECK(std::fabs(a.acc_mean - majority) < 0.05);
}

TEST_CASE("no outer-test row ever reaches a fit call") {
  // unique survival day per row makes rows identifiable in the spy
  const CategoricalDataset base = synth_generate(brain_tumour_synth_spec(), 120, 5);
  CategoricalDataset tagged = base;
  for (size_t r = 0; r < tagged.n_rows(); ++r) {
    const bool odd = r % 2 == 1;
    tagged.survival_days[r] = odd ? 366 + static_cast<int32_t>(r) : 1 + static_cast<int32_t>(r);
    tagged.event_observed[r] = 1;
    tagged.label[r] = odd ? 1 : 0;
  }

  // spy learner: records the day-set of every fit call, in call order
  std::mutex mx;
  std::vector<std::set<int32_t>> fit_calls;
  LearnerSpec spy;
  spy.name = "spy";
  spy.hyper_labels = {"a", "b"};  // two candidates force the inner loop
  spy.produces_scores = false;
  spy.fit = [&](const CategoricalDataset& train, size_t, uint64_t) {
    {
      std::lock_guard<std::mutex> lock(mx);
      fit_calls.emplace_back(train.survival_days.begin(), train.survival_days.end());
    }
    FittedModel model;
    model.predict = [](const CategoricalDataset& d) { return std::vector<int>(d.n_rows(), 1); };
    return model;
  };

  const int outer = 2, inner = 2, seeds = 1;
  const uint64_t base_seed = 9;
  const EvalReport report = nested_cv(spy, tagged, inner, outer, seeds, base_seed, 1);
  CHECK(report.runs.size() == 2);

  // reconstruct the outer fold assignment the harness used
  Rng root(base_seed);
  Rng fold_rng = root.stream(0);
  const auto folds = stratified_folds(tagged.label, outer, fold_rng);

  // with one thread the calls arrive run by run: per run, inner fits
  // (candidates x inner folds) then the refit
  const size_t calls_per_run = 2 * inner + 1;
  REQUIRE(fit_calls.size() == calls_per_run * 2);
  for (int run = 0; run < 2; ++run) {
    std::set<int32_t> test_days;
    for (size_t r : folds[static_cast<size_t>(run)]) test_days.insert(tagged.survival_days[r]);
    for (size_t call = calls_per_run * static_cast<size_t>(run);
         call < calls_per_run * static_cast<size_t>(run + 1); ++call) {
      for (int32_t day : fit_calls[call]) CHECK(test_days.count(day) == 0);
    }
  }
}

TEST_CASE("failed folds are recorded and capped") {
  const CategoricalDataset ds = synth_generate(brain_tumour_synth_spec(), 100, 11);

  int failures_to_throw = 2;
  LearnerSpec flaky;
  flaky.name = "flaky";
  flaky.hyper_labels = {"default"};
  flaky.produces_scores = false;
  std::mutex mx;
  int fit_count = 0;
  flaky.fit = [&](const CategoricalDataset& train, size_t, uint64_t) {
    {
      std::lock_guard<std::mutex> lock(mx);
      if (fit_count++ < failures_to_throw) throw std::runtime_error("synthetic failure");
    }
    (void)train;
    FittedModel model;
    model.predict = [](const CategoricalDataset& d) { return std::vector<int>(d.n_rows(), 0); };
    return model;
  };
  const EvalReport report = nested_cv(flaky, ds, 3, 5, 1, 13);
  CHECK(report.failed_runs == 2);
  CHECK(report.runs.size() == 5);

  fit_count = 0;
  failures_to_throw = 5;
  CHECK_THROWS_AS(static_cast<void>(nested_cv(flaky, ds, 3, 5, 1, 13)), std::runtime_error);
}

TEST_CASE("the cox baseline enters the harness without AUROC") {
  const CategoricalDataset ds = synth_generate(brain_tumour_synth_spec(), 300, 29);
  const EvalReport report = nested_cv(make_cox_learner({1e-2, 1e0}), ds, 3, 5, 3, 31, 2);
  CHECK(report.runs.size() == 15);
  CHECK(report.failed_runs <= 3);
  CHECK(!report.auroc_mean.has_value());
  CHECK(report.to_table().find("AUROC     n/a") != std::string::npos);
}

TEST_CASE("report renders a three-decimal table") {
  const CategoricalDataset ds = synth_generate(brain_tumour_synth_spec(), 150, 19);
  const EvalReport report = nested_cv(majority_learner(), ds, 3, 5, 3, 23);
  const std::string table = report.to_table();
  CHECK(table.find("Accuracy") != std::string::npos);
  CHECK(table.find("AUROC     n/a") != std::string::npos);  // no scores from this learner
  CHECK(table.find("(.") != std::string::npos);             // std in parentheses, leading dot
}
