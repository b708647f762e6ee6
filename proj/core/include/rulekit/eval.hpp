#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rulekit/dataset.hpp"
#include "rulekit/rng.hpp"

namespace rulekit {

double accuracy(std::span<const int> preds, std::span<const uint8_t> labels);

// Unweighted mean of the per-class F1 scores; a class with no predicted and
// no actual members contributes 0.
double macro_f1(std::span<const int> preds, std::span<const uint8_t> labels);

// Probability that a random positive outranks a random negative, ties counted
// half, computed from rank statistics. Requires both classes.
double auroc(std::span<const double> scores, std::span<const uint8_t> labels);

// (FPR, TPR) points at every distinct threshold, from (0,0) to (1,1). The
// trapezoid integral of the curve equals auroc().
std::vector<std::pair<double, double>> roc_curve(std::span<const double> scores,
                                                 std::span<const uint8_t> labels);

// Class-preserving fold assignment: per-class shuffle, then round-robin deal.
std::vector<std::vector<size_t>> stratified_folds(std::span<const uint8_t> labels, int k, Rng& rng);

// A trained model as the harness sees it. score may be empty for models that
// cannot produce class-1 scores (the Cox baseline).
struct FittedModel {
  std::function<std::vector<int>(const CategoricalDataset&)> predict;
  std::function<std::vector<double>(const CategoricalDataset&)> score;
};

// Learner with a hyperparameter grid. fit receives only training rows, so any
// internal mining / imputation / discretisation is leakage-free by
// construction.
struct LearnerSpec {
  std::string name;
  std::vector<std::string> hyper_labels;  // one per grid candidate; at least one
  std::function<FittedModel(const CategoricalDataset& train, size_t hyper_index, uint64_t seed)> fit;
  bool produces_scores = true;
};

struct RunResult {
  int seed_index = 0;
  int outer_fold = 0;
  size_t hyper_index = 0;
  bool failed = false;
  std::string error;
  double accuracy = 0.0;
  double f1 = 0.0;
  std::optional<double> auroc;
  std::vector<std::pair<double, double>> roc;
};

struct EvalReport {
  std::string model;
  int inner_folds = 3, outer_folds = 5, seed_repeats = 3;
  uint64_t base_seed = 0;
  std::vector<RunResult> runs;  // seed-major order, outer_folds x seed_repeats entries
  size_t failed_runs = 0;

  double acc_mean = 0.0, acc_std = 0.0;
  double f1_mean = 0.0, f1_std = 0.0;
  std::optional<double> auroc_mean, auroc_std;

  std::string to_json() const;
  std::string to_table() const;  // mean with std in parentheses, 3 decimals
  std::string roc_csv() const;
};

// Nested cross-validation: per seed a stratified outer split; per outer fold
// an inner stratified grid search on the training portion only, then a refit
// and a held-out evaluation. Defaults give outer x seeds = 15 runs. A failed
// fold is recorded and skipped; more than 3 failures abort.
EvalReport nested_cv(const LearnerSpec& learner, const CategoricalDataset& ds, int inner = 3,
                     int outer = 5, int seeds = 3, uint64_t base_seed = 0, int threads = 1);

}  // namespace rulekit
