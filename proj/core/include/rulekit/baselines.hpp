#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rulekit/dataset.hpp"

namespace rulekit {

// Black-box scorer: class-1 probability per row of a one-hot matrix.
using MatrixScorer = std::function<std::vector<double>(const BinaryMatrix&)>;

// --- Random forest ----------------------------------------------------------

struct TreeNode {
  int32_t column = -1;  // -1 marks a leaf
  int32_t left = -1;    // child when the column value is 0
  int32_t right = -1;   // child when the column value is 1
  int64_t n0 = 0, n1 = 0;
  double p1 = 0.0;  // class-1 frequency at the node
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct ForestModel {
  std::vector<Tree> trees;
  int tree_count = 0;
  int features_per_split = 0;  // floor(sqrt(column count))
  uint64_t seed = 0;
  size_t n_cols = 0;

  double predict_proba(std::span<const uint8_t> row) const;
  std::vector<double> predict_proba(const BinaryMatrix& m) const;
  std::vector<int> predict(const BinaryMatrix& m, double threshold = 0.5) const;

  std::string to_json() const;
  static ForestModel from_json(const std::string& text);
};

// Gini-impurity trees on bootstrap resamples; fixed tree count.
ForestModel rf_train(const BinaryMatrix& m, std::span<const uint8_t> labels, int tree_count,
                     uint64_t seed, int threads = 1);

// Tree count picked by 3-fold cross-validated accuracy, then a refit on the
// full data. Deterministic given seed.
ForestModel rf_fit(const BinaryMatrix& m, std::span<const uint8_t> labels,
                   std::span<const int> tree_count_grid, uint64_t seed, int threads = 1);

std::vector<int> default_tree_count_grid();  // {100, 200, 500}

// --- L2 logistic regression --------------------------------------------------

struct LogisticModel {
  std::vector<double> weights;
  double intercept = 0.0;
  double c_value = 1.0;  // inverse regularization strength

  double predict_proba(std::span<const uint8_t> row) const;
  std::vector<double> predict_proba(const BinaryMatrix& m) const;
  std::vector<int> predict(const BinaryMatrix& m, double threshold = 0.5) const;

  std::string to_json(std::span<const std::string> column_names) const;
  static LogisticModel from_json(const std::string& text);
};

// Penalized maximum likelihood at fixed C. The objective is the mean
// log-likelihood minus |w|^2 / (2C) with an unpenalized intercept, so fits are
// invariant under row duplication. Converges at gradient norm < 1e-6.
LogisticModel lr_train(const BinaryMatrix& m, std::span<const uint8_t> labels, double c_value);

// C picked from the grid by 3-fold cross-validated accuracy; ties prefer the
// larger C.
LogisticModel lr_fit(const BinaryMatrix& m, std::span<const uint8_t> labels,
                     std::span<const double> c_grid, uint64_t seed);

std::vector<double> default_c_grid();  // 2^-4 .. 2^4

// --- Permutation importance ---------------------------------------------------

struct PermutationImportance {
  std::string feature;
  double mean_drop = 0.0;
  double std_drop = 0.0;
};

// AUROC drop when all one-hot columns of an original feature are shuffled
// jointly (shuffling a single dummy would fabricate invalid rows), averaged
// over `repeats` shuffles.
std::vector<PermutationImportance> permutation_importance(const MatrixScorer& scorer,
                                                          const BinaryMatrix& m,
                                                          std::span<const uint8_t> labels,
                                                          int repeats, uint64_t seed);

std::string permutation_importance_to_json(std::span<const PermutationImportance> entries);

// --- Sequential forward selection ----------------------------------------------

struct SfsConfig {
  int k = 10;
  int folds = 5;
  int tree_count = 100;
  uint64_t seed = 0;
  int threads = 1;
};

// Greedy forward selection of one-hot columns by cross-validated AUROC of a
// fixed-size random forest; ties prefer the lower column index. Returns the
// selected columns in selection order.
std::vector<size_t> sequential_feature_selection(const BinaryMatrix& m,
                                                 std::span<const uint8_t> labels,
                                                 const SfsConfig& config);

// --- Local surrogate explanation ------------------------------------------------

struct SurrogateConfig {
  int n_samples = 5000;
  double kernel_width = 0.25;  // on the fraction of original features changed
  double ridge = 1e-3;
  uint64_t seed = 0;
  int instance_id = 0;
};

struct LocalExplanation {
  int instance_id = 0;
  std::vector<double> weights;  // per one-hot column
  double intercept = 0.0;
  std::vector<std::pair<size_t, double>> top;  // up to 10 columns ranked by |weight|
  double fidelity_r2 = 0.0;
};

// Perturbs the instance by resampling each original feature from its training
// marginal with probability 1/2, weights samples by exp(-d^2 / width^2) with
// d the fraction of features changed, and fits a weighted ridge line to the
// black box's probabilities.
LocalExplanation local_surrogate_explain(const MatrixScorer& scorer,
                                         const CategoricalDataset& train,
                                         std::span<const int32_t> instance,
                                         const SurrogateConfig& config);

std::string local_explanation_to_json(const LocalExplanation& explanation,
                                      std::span<const std::string> column_names);

}  // namespace rulekit
