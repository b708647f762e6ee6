#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rulekit/brl.hpp"
#include "rulekit/dataset.hpp"
#include "rulekit/rulemine.hpp"

namespace rulekit {

// A pre-encoding column: continuous or categorical, missing entries allowed.
struct RawColumn {
  enum class Kind { continuous, categorical };

  std::string name;
  Kind kind = Kind::categorical;
  std::vector<std::optional<double>> numeric;        // when continuous
  std::vector<std::optional<std::string>> category;  // when categorical
  std::optional<std::pair<double, double>> bounds;   // continuous value range

  static RawColumn continuous_column(std::string name, std::vector<std::optional<double>> values,
                                     std::optional<std::pair<double, double>> bounds = std::nullopt);
  static RawColumn categorical_column(std::string name,
                                      std::vector<std::optional<std::string>> values);

  size_t size() const { return kind == Kind::continuous ? numeric.size() : category.size(); }
  size_t present_count() const;
  bool complete() const { return present_count() == size(); }
  void validate() const;
};

// Mode fill for categorical columns (ties -> lexicographically smallest
// category), mean fill for continuous ones.
RawColumn impute_baseline(const RawColumn& col);

// k-nearest-neighbour fill. Distance is Hamming over categorical predictors
// plus squared difference over continuous ones (min-max scaled to [0,1] when
// normalize); neighbour ties break on the lower row index.
RawColumn impute_knn(const RawColumn& target, std::span<const RawColumn> predictors, int k,
                     bool normalize);

// Least squares on one-hot-encoded predictors with intercept and a 1e-8 ridge
// stabilizer; categorical targets score one-vs-rest and take the argmax.
RawColumn impute_regression(const RawColumn& target, std::span<const RawColumn> predictors);

struct ImputerCandidate {
  enum class Method { baseline, knn, regression };
  Method method = Method::baseline;
  int k = 5;              // knn only
  bool normalize = true;  // knn only

  std::string label() const;
};

struct ImputerCandidateReport {
  ImputerCandidate candidate;
  std::vector<double> fold_scores;
  double mean_score = 0.0;
  bool disqualified = false;
  std::string error;
  bool chosen = false;
};

struct ImputerSelection {
  ImputerCandidate chosen;
  double score = 0.0;
  std::vector<ImputerCandidateReport> reports;

  std::string to_json() const;
};

// Masks present values over 10 seeded folds and scores every candidate:
// accuracy for categorical targets (higher wins), MSE for continuous ones
// (lower wins). Ties prefer baseline, then kNN, then regression. A candidate
// that errors on any fold is disqualified.
ImputerSelection select_imputer(const RawColumn& col, std::span<const RawColumn> predictors,
                                std::span<const ImputerCandidate> candidates, uint64_t seed = 0);

std::vector<ImputerCandidate> default_imputer_candidates();

// --- Discretisation -----------------------------------------------------------

struct Discretiser {
  enum class Method { uniform, quantile, kmeans };

  Method method = Method::uniform;
  int bin_count = 2;
  std::vector<double> cut_points;  // strictly ascending, bin_count - 1 entries

  // Bin index of a value; out-of-range values clamp to the edge bins.
  int apply(double value) const;
  std::vector<std::string> bin_labels() const;  // "<a", "[a,b)", ">=b"
};

const char* method_name(Discretiser::Method m);

// uniform: equal-width cuts over [min, max]; quantile: cuts at i/bin_count
// empirical quantiles with linear interpolation; kmeans: exact 1-D dynamic
// program over the distinct values, cuts at midpoints between clusters.
Discretiser fit_discretiser(std::span<const double> values, Discretiser::Method method,
                            int bin_count);

struct DiscretiserCandidateReport {
  Discretiser::Method method = Discretiser::Method::uniform;
  int bin_count = 0;
  std::vector<double> fold_scores;
  double mean_score = 0.0;
  bool disqualified = false;
  std::string error;
  bool chosen = false;
};

struct DiscretiserSelection {
  Discretiser::Method method = Discretiser::Method::uniform;
  int bin_count = 2;
  double mean_accuracy = 0.0;
  std::vector<DiscretiserCandidateReport> reports;

  std::string to_json() const;
};

// Appends each candidate discretisation of `column` to `base` and scores a
// rule-list classifier by 5-fold cross-validated accuracy (antecedents mined
// per training fold). Ties prefer fewer bins, then uniform < quantile <
// kmeans. A candidate whose rule-list training fails is disqualified.
DiscretiserSelection select_discretiser(const CategoricalDataset& base, const RawColumn& column,
                                        std::span<const Discretiser::Method> methods,
                                        std::span<const int> bin_counts, const BrlHyper& brl_hyper,
                                        const MiningParams& mining = {}, uint64_t seed = 0);

std::vector<int> default_bin_counts();  // {2, 4, 6, 8, 10, 12}

// --- Raw CSV tables -------------------------------------------------------------

// CSV with empty cells as missing values. A column whose present cells all
// parse as numbers is continuous; survival_days / event_observed columns (when
// present) must be complete and become the outcome.
struct RawTable {
  std::vector<RawColumn> columns;
  std::vector<int32_t> survival_days;
  std::vector<uint8_t> event_observed;
  bool has_outcome = false;
  size_t n_rows = 0;
};

RawTable load_raw_csv(const std::string& path);

// Complete columns -> categorical dataset. Categorical columns take their
// sorted distinct values as categories; continuous columns need a fitted
// discretiser keyed by column name.
CategoricalDataset assemble_dataset(const RawTable& table,
                                    const std::map<std::string, Discretiser>& discretisers,
                                    int label_threshold_days = kDefaultLabelThresholdDays);

}  // namespace rulekit
