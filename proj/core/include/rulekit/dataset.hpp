#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rulekit {

inline constexpr int kDefaultLabelThresholdDays = 365;

enum class FeatureKind { categorical, ordinal };

struct Feature {
  std::string name;
  FeatureKind kind = FeatureKind::categorical;
  std::vector<std::string> categories;  // ordered; index is the stored code

  int category_index(std::string_view category) const;  // -1 if unknown
};

// Ordered feature list; feature names unique, every feature has at least two
// categories, category names unique within a feature.
struct FeatureSchema {
  std::vector<Feature> features;

  void validate() const;  // throws std::invalid_argument on violation
  int feature_index(std::string_view name) const;  // -1 if unknown
  size_t total_categories() const;

  std::string to_json() const;
  static FeatureSchema from_json(const std::string& text);
};

// Rows of category codes plus the survival outcome and the derived one-year
// label. A censored row (event_observed = false) is known to have survived
// past the label threshold, so its label is always 1.
struct CategoricalDataset {
  FeatureSchema schema;
  std::vector<int32_t> cells;  // row-major, width = schema.features.size()
  std::vector<int32_t> survival_days;
  std::vector<uint8_t> event_observed;
  std::vector<uint8_t> label;

  size_t n_rows() const { return survival_days.size(); }
  size_t n_features() const { return schema.features.size(); }
  int32_t category(size_t row, size_t feature) const {
    return cells[row * schema.features.size() + feature];
  }
  std::span<const int32_t> row(size_t r) const {
    return std::span<const int32_t>(cells).subspan(r * schema.features.size(),
                                                   schema.features.size());
  }

  void validate() const;
  CategoricalDataset subset(std::span<const size_t> row_indices) const;
};

// One-hot expansion; exactly one active column per feature group per row.
struct BinaryMatrix {
  std::vector<std::string> column_names;  // "feature: category"
  std::vector<int32_t> column_feature;    // owning feature index per column
  std::vector<uint8_t> values;            // row-major
  size_t n_rows = 0;

  size_t n_cols() const { return column_names.size(); }
  uint8_t at(size_t row, size_t col) const { return values[row * n_cols() + col]; }
  std::span<const uint8_t> row(size_t r) const {
    return std::span<const uint8_t>(values).subspan(r * n_cols(), n_cols());
  }
};

// label = 1 iff survival exceeded the threshold. Censored rows must already
// have outlived the threshold; anything else is a data error, not a guess.
int make_label(int survival_days, bool event_observed,
               int threshold_days = kDefaultLabelThresholdDays);

BinaryMatrix one_hot_encode(const CategoricalDataset& ds);

// How two collinear source features collapse into one merged feature.
struct CollinearMerge {
  std::vector<std::string> source_features;
  std::string merged_feature;
  // source category combination (one entry per source feature) -> merged category
  std::vector<std::pair<std::vector<std::string>, std::string>> combinations;
};

CategoricalDataset merge_collinear(const CategoricalDataset& ds,
                                   std::span<const CollinearMerge> merges);

// --- CSV -------------------------------------------------------------------
// UTF-8, comma-delimited, quoted fields allowed, header mandatory. Columns:
// every schema feature by name plus survival_days and event_observed.
CategoricalDataset load_csv(const std::string& path, const FeatureSchema& schema,
                            int label_threshold_days = kDefaultLabelThresholdDays);
void save_csv(const CategoricalDataset& ds, const std::string& path);

// --- Synthetic cohorts -------------------------------------------------------

struct SynthRule {
  std::vector<std::pair<int32_t, int32_t>> items;  // (feature, category)
  double positive_prob = 0.0;
};

struct SynthSpec {
  FeatureSchema schema;
  std::vector<std::vector<double>> marginals;  // per feature, sums to 1
  std::vector<SynthRule> planted_rules;        // first match wins
  double default_positive_prob = 0.5;
  double censor_prob_given_survivor = 0.0;

  void validate() const;
  std::string to_json() const;
  static SynthSpec from_json(const std::string& text);
};

// Features drawn independently from the marginals; the label is Bernoulli
// with the first matching planted rule's probability (else the default);
// survival days are drawn consistently with the label and survivors are
// censored with the configured probability. Deterministic in (spec, n, seed).
CategoricalDataset synth_generate(const SynthSpec& spec, size_t n, uint64_t seed);

}  // namespace rulekit
