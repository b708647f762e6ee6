#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "rulekit/dataset.hpp"

namespace rulekit {

struct Item {
  int32_t feature = 0;
  int32_t category = 0;
  auto operator<=>(const Item&) const = default;
};

// Sorted, duplicate-free conjunction of (feature, category) conditions with at
// most one condition per feature. The empty itemset matches every row.
struct Itemset {
  std::vector<Item> items;

  static Itemset of(std::vector<Item> items);  // sorts, validates uniqueness
  bool matches(const CategoricalDataset& ds, size_t row) const;
  std::string describe(const FeatureSchema& schema) const;  // "F: c AND G: d"
  auto operator<=>(const Itemset&) const = default;
};

struct MinedRule {
  Itemset antecedent;
  int64_t n_neg = 0;  // matching rows with label 0
  int64_t n_pos = 0;  // matching rows with label 1
  double support = 0.0;
  double confidence = 0.0;  // of the majority label under the antecedent
};

// Fraction of rows matching every item of `a`.
double support(const Itemset& a, const CategoricalDataset& ds);

// Fraction of `a`-matching rows carrying label_value. Undefined (throws) when
// nothing matches.
double confidence(const Itemset& a, int label_value, const CategoricalDataset& ds);

// All itemsets whose absolute count reaches ceil(min_support * N), with exact
// counts, ordered by size then lexicographically. Includes the empty itemset
// (count N) whenever the transaction list is non-empty.
std::vector<std::pair<Itemset, int64_t>> fp_growth(const std::vector<Itemset>& transactions,
                                                   double min_support);

struct MiningParams {
  double min_support = 0.10;
  double min_confidence = 0.80;
  int max_cardinality = 2;
};

// Candidate antecedents: itemsets of size 1..max_cardinality meeting the
// support threshold whose majority-label confidence reaches min_confidence.
std::vector<MinedRule> mine_antecedents(const CategoricalDataset& ds,
                                        double min_support = 0.10,
                                        double min_confidence = 0.80,
                                        int max_cardinality = 2);

inline std::vector<MinedRule> mine_antecedents(const CategoricalDataset& ds,
                                               const MiningParams& params) {
  return mine_antecedents(ds, params.min_support, params.min_confidence, params.max_cardinality);
}

// The antecedent pool a rule-list learner consumes.
inline std::vector<Itemset> antecedent_pool(const std::vector<MinedRule>& rules) {
  std::vector<Itemset> pool;
  pool.reserve(rules.size());
  for (const MinedRule& rule : rules) pool.push_back(rule.antecedent);
  return pool;
}

std::string mined_rules_to_json(const std::vector<MinedRule>& rules, const FeatureSchema& schema);
std::vector<MinedRule> mined_rules_from_json(const std::string& text, const FeatureSchema& schema);

}  // namespace rulekit
