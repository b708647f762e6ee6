#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rulekit/dataset.hpp"
#include "rulekit/rulemine.hpp"

namespace rulekit {

// Decision list whose per-rule probability of label 1 never increases from
// the first rule through the default rule (the last risk entry).
struct FallingRuleList {
  std::vector<Itemset> antecedents;
  std::vector<double> risks;                   // antecedents.size() + 1 entries
  std::vector<int64_t> supports;               // rows captured per rule (first match)
  std::vector<std::array<int64_t, 2>> counts;  // (n_neg, n_pos) per rule

  size_t default_index() const { return antecedents.size(); }
  bool monotone() const;
};

struct FrlHyper {
  double expected_list_length = 3.0;
  double alpha_neg = 1.0;  // Beta pseudo-counts for the per-rule risk
  double alpha_pos = 1.0;
  int iterations = 20000;  // proposal steps per restart (warm start + annealing)
  double initial_temperature = 1.0;
  double temperature_decay = 0.995;  // geometric, per annealing step
  double temperature_floor = 1e-3;
  int restarts = 5;
  uint64_t seed = 0;
  int threads = 1;

  void validate() const;
};

// Builds the list for a given antecedent order: first-match counts and
// supports, risks = Beta-smoothed capture rates projected onto non-increasing
// sequences (pool-adjacent-violators).
FallingRuleList make_falling_list(std::vector<Itemset> antecedents, const CategoricalDataset& ds,
                                  const FrlHyper& hyper);

// Length prior (Poisson, measured relative to the empty list so a default-only
// list scores exactly its single Beta-Bernoulli marginal) plus the per-rule
// Beta-Bernoulli log marginal of the captured labels. Throws if the list's
// risks are not non-increasing.
double frl_score(const FallingRuleList& list, const CategoricalDataset& ds, const FrlHyper& hyper);

// Metropolis-Hastings warm start followed by simulated annealing over
// insert / remove / swap proposals; candidates whose smoothed capture rates
// would rise down the list are rejected. Deterministic given hyper.seed;
// restarts may run in parallel and the best-scoring list wins.
FallingRuleList frl_fit(const CategoricalDataset& ds, const std::vector<Itemset>& pool,
                        const FrlHyper& hyper);

struct FrlPrediction {
  double risk = 0.0;
  size_t rule_index = 0;
};

FrlPrediction frl_predict(const FallingRuleList& list, std::span<const int32_t> row);

// Figure line per rule, e.g.
// "IF KP Score: 100 THEN probability of survival > 1 yr: 88% | support: 213".
std::string render_falling_list(const FallingRuleList& list, const FeatureSchema& schema);

std::string falling_list_to_json(const FallingRuleList& list, const FeatureSchema& schema);
FallingRuleList falling_list_from_json(const std::string& text, const FeatureSchema& schema);

}  // namespace rulekit
