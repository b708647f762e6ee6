#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rulekit/dataset.hpp"
#include "rulekit/rulemine.hpp"

namespace rulekit {

// Ordered antecedents with first-match semantics and an implicit default rule
// at the end. counts has one (n_neg, n_pos) entry per antecedent plus one for
// the default; every training row is captured by exactly one entry.
struct DecisionList {
  std::vector<Itemset> antecedents;
  std::vector<std::array<int64_t, 2>> counts;  // [0] = negatives, [1] = positives

  size_t default_index() const { return antecedents.size(); }
};

// Fills counts by sending each dataset row to its first matching rule.
void populate_counts(DecisionList& d, const CategoricalDataset& ds);

struct BrlHyper {
  double expected_list_length = 3.0;      // Poisson prior on the list length
  double expected_rule_cardinality = 1.0; // Poisson prior on per-rule cardinality
  double alpha_neg = 1.0;                 // Dirichlet pseudo-counts on the consequent
  double alpha_pos = 1.0;
  int chains = 3;
  int iterations = 30000;  // per chain
  int burn_in = 15000;
  int thin = 10;
  uint64_t seed = 0;
  int threads = 1;

  void validate() const;
};

struct BrlSample {
  std::vector<int32_t> antecedent_ids;  // indices into the pool
  double log_posterior = 0.0;           // unnormalized
};

struct BrlPosterior {
  std::vector<Itemset> pool;
  std::vector<BrlSample> samples;
  BrlHyper hyper;
};

// Prior over decision lists: truncated Poisson on the length, then per rule a
// truncated Poisson over the cardinalities still available in the pool and a
// uniform pick among the unused antecedents of that cardinality.
double log_prior(const DecisionList& d, const std::vector<Itemset>& pool, const BrlHyper& hyper);

// Dirichlet-multinomial marginal of the captured labels, summed over rules
// including the default.
double log_likelihood(const DecisionList& d, const CategoricalDataset& ds, double alpha_neg,
                      double alpha_pos);

// Metropolis-Hastings over lists with insert / remove / swap proposals
// (0.45 / 0.45 / 0.10, renormalized over the feasible moves). Deterministic
// given hyper.seed; chains may run in parallel.
BrlPosterior mcmc_sample(const CategoricalDataset& ds, const std::vector<Itemset>& pool,
                         const BrlHyper& hyper);

// The highest-posterior sample among those whose length equals the rounded
// posterior-mean length and whose average cardinality falls within 0.5 of the
// posterior mean; the length filter relaxes to the nearest available length
// when empty. Counts are populated against ds.
DecisionList brl_point(const BrlPosterior& posterior, const CategoricalDataset& ds);

struct BrlPrediction {
  double prob = 0.0;     // posterior mean probability of label 1
  double ci_low = 0.0;   // central 95% credible interval
  double ci_high = 0.0;
  size_t rule_index = 0;
};

BrlPrediction predict(const DecisionList& d, std::span<const int32_t> row, double alpha_neg,
                      double alpha_pos);

// Posterior-predictive averaging over all retained samples ("BRL-post").
// Deliberately kept out of the pretty-printed output: the averaged classifier
// is not a readable list.
struct BrlEnsemble {
  std::vector<DecisionList> lists;
  std::vector<int64_t> weights;  // sample multiplicity per distinct list
  double alpha_neg = 1.0, alpha_pos = 1.0;
};

BrlEnsemble brl_ensemble(const BrlPosterior& posterior, const CategoricalDataset& ds);
double predict_posterior_mean(const BrlEnsemble& ensemble, std::span<const int32_t> row);

// "IF ... THEN probability of survival > 1 yr: NN% (LL%, UU%)" lines, one per
// rule, with an ELSE line for the default rule.
std::string render_decision_list(const DecisionList& d, const FeatureSchema& schema,
                                 double alpha_neg, double alpha_pos);

std::string decision_list_to_json(const DecisionList& d, const FeatureSchema& schema,
                                  double alpha_neg, double alpha_pos);
DecisionList decision_list_from_json(const std::string& text, const FeatureSchema& schema);

}  // namespace rulekit
