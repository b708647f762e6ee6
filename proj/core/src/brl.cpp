#include "rulekit/brl.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "rulekit/parallel.hpp"
#include "rulekit/rng.hpp"
#include "rulekit/stats.hpp"
#include "rowmask.hpp"

namespace rulekit {

using nlohmann::json;

void BrlHyper::validate() const {
  if (!(expected_list_length > 0.0) || !(expected_rule_cardinality > 0.0) ||
      !(alpha_neg > 0.0) || !(alpha_pos > 0.0)) {
    throw std::invalid_argument("brl hyper: rates and pseudo-counts must be positive");
  }
  if (chains < 1 || iterations < 1 || thin < 1 || threads < 0) {
    throw std::invalid_argument("brl hyper: counts must be positive");
  }
  if (burn_in < 0 || burn_in >= iterations) {
    throw std::invalid_argument("brl hyper: burn_in must be in [0, iterations)");
  }
}

void populate_counts(DecisionList& d, const CategoricalDataset& ds) {
  d.counts.assign(d.antecedents.size() + 1, {0, 0});
  for (size_t r = 0; r < ds.n_rows(); ++r) {
    size_t hit = d.antecedents.size();
    for (size_t j = 0; j < d.antecedents.size(); ++j) {
      if (d.antecedents[j].matches(ds, r)) {
        hit = j;
        break;
      }
    }
    ++d.counts[hit][ds.label[r] ? 1 : 0];
  }
}

namespace {

struct PoolInfo {
  std::vector<int> cardinality;          // per pool antecedent
  std::vector<int64_t> total_with_card;  // indexed by cardinality
  int max_cardinality = 0;

  explicit PoolInfo(const std::vector<Itemset>& pool) {
    cardinality.reserve(pool.size());
    for (const Itemset& a : pool) {
      const int c = static_cast<int>(a.items.size());
      cardinality.push_back(c);
      max_cardinality = std::max(max_cardinality, c);
    }
    total_with_card.assign(static_cast<size_t>(max_cardinality) + 1, 0);
    for (int c : cardinality) ++total_with_card[static_cast<size_t>(c)];
  }
};

double log_prior_ids(const std::vector<int32_t>& ids, const PoolInfo& info, size_t pool_size,
                     const BrlHyper& hyper) {
  double lp = log_truncated_poisson(static_cast<int>(ids.size()), hyper.expected_list_length,
                                    static_cast<int>(pool_size));
  std::vector<int64_t> avail = info.total_with_card;
  std::vector<int> feasible;
  for (int32_t id : ids) {
    const int c = info.cardinality[static_cast<size_t>(id)];
    feasible.clear();
    for (size_t k = 0; k < avail.size(); ++k) {
      if (avail[k] > 0) feasible.push_back(static_cast<int>(k));
    }
    lp += log_poisson_over_set(c, hyper.expected_rule_cardinality, feasible);
    lp -= std::log(static_cast<double>(avail[static_cast<size_t>(c)]));
    --avail[static_cast<size_t>(c)];
  }
  return lp;
}

double log_likelihood_counts(const std::vector<std::array<int64_t, 2>>& counts, double alpha_neg,
                             double alpha_pos) {
  const double base = log_beta(alpha_neg, alpha_pos);
  double ll = 0.0;
  for (const auto& [n_neg, n_pos] : counts) {
    ll += log_beta(alpha_neg + static_cast<double>(n_neg),
                   alpha_pos + static_cast<double>(n_pos)) -
          base;
  }
  return ll;
}

// Move probabilities given the current length; infeasible moves get their
// weight redistributed over the feasible ones.
struct MoveProbs {
  double insert = 0.0, remove = 0.0, swap = 0.0;
};

MoveProbs move_probs(size_t len, size_t pool_size) {
  const bool can_insert = len < pool_size;
  const bool can_remove = len >= 1;
  const bool can_swap = len >= 2;
  double z = 0.0;
  if (can_insert) z += 0.45;
  if (can_remove) z += 0.45;
  if (can_swap) z += 0.10;
  if (z == 0.0) throw std::invalid_argument("mcmc: no feasible move (empty pool)");
  MoveProbs p;
  if (can_insert) p.insert = 0.45 / z;
  if (can_remove) p.remove = 0.45 / z;
  if (can_swap) p.swap = 0.10 / z;
  return p;
}

struct ChainState {
  std::vector<int32_t> ids;
  std::vector<uint8_t> used;  // per pool antecedent
  std::vector<std::array<int64_t, 2>> counts;
  double log_post = 0.0;
};

// Draws an initial list from the prior.
std::vector<int32_t> sample_prior_list(Rng& rng, const PoolInfo& info, size_t pool_size,
                                       const BrlHyper& hyper) {
  std::vector<double> length_weights;
  for (size_t m = 0; m <= pool_size; ++m) {
    length_weights.push_back(std::exp(static_cast<double>(m) * std::log(hyper.expected_list_length) -
                                      std::lgamma(static_cast<double>(m) + 1.0)));
  }
  const size_t target_len = rng.categorical(length_weights);
  std::vector<int32_t> ids;
  std::vector<int64_t> avail = info.total_with_card;
  std::vector<uint8_t> used(pool_size, 0);
  while (ids.size() < target_len) {
    std::vector<double> card_weights(avail.size(), 0.0);
    for (size_t c = 0; c < avail.size(); ++c) {
      if (avail[c] > 0) {
        card_weights[c] = std::exp(static_cast<double>(c) * std::log(hyper.expected_rule_cardinality) -
                                   std::lgamma(static_cast<double>(c) + 1.0));
      }
    }
    const size_t card = rng.categorical(card_weights);
    int64_t pick = rng.int_range(0, avail[card] - 1);
    for (size_t a = 0; a < pool_size; ++a) {
      if (!used[a] && info.cardinality[a] == static_cast<int>(card) && pick-- == 0) {
        used[a] = 1;
        ids.push_back(static_cast<int32_t>(a));
        break;
      }
    }
    --avail[card];
  }
  return ids;
}

}  // namespace

double log_prior(const DecisionList& d, const std::vector<Itemset>& pool, const BrlHyper& hyper) {
  hyper.validate();
  std::vector<int32_t> ids;
  ids.reserve(d.antecedents.size());
  for (const Itemset& a : d.antecedents) {
    const auto it = std::find(pool.begin(), pool.end(), a);
    if (it == pool.end()) {
      throw std::invalid_argument("log_prior: antecedent not in pool");
    }
    ids.push_back(static_cast<int32_t>(it - pool.begin()));
  }
  PoolInfo info(pool);
  return log_prior_ids(ids, info, pool.size(), hyper);
}

double log_likelihood(const DecisionList& d, const CategoricalDataset& ds, double alpha_neg,
                      double alpha_pos) {
  DecisionList copy = d;
  populate_counts(copy, ds);
  return log_likelihood_counts(copy.counts, alpha_neg, alpha_pos);
}

BrlPosterior mcmc_sample(const CategoricalDataset& ds, const std::vector<Itemset>& pool,
                         const BrlHyper& hyper) {
  hyper.validate();
  if (pool.empty()) throw std::invalid_argument("mcmc_sample: empty antecedent pool");
  const size_t pool_size = pool.size();
  const PoolInfo info(pool);
  const detail::RowMasks masks(pool, ds);

  const int per_chain = (hyper.iterations - hyper.burn_in - 1) / hyper.thin + 1;
  std::vector<std::vector<BrlSample>> chain_samples(static_cast<size_t>(hyper.chains));

  Rng root(hyper.seed);
  parallel_for(static_cast<size_t>(hyper.chains), hyper.threads, [&](size_t chain) {
    Rng rng = root.stream(chain);
    ChainState state;
    state.ids = sample_prior_list(rng, info, pool_size, hyper);
    state.used.assign(pool_size, 0);
    for (int32_t id : state.ids) state.used[static_cast<size_t>(id)] = 1;
    masks.counts_for(state.ids, state.counts);
    state.log_post = log_prior_ids(state.ids, info, pool_size, hyper) +
                     log_likelihood_counts(state.counts, hyper.alpha_neg, hyper.alpha_pos);

    std::vector<BrlSample>& kept = chain_samples[chain];
    kept.reserve(static_cast<size_t>(per_chain));
    std::vector<int32_t> proposal;
    std::vector<std::array<int64_t, 2>> proposal_counts;

    for (int it = 0; it < hyper.iterations; ++it) {
      const size_t m = state.ids.size();
      const MoveProbs probs = move_probs(m, pool_size);
      const double u = rng.uniform();
      double log_fwd_correction = 0.0;
      proposal = state.ids;
      if (u < probs.insert) {
        // insert: unused antecedent, uniform position
        const size_t unused = pool_size - m;
        int64_t pick = rng.int_range(0, static_cast<int64_t>(unused) - 1);
        int32_t chosen = -1;
        for (size_t a = 0; a < pool_size; ++a) {
          if (!state.used[a] && pick-- == 0) {
            chosen = static_cast<int32_t>(a);
            break;
          }
        }
        const size_t pos = static_cast<size_t>(rng.int_range(0, static_cast<int64_t>(m)));
        proposal.insert(proposal.begin() + static_cast<std::ptrdiff_t>(pos), chosen);
        const MoveProbs rev = move_probs(m + 1, pool_size);
        log_fwd_correction = std::log(rev.remove) - std::log(probs.insert) +
                             std::log(static_cast<double>(unused));
      } else if (u < probs.insert + probs.remove) {
        const size_t pos = static_cast<size_t>(rng.int_range(0, static_cast<int64_t>(m) - 1));
        proposal.erase(proposal.begin() + static_cast<std::ptrdiff_t>(pos));
        const MoveProbs rev = move_probs(m - 1, pool_size);
        log_fwd_correction = std::log(rev.insert) - std::log(probs.remove) -
                             std::log(static_cast<double>(pool_size - m + 1));
      } else {
        size_t i = static_cast<size_t>(rng.int_range(0, static_cast<int64_t>(m) - 1));
        size_t j = static_cast<size_t>(rng.int_range(0, static_cast<int64_t>(m) - 2));
        if (j >= i) ++j;
        std::swap(proposal[i], proposal[j]);
        // same length both ways, proposal ratio cancels
      }

      masks.counts_for(proposal, proposal_counts);
      const double log_post = log_prior_ids(proposal, info, pool_size, hyper) +
                              log_likelihood_counts(proposal_counts, hyper.alpha_neg, hyper.alpha_pos);
      const double log_accept = log_post - state.log_post + log_fwd_correction;
      if (log_accept >= 0.0 || rng.uniform() < std::exp(log_accept)) {
        // book-keep the used flags against the old list, then adopt
        for (int32_t id : state.ids) state.used[static_cast<size_t>(id)] = 0;
        for (int32_t id : proposal) state.used[static_cast<size_t>(id)] = 1;
        state.ids = proposal;
        state.counts = proposal_counts;
        state.log_post = log_post;
      }
      if (it >= hyper.burn_in && (it - hyper.burn_in) % hyper.thin == 0) {
        kept.push_back({state.ids, state.log_post});
      }
    }
  });

  BrlPosterior posterior;
  posterior.pool = pool;
  posterior.hyper = hyper;
  for (auto& chain : chain_samples) {
    posterior.samples.insert(posterior.samples.end(), chain.begin(), chain.end());
  }
  return posterior;
}

DecisionList brl_point(const BrlPosterior& posterior, const CategoricalDataset& ds) {
  if (posterior.samples.empty()) throw std::invalid_argument("brl_point: no retained samples");

  double mean_len = 0.0, mean_card = 0.0;
  for (const BrlSample& s : posterior.samples) {
    mean_len += static_cast<double>(s.antecedent_ids.size());
    double card = 0.0;
    for (int32_t id : s.antecedent_ids) {
      card += static_cast<double>(posterior.pool[static_cast<size_t>(id)].items.size());
    }
    mean_card += s.antecedent_ids.empty() ? 0.0 : card / static_cast<double>(s.antecedent_ids.size());
  }
  mean_len /= static_cast<double>(posterior.samples.size());
  mean_card /= static_cast<double>(posterior.samples.size());

  auto avg_card = [&](const BrlSample& s) {
    if (s.antecedent_ids.empty()) return 0.0;
    double card = 0.0;
    for (int32_t id : s.antecedent_ids) {
      card += static_cast<double>(posterior.pool[static_cast<size_t>(id)].items.size());
    }
    return card / static_cast<double>(s.antecedent_ids.size());
  };

  size_t target_len = static_cast<size_t>(std::llround(mean_len));
  bool have_target = false;
  for (const BrlSample& s : posterior.samples) {
    if (s.antecedent_ids.size() == target_len) {
      have_target = true;
      break;
    }
  }
  if (!have_target) {
    // relax to the nearest length that was actually sampled; ties -> shorter
    double best_gap = -1.0;
    size_t best_len = 0;
    for (const BrlSample& s : posterior.samples) {
      const size_t len = s.antecedent_ids.size();
      const double gap = std::fabs(static_cast<double>(len) - mean_len);
      if (best_gap < 0.0 || gap < best_gap || (gap == best_gap && len < best_len)) {
        best_gap = gap;
        best_len = len;
      }
    }
    target_len = best_len;
  }

  const BrlSample* best = nullptr;
  for (const BrlSample& s : posterior.samples) {
    if (s.antecedent_ids.size() != target_len) continue;
    if (std::fabs(avg_card(s) - mean_card) > 0.5) continue;
    if (!best || s.log_posterior > best->log_posterior) best = &s;
  }
  if (!best) {  // cardinality window too tight at this length
    for (const BrlSample& s : posterior.samples) {
      if (s.antecedent_ids.size() != target_len) continue;
      if (!best || s.log_posterior > best->log_posterior) best = &s;
    }
  }

  DecisionList d;
  for (int32_t id : best->antecedent_ids) {
    d.antecedents.push_back(posterior.pool[static_cast<size_t>(id)]);
  }
  populate_counts(d, ds);
  return d;
}

BrlPrediction predict(const DecisionList& d, std::span<const int32_t> row, double alpha_neg,
                      double alpha_pos) {
  if (d.counts.size() != d.antecedents.size() + 1) {
    throw std::invalid_argument("predict: counts not populated");
  }
  size_t hit = d.antecedents.size();
  for (size_t j = 0; j < d.antecedents.size(); ++j) {
    bool matches = true;
    for (const Item& item : d.antecedents[j].items) {
      if (row[static_cast<size_t>(item.feature)] != item.category) {
        matches = false;
        break;
      }
    }
    if (matches) {
      hit = j;
      break;
    }
  }
  const double a = alpha_pos + static_cast<double>(d.counts[hit][1]);
  const double b = alpha_neg + static_cast<double>(d.counts[hit][0]);
  BrlPrediction out;
  out.rule_index = hit;
  out.prob = a / (a + b);
  const auto [lo, hi] = beta_central_interval(a, b, 0.95);
  out.ci_low = lo;
  out.ci_high = hi;
  return out;
}

BrlEnsemble brl_ensemble(const BrlPosterior& posterior, const CategoricalDataset& ds) {
  std::map<std::vector<int32_t>, int64_t> multiplicity;
  for (const BrlSample& s : posterior.samples) ++multiplicity[s.antecedent_ids];
  BrlEnsemble ensemble;
  ensemble.alpha_neg = posterior.hyper.alpha_neg;
  ensemble.alpha_pos = posterior.hyper.alpha_pos;
  for (const auto& [ids, count] : multiplicity) {
    DecisionList d;
    for (int32_t id : ids) d.antecedents.push_back(posterior.pool[static_cast<size_t>(id)]);
    populate_counts(d, ds);
    ensemble.lists.push_back(std::move(d));
    ensemble.weights.push_back(count);
  }
  return ensemble;
}

double predict_posterior_mean(const BrlEnsemble& ensemble, std::span<const int32_t> row) {
  if (ensemble.lists.empty()) throw std::invalid_argument("predict_posterior_mean: empty ensemble");
  double num = 0.0;
  int64_t total = 0;
  for (size_t i = 0; i < ensemble.lists.size(); ++i) {
    num += static_cast<double>(ensemble.weights[i]) *
           predict(ensemble.lists[i], row, ensemble.alpha_neg, ensemble.alpha_pos).prob;
    total += ensemble.weights[i];
  }
  return num / static_cast<double>(total);
}

namespace {

int percent(double p) { return static_cast<int>(std::lround(p * 100.0)); }

}  // namespace

std::string render_decision_list(const DecisionList& d, const FeatureSchema& schema,
                                 double alpha_neg, double alpha_pos) {
  if (d.counts.size() != d.antecedents.size() + 1) {
    throw std::invalid_argument("render: counts not populated");
  }
  std::ostringstream out;
  for (size_t j = 0; j <= d.antecedents.size(); ++j) {
    const double a = alpha_pos + static_cast<double>(d.counts[j][1]);
    const double b = alpha_neg + static_cast<double>(d.counts[j][0]);
    const double prob = a / (a + b);
    const auto [lo, hi] = beta_central_interval(a, b, 0.95);
    if (j < d.antecedents.size()) {
      out << (j == 0 ? "IF " : "ELSE IF ") << d.antecedents[j].describe(schema) << " THEN ";
    } else {
      out << "ELSE ";
    }
    out << "probability of survival > 1 yr: " << percent(prob) << "% (" << percent(lo) << "%, "
        << percent(hi) << "%)\n";
  }
  return out.str();
}

std::string decision_list_to_json(const DecisionList& d, const FeatureSchema& schema,
                                  double alpha_neg, double alpha_pos) {
  if (d.counts.size() != d.antecedents.size() + 1) {
    throw std::invalid_argument("serialize: counts not populated");
  }
  json rules = json::array();
  for (size_t j = 0; j <= d.antecedents.size(); ++j) {
    json items = json::array();
    if (j < d.antecedents.size()) {
      for (const Item& item : d.antecedents[j].items) {
        const Feature& f = schema.features[static_cast<size_t>(item.feature)];
        items.push_back({{"feature", f.name},
                         {"category", f.categories[static_cast<size_t>(item.category)]}});
      }
    }
    const double a = alpha_pos + static_cast<double>(d.counts[j][1]);
    const double b = alpha_neg + static_cast<double>(d.counts[j][0]);
    const auto [lo, hi] = beta_central_interval(a, b, 0.95);
    rules.push_back({{"items", items},
                     {"n_neg", d.counts[j][0]},
                     {"n_pos", d.counts[j][1]},
                     {"prob", a / (a + b)},
                     {"ci_low", lo},
                     {"ci_high", hi}});
  }
  json doc;
  doc["type"] = "brl";
  doc["alpha"] = {alpha_neg, alpha_pos};
  doc["rules"] = rules;
  return doc.dump(2);
}

DecisionList decision_list_from_json(const std::string& text, const FeatureSchema& schema) {
  json doc = json::parse(text);
  DecisionList d;
  const json& rules = doc.at("rules");
  if (rules.empty()) throw std::invalid_argument("decision list JSON: missing default rule");
  for (size_t j = 0; j < rules.size(); ++j) {
    const json& jr = rules[j];
    if (j + 1 < rules.size()) {
      std::vector<Item> items;
      for (const json& ji : jr.at("items")) {
        const int f = schema.feature_index(ji.at("feature").get<std::string>());
        if (f < 0) throw std::invalid_argument("decision list JSON: unknown feature");
        const int c = schema.features[static_cast<size_t>(f)].category_index(
            ji.at("category").get<std::string>());
        if (c < 0) throw std::invalid_argument("decision list JSON: unknown category");
        items.push_back({f, c});
      }
      d.antecedents.push_back(Itemset::of(std::move(items)));
    }
    d.counts.push_back({jr.at("n_neg").get<int64_t>(), jr.at("n_pos").get<int64_t>()});
  }
  return d;
}

}  // namespace rulekit
