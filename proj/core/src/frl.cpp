#include "rulekit/frl.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "rulekit/parallel.hpp"
#include "rulekit/rng.hpp"
#include "rulekit/stats.hpp"
#include "rowmask.hpp"

namespace rulekit {

using nlohmann::json;

namespace {
constexpr double kMonotoneTolerance = 1e-12;
}

bool FallingRuleList::monotone() const {
  for (size_t j = 0; j + 1 < risks.size(); ++j) {
    if (risks[j] + kMonotoneTolerance < risks[j + 1]) return false;
  }
  return true;
}

void FrlHyper::validate() const {
  if (!(expected_list_length > 0.0) || !(alpha_neg > 0.0) || !(alpha_pos > 0.0)) {
    throw std::invalid_argument("frl hyper: rates and pseudo-counts must be positive");
  }
  if (iterations < 1 || restarts < 1 || threads < 0) {
    throw std::invalid_argument("frl hyper: counts must be positive");
  }
  if (!(temperature_decay > 0.0) || !(temperature_decay < 1.0)) {
    throw std::invalid_argument("frl hyper: temperature decay outside (0, 1)");
  }
  if (!(initial_temperature > 0.0) || !(temperature_floor > 0.0)) {
    throw std::invalid_argument("frl hyper: temperatures must be positive");
  }
}

namespace {

std::vector<double> smoothed_rates(const std::vector<std::array<int64_t, 2>>& counts,
                                   const FrlHyper& hyper) {
  std::vector<double> rates;
  rates.reserve(counts.size());
  for (const auto& [n_neg, n_pos] : counts) {
    rates.push_back((static_cast<double>(n_pos) + hyper.alpha_pos) /
                    (static_cast<double>(n_pos + n_neg) + hyper.alpha_neg + hyper.alpha_pos));
  }
  return rates;
}

bool rates_non_increasing(const std::vector<double>& rates) {
  for (size_t j = 0; j + 1 < rates.size(); ++j) {
    if (rates[j] + kMonotoneTolerance < rates[j + 1]) return false;
  }
  return true;
}

// Length prior relative to the empty list plus the data marginal.
double score_counts(size_t length, const std::vector<std::array<int64_t, 2>>& counts,
                    const FrlHyper& hyper) {
  double score = static_cast<double>(length) * std::log(hyper.expected_list_length) -
                 std::lgamma(static_cast<double>(length) + 1.0);
  const double base = log_beta(hyper.alpha_neg, hyper.alpha_pos);
  for (const auto& [n_neg, n_pos] : counts) {
    score += log_beta(hyper.alpha_neg + static_cast<double>(n_neg),
                      hyper.alpha_pos + static_cast<double>(n_pos)) -
             base;
  }
  return score;
}

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
  if (z == 0.0) throw std::invalid_argument("frl_fit: no feasible move (empty pool)");
  MoveProbs p;
  if (can_insert) p.insert = 0.45 / z;
  if (can_remove) p.remove = 0.45 / z;
  if (can_swap) p.swap = 0.10 / z;
  return p;
}

}  // namespace

FallingRuleList make_falling_list(std::vector<Itemset> antecedents, const CategoricalDataset& ds,
                                  const FrlHyper& hyper) {
  hyper.validate();
  FallingRuleList list;
  list.antecedents = std::move(antecedents);
  list.counts.assign(list.antecedents.size() + 1, {0, 0});
  for (size_t r = 0; r < ds.n_rows(); ++r) {
    size_t hit = list.antecedents.size();
    for (size_t j = 0; j < list.antecedents.size(); ++j) {
      if (list.antecedents[j].matches(ds, r)) {
        hit = j;
        break;
      }
    }
    ++list.counts[hit][ds.label[r] ? 1 : 0];
  }
  list.supports.clear();
  std::vector<double> rates = smoothed_rates(list.counts, hyper);
  std::vector<double> weights;
  for (const auto& [n_neg, n_pos] : list.counts) {
    list.supports.push_back(n_neg + n_pos);
    weights.push_back(static_cast<double>(n_neg + n_pos) + hyper.alpha_neg + hyper.alpha_pos);
  }
  list.risks = isotonic_non_increasing(rates, weights);
  return list;
}

double frl_score(const FallingRuleList& list, const CategoricalDataset& ds, const FrlHyper& hyper) {
  hyper.validate();
  if (list.risks.size() != list.antecedents.size() + 1) {
    throw std::invalid_argument("frl_score: risks not populated");
  }
  if (!list.monotone()) {
    throw std::invalid_argument("frl_score: risks must be non-increasing down the list");
  }
  const FallingRuleList counted = make_falling_list(list.antecedents, ds, hyper);
  return score_counts(list.antecedents.size(), counted.counts, hyper);
}

FallingRuleList frl_fit(const CategoricalDataset& ds, const std::vector<Itemset>& pool,
                        const FrlHyper& hyper) {
  hyper.validate();
  if (pool.empty()) throw std::invalid_argument("frl_fit: empty antecedent pool");
  const size_t pool_size = pool.size();
  const detail::RowMasks masks(pool, ds);

  struct Best {
    std::vector<int32_t> ids;
    double score = 0.0;
  };
  std::vector<Best> per_restart(static_cast<size_t>(hyper.restarts));

  Rng root(hyper.seed);
  parallel_for(static_cast<size_t>(hyper.restarts), hyper.threads, [&](size_t restart) {
    Rng rng = root.stream(restart);
    std::vector<int32_t> ids;  // start from the default-only list
    std::vector<std::array<int64_t, 2>> counts;
    masks.counts_for(ids, counts);
    double score = score_counts(ids.size(), counts, hyper);

    Best best{ids, score};
    std::vector<uint8_t> used(pool_size, 0);
    std::vector<int32_t> proposal;
    std::vector<std::array<int64_t, 2>> proposal_counts;

    const int warm_steps = hyper.iterations / 2;
    double temperature = hyper.initial_temperature;
    for (int it = 0; it < hyper.iterations; ++it) {
      const bool annealing = it >= warm_steps;
      const size_t m = ids.size();
      const MoveProbs probs = move_probs(m, pool_size);
      const double u = rng.uniform();
      double log_fwd_correction = 0.0;
      proposal = ids;
      if (u < probs.insert) {
        const size_t unused = pool_size - m;
        int64_t pick = rng.int_range(0, static_cast<int64_t>(unused) - 1);
        int32_t chosen = -1;
        for (size_t a = 0; a < pool_size; ++a) {
          if (!used[a] && pick-- == 0) {
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
      }

      if (annealing) temperature = std::max(temperature * hyper.temperature_decay, hyper.temperature_floor);

      masks.counts_for(proposal, proposal_counts);
      if (!rates_non_increasing(smoothed_rates(proposal_counts, hyper))) continue;

      const double proposal_score = score_counts(proposal.size(), proposal_counts, hyper);
      const double delta = annealing ? (proposal_score - score) / temperature
                                     : proposal_score - score + log_fwd_correction;
      if (delta >= 0.0 || rng.uniform() < std::exp(delta)) {
        for (int32_t id : ids) used[static_cast<size_t>(id)] = 0;
        for (int32_t id : proposal) used[static_cast<size_t>(id)] = 1;
        ids = proposal;
        score = proposal_score;
        if (score > best.score) best = {ids, score};
      }
    }
    per_restart[restart] = std::move(best);
  });

  size_t winner = 0;
  for (size_t r = 1; r < per_restart.size(); ++r) {
    if (per_restart[r].score > per_restart[winner].score) winner = r;
  }
  std::vector<Itemset> antecedents;
  for (int32_t id : per_restart[winner].ids) antecedents.push_back(pool[static_cast<size_t>(id)]);
  return make_falling_list(std::move(antecedents), ds, hyper);
}

FrlPrediction frl_predict(const FallingRuleList& list, std::span<const int32_t> row) {
  if (list.risks.size() != list.antecedents.size() + 1) {
    throw std::invalid_argument("frl_predict: risks not populated");
  }
  for (size_t j = 0; j < list.antecedents.size(); ++j) {
    bool matches = true;
    for (const Item& item : list.antecedents[j].items) {
      if (row[static_cast<size_t>(item.feature)] != item.category) {
        matches = false;
        break;
      }
    }
    if (matches) return {list.risks[j], j};
  }
  return {list.risks.back(), list.default_index()};
}

std::string render_falling_list(const FallingRuleList& list, const FeatureSchema& schema) {
  if (list.risks.size() != list.antecedents.size() + 1 ||
      list.supports.size() != list.risks.size()) {
    throw std::invalid_argument("render: list not populated");
  }
  std::ostringstream out;
  for (size_t j = 0; j <= list.antecedents.size(); ++j) {
    if (j < list.antecedents.size()) {
      out << (j == 0 ? "IF " : "ELSE IF ") << list.antecedents[j].describe(schema) << " THEN ";
    } else {
      out << "ELSE ";
    }
    out << "probability of survival > 1 yr: " << static_cast<int>(std::lround(list.risks[j] * 100.0))
        << "% | support: " << list.supports[j] << '\n';
  }
  return out.str();
}

std::string falling_list_to_json(const FallingRuleList& list, const FeatureSchema& schema) {
  json rules = json::array();
  for (size_t j = 0; j <= list.antecedents.size(); ++j) {
    json items = json::array();
    if (j < list.antecedents.size()) {
      for (const Item& item : list.antecedents[j].items) {
        const Feature& f = schema.features[static_cast<size_t>(item.feature)];
        items.push_back({{"feature", f.name},
                         {"category", f.categories[static_cast<size_t>(item.category)]}});
      }
    }
    rules.push_back({{"items", items},
                     {"risk", list.risks[j]},
                     {"support", list.supports[j]},
                     {"n_neg", list.counts[j][0]},
                     {"n_pos", list.counts[j][1]}});
  }
  json doc;
  doc["type"] = "frl";
  doc["rules"] = rules;
  return doc.dump(2);
}

FallingRuleList falling_list_from_json(const std::string& text, const FeatureSchema& schema) {
  json doc = json::parse(text);
  FallingRuleList list;
  const json& rules = doc.at("rules");
  if (rules.empty()) throw std::invalid_argument("falling list JSON: missing default rule");
  for (size_t j = 0; j < rules.size(); ++j) {
    const json& jr = rules[j];
    if (j + 1 < rules.size()) {
      std::vector<Item> items;
      for (const json& ji : jr.at("items")) {
        const int f = schema.feature_index(ji.at("feature").get<std::string>());
        if (f < 0) throw std::invalid_argument("falling list JSON: unknown feature");
        const int c = schema.features[static_cast<size_t>(f)].category_index(
            ji.at("category").get<std::string>());
        if (c < 0) throw std::invalid_argument("falling list JSON: unknown category");
        items.push_back({f, c});
      }
      list.antecedents.push_back(Itemset::of(std::move(items)));
    }
    list.risks.push_back(jr.at("risk").get<double>());
    list.supports.push_back(jr.at("support").get<int64_t>());
    list.counts.push_back({jr.at("n_neg").get<int64_t>(), jr.at("n_pos").get<int64_t>()});
  }
  if (!list.monotone()) throw std::invalid_argument("falling list JSON: risks not non-increasing");
  return list;
}

}  // namespace rulekit
