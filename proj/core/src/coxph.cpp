#include "rulekit/coxph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "rulekit/rng.hpp"
#include "rulekit/stats.hpp"
#include "linalg.hpp"

namespace rulekit {

using nlohmann::json;

std::pair<std::vector<SurvivalRow>, std::vector<std::string>> survival_design(
    const CategoricalDataset& ds) {
  std::vector<std::string> names;
  for (const Feature& f : ds.schema.features) {
    for (size_t c = 1; c < f.categories.size(); ++c) {  // first category dropped
      names.push_back(f.name + ": " + f.categories[c]);
    }
  }
  std::vector<SurvivalRow> rows(ds.n_rows());
  for (size_t r = 0; r < ds.n_rows(); ++r) {
    SurvivalRow& row = rows[r];
    row.covariates.assign(names.size(), 0.0);
    size_t offset = 0;
    for (size_t f = 0; f < ds.n_features(); ++f) {
      const int32_t c = ds.category(r, f);
      if (c > 0) row.covariates[offset + static_cast<size_t>(c) - 1] = 1.0;
      offset += ds.schema.features[f].categories.size() - 1;
    }
    row.time = static_cast<double>(ds.survival_days[r]);
    row.event = ds.event_observed[r] != 0;
  }
  return {std::move(rows), std::move(names)};
}

namespace {

struct SortedCox {
  std::vector<size_t> order;                 // rows by ascending time
  std::vector<std::pair<size_t, size_t>> event_groups;  // [begin, end) in order, events only
  size_t n_cols = 0;

  explicit SortedCox(std::span<const SurvivalRow> rows) {
    if (rows.empty()) throw std::invalid_argument("cox: no rows");
    n_cols = rows[0].covariates.size();
    order.resize(rows.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      return rows[a].time < rows[b].time;
    });
    bool any_event = false;
    for (const SurvivalRow& row : rows) {
      if (!(row.time > 0.0)) throw std::invalid_argument("cox: times must be positive");
      if (row.covariates.size() != n_cols) throw std::invalid_argument("cox: ragged covariates");
      any_event |= row.event;
    }
    if (!any_event) throw std::invalid_argument("cox: at least one observed event required");
    // Tied event times share one Breslow group.
    size_t i = 0;
    while (i < order.size()) {
      size_t j = i;
      while (j < order.size() && rows[order[j]].time == rows[order[i]].time) ++j;
      size_t first_event = j;
      for (size_t k = i; k < j; ++k) {
        if (rows[order[k]].event) {
          first_event = k;
          break;
        }
      }
      if (first_event < j) {
        // compact the events of this time into a group by index list
        event_groups.emplace_back(i, j);
      }
      i = j;
    }
  }
};

struct CoxStats {
  double ll = 0.0;
  std::vector<double> grad;
  std::vector<double> info;  // negative Hessian, row-major
};

// One sweep from the largest time down, accumulating risk-set sums.
CoxStats cox_stats(std::span<const SurvivalRow> rows, const SortedCox& sorted,
                   std::span<const double> beta, bool with_derivatives) {
  const size_t p = sorted.n_cols;
  CoxStats stats;
  if (with_derivatives) {
    stats.grad.assign(p, 0.0);
    stats.info.assign(p * p, 0.0);
  }
  std::vector<double> eta(rows.size());
  for (size_t r = 0; r < rows.size(); ++r) {
    double v = 0.0;
    for (size_t c = 0; c < p; ++c) v += beta[c] * rows[r].covariates[c];
    eta[r] = v;
  }
  double s0 = 0.0;
  std::vector<double> s1(p, 0.0);
  std::vector<double> s2;
  if (with_derivatives) s2.assign(p * p, 0.0);

  size_t cursor = sorted.order.size();
  auto absorb_down_to = [&](size_t begin) {
    while (cursor > begin) {
      --cursor;
      const SurvivalRow& row = rows[sorted.order[cursor]];
      const double w = std::exp(eta[sorted.order[cursor]]);
      s0 += w;
      for (size_t c = 0; c < p; ++c) s1[c] += w * row.covariates[c];
      if (with_derivatives) {
        for (size_t a = 0; a < p; ++a) {
          if (row.covariates[a] == 0.0) continue;
          const double wa = w * row.covariates[a];
          for (size_t b = 0; b < p; ++b) s2[a * p + b] += wa * row.covariates[b];
        }
      }
    }
  };

  for (auto it = sorted.event_groups.rbegin(); it != sorted.event_groups.rend(); ++it) {
    const auto [begin, end] = *it;
    absorb_down_to(begin);
    double d = 0.0;
    for (size_t k = begin; k < end; ++k) {
      const size_t r = sorted.order[k];
      if (!rows[r].event) continue;
      d += 1.0;
      stats.ll += eta[r];
      if (with_derivatives) {
        for (size_t c = 0; c < p; ++c) stats.grad[c] += rows[r].covariates[c];
      }
    }
    stats.ll -= d * std::log(s0);
    if (with_derivatives) {
      for (size_t a = 0; a < p; ++a) {
        const double mean_a = s1[a] / s0;
        stats.grad[a] -= d * mean_a;
        for (size_t b = 0; b < p; ++b) {
          stats.info[a * p + b] += d * (s2[a * p + b] / s0 - mean_a * s1[b] / s0);
        }
      }
    }
  }
  return stats;
}

}  // namespace

double cox_partial_log_likelihood(std::span<const SurvivalRow> rows, std::span<const double> beta) {
  SortedCox sorted(rows);
  if (beta.size() != sorted.n_cols) throw std::invalid_argument("cox: beta size mismatch");
  return cox_stats(rows, sorted, beta, false).ll;
}

CoxModel cox_fit(std::span<const SurvivalRow> rows, double penalizer,
                 std::vector<std::string> column_names) {
  if (penalizer < 0.0) throw std::invalid_argument("cox_fit: penalizer must be non-negative");
  SortedCox sorted(rows);
  const size_t p = sorted.n_cols;
  if (!column_names.empty() && column_names.size() != p) {
    throw std::invalid_argument("cox_fit: column name count mismatch");
  }
  if (penalizer == 0.0) {
    for (size_t c = 0; c < p; ++c) {
      const double first = rows[0].covariates[c];
      bool constant = true;
      for (const SurvivalRow& row : rows) {
        if (row.covariates[c] != first) {
          constant = false;
          break;
        }
      }
      if (constant) {
        throw std::invalid_argument("cox_fit: column " + std::to_string(c) +
                                    " is constant and penalizer is 0");
      }
    }
  }

  std::vector<double> beta(p, 0.0);
  auto penalized_ll = [&](std::span<const double> b) {
    double pen = 0.0;
    for (double v : b) pen += v * v;
    return cox_stats(rows, sorted, b, false).ll - 0.5 * penalizer * pen;
  };

  double current_ll = penalized_ll(beta);
  bool converged = p == 0;
  double last_grad_norm = 0.0;
  for (int iter = 0; iter < 100 && !converged; ++iter) {
    CoxStats stats = cox_stats(rows, sorted, beta, true);
    for (size_t c = 0; c < p; ++c) stats.grad[c] -= penalizer * beta[c];
    for (size_t c = 0; c < p; ++c) stats.info[c * p + c] += penalizer;
    last_grad_norm = 0.0;
    for (double g : stats.grad) last_grad_norm += g * g;
    last_grad_norm = std::sqrt(last_grad_norm);

    std::vector<double> delta = stats.grad;
    detail::cholesky_solve_in_place(stats.info, delta, p);

    double step = 1.0;
    std::vector<double> candidate(p);
    bool stepped = false;
    for (int halving = 0; halving < 40; ++halving) {
      for (size_t c = 0; c < p; ++c) candidate[c] = beta[c] + step * delta[c];
      const double cand_ll = penalized_ll(candidate);
      if (std::isfinite(cand_ll) && cand_ll >= current_ll - 1e-13) {
        double max_move = 0.0;
        for (size_t c = 0; c < p; ++c) max_move = std::max(max_move, std::fabs(step * delta[c]));
        beta = candidate;
        current_ll = cand_ll;
        stepped = true;
        if (max_move < 1e-7) converged = true;
        break;
      }
      step *= 0.5;
    }
    if (!stepped) break;
  }
  if (!converged) {
    throw std::runtime_error("cox_fit: no convergence after 100 iterations, |grad| = " +
                             std::to_string(last_grad_norm));
  }

  CoxModel model;
  model.penalizer = penalizer;
  model.beta = beta;
  model.column_names = column_names.empty() ? [&] {
    std::vector<std::string> names;
    for (size_t c = 0; c < p; ++c) names.push_back("x" + std::to_string(c));
    return names;
  }() : std::move(column_names);

  // Breslow baseline cumulative hazard at observed event times.
  std::vector<double> weights(rows.size());
  for (size_t r = 0; r < rows.size(); ++r) {
    double v = 0.0;
    for (size_t c = 0; c < p; ++c) v += beta[c] * rows[r].covariates[c];
    weights[r] = std::exp(v);
  }
  double s0 = 0.0;
  size_t cursor = sorted.order.size();
  std::vector<std::pair<double, double>> increments;  // (time, d / s0), descending time
  for (auto it = sorted.event_groups.rbegin(); it != sorted.event_groups.rend(); ++it) {
    const auto [begin, end] = *it;
    while (cursor > begin) {
      --cursor;
      s0 += weights[sorted.order[cursor]];
    }
    double d = 0.0;
    for (size_t k = begin; k < end; ++k) {
      if (rows[sorted.order[k]].event) d += 1.0;
    }
    increments.emplace_back(rows[sorted.order[begin]].time, d / s0);
  }
  std::reverse(increments.begin(), increments.end());
  double cum = 0.0;
  for (const auto& [t, h] : increments) {
    cum += h;
    model.baseline_cumhaz.emplace_back(t, cum);
  }
  return model;
}

double select_penalizer(std::span<const SurvivalRow> rows, std::span<const double> grid,
                        uint64_t seed, int folds) {
  if (grid.empty()) throw std::invalid_argument("select_penalizer: empty grid");
  if (folds < 2) throw std::invalid_argument("select_penalizer: need at least 2 folds");
  std::vector<size_t> order(rows.size());
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(seed);
  rng.shuffle(order);

  double best = 0.0, best_score = 0.0;
  bool any = false;
  for (double penalizer : grid) {
    double total = 0.0;
    bool ok = true;
    for (int f = 0; f < folds && ok; ++f) {
      std::vector<SurvivalRow> train, test;
      for (size_t i = 0; i < order.size(); ++i) {
        (static_cast<int>(i % static_cast<size_t>(folds)) == f ? test : train)
            .push_back(rows[order[i]]);
      }
      try {
        const CoxModel model = cox_fit(train, penalizer);
        bool test_has_event = false;
        for (const SurvivalRow& row : test) test_has_event |= row.event;
        total += test_has_event ? cox_partial_log_likelihood(test, model.beta) : 0.0;
      } catch (const std::exception&) {
        ok = false;  // candidate disqualified
      }
    }
    if (!ok) continue;
    const double score = total / static_cast<double>(folds);
    if (!any || score > best_score || (score == best_score && penalizer > best)) {
      any = true;
      best = penalizer;
      best_score = score;
    }
  }
  if (!any) throw std::runtime_error("select_penalizer: every candidate failed");
  return best;
}

double cox_predict_survival_days(const CoxModel& model, std::span<const double> covariates) {
  if (covariates.size() != model.beta.size()) {
    throw std::invalid_argument("cox predict: covariate size mismatch");
  }
  if (model.baseline_cumhaz.empty()) throw std::invalid_argument("cox predict: model not fitted");
  double eta = 0.0;
  for (size_t c = 0; c < covariates.size(); ++c) eta += model.beta[c] * covariates[c];
  const double scale = std::exp(eta);
  for (const auto& [t, h0] : model.baseline_cumhaz) {
    if (std::exp(-h0 * scale) <= 0.5) return t;
  }
  return model.baseline_cumhaz.back().first + 1.0;  // survived past the horizon
}

std::vector<CoxImportanceEntry> cox_importance(std::span<const CoxModel> models) {
  if (models.empty()) throw std::invalid_argument("cox_importance: no models");
  const size_t p = models[0].beta.size();
  for (const CoxModel& m : models) {
    if (m.beta.size() != p) throw std::invalid_argument("cox_importance: column mismatch");
  }
  std::vector<CoxImportanceEntry> all(p);
  for (size_t c = 0; c < p; ++c) {
    std::vector<double> values;
    values.reserve(models.size());
    for (const CoxModel& m : models) values.push_back(m.beta[c]);
    all[c].column = models[0].column_names[c];
    all[c].mean = mean(values);
    all[c].std_dev = sample_std(values);
  }
  std::vector<size_t> idx(p);
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return all[a].mean < all[b].mean; });

  const size_t take = std::min<size_t>(5, p);
  std::vector<CoxImportanceEntry> out;
  std::vector<uint8_t> used(p, 0);
  for (size_t i = 0; i < take; ++i) {  // most negative, ascending
    out.push_back(all[idx[i]]);
    used[idx[i]] = 1;
  }
  for (size_t i = 0; i < take; ++i) {  // most positive, descending
    const size_t j = idx[p - 1 - i];
    if (used[j]) continue;
    out.push_back(all[j]);
    used[j] = 1;
  }
  return out;
}

std::string cox_importance_to_json(std::span<const CoxImportanceEntry> entries) {
  json doc = json::array();
  for (const CoxImportanceEntry& e : entries) {
    doc.push_back({{"column", e.column}, {"mean", e.mean}, {"std", e.std_dev}});
  }
  return doc.dump(2);
}

std::string CoxModel::to_json() const {
  json doc;
  doc["type"] = "cox";
  doc["penalizer"] = penalizer;
  doc["columns"] = column_names;
  doc["beta"] = beta;
  json baseline = json::array();
  for (const auto& [t, h] : baseline_cumhaz) baseline.push_back({{"time", t}, {"cumhaz", h}});
  doc["baseline_cumhaz"] = baseline;
  return doc.dump(2);
}

CoxModel CoxModel::from_json(const std::string& text) {
  json doc = json::parse(text);
  CoxModel model;
  model.penalizer = doc.at("penalizer").get<double>();
  model.column_names = doc.at("columns").get<std::vector<std::string>>();
  model.beta = doc.at("beta").get<std::vector<double>>();
  for (const json& jb : doc.at("baseline_cumhaz")) {
    model.baseline_cumhaz.emplace_back(jb.at("time").get<double>(), jb.at("cumhaz").get<double>());
  }
  return model;
}

}  // namespace rulekit
