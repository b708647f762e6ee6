#include "rulekit/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "rulekit/eval.hpp"
#include "rulekit/rng.hpp"
#include "rulekit/stats.hpp"
#include "linalg.hpp"

namespace rulekit {

using nlohmann::json;

RawColumn RawColumn::continuous_column(std::string name, std::vector<std::optional<double>> values,
                                       std::optional<std::pair<double, double>> bounds) {
  RawColumn col;
  col.name = std::move(name);
  col.kind = Kind::continuous;
  col.numeric = std::move(values);
  col.bounds = bounds;
  col.validate();
  return col;
}

RawColumn RawColumn::categorical_column(std::string name,
                                        std::vector<std::optional<std::string>> values) {
  RawColumn col;
  col.name = std::move(name);
  col.kind = Kind::categorical;
  col.category = std::move(values);
  return col;
}

size_t RawColumn::present_count() const {
  size_t n = 0;
  if (kind == Kind::continuous) {
    for (const auto& v : numeric) n += v.has_value();
  } else {
    for (const auto& v : category) n += v.has_value();
  }
  return n;
}

void RawColumn::validate() const {
  if (kind == Kind::continuous && bounds) {
    for (const auto& v : numeric) {
      if (v && (*v < bounds->first || *v > bounds->second)) {
        throw std::invalid_argument("column '" + name + "': value " + std::to_string(*v) +
                                    " outside declared bounds");
      }
    }
  }
}

RawColumn impute_baseline(const RawColumn& col) {
  if (col.present_count() == 0) {
    throw std::invalid_argument("impute_baseline: column '" + col.name + "' has no present values");
  }
  RawColumn out = col;
  if (col.kind == RawColumn::Kind::continuous) {
    double sum = 0.0;
    size_t n = 0;
    for (const auto& v : col.numeric) {
      if (v) {
        sum += *v;
        ++n;
      }
    }
    const double fill = sum / static_cast<double>(n);
    for (auto& v : out.numeric) {
      if (!v) v = fill;
    }
  } else {
    std::map<std::string, size_t> counts;
    for (const auto& v : col.category) {
      if (v) ++counts[*v];
    }
    // ties resolve to the lexicographically smallest category; std::map
    // iterates in that order, so the first maximum wins
    std::string fill;
    size_t best = 0;
    for (const auto& [cat, count] : counts) {
      if (count > best) {
        best = count;
        fill = cat;
      }
    }
    for (auto& v : out.category) {
      if (!v) v = fill;
    }
  }
  return out;
}

namespace {

struct PredictorView {
  const RawColumn* col;
  double lo = 0.0, range = 1.0;  // min-max scale for continuous predictors
};

std::vector<PredictorView> predictor_views(std::span<const RawColumn> predictors, size_t n_rows,
                                           bool normalize) {
  std::vector<PredictorView> views;
  for (const RawColumn& p : predictors) {
    if (p.size() != n_rows) throw std::invalid_argument("imputation: predictor length mismatch");
    if (!p.complete()) {
      throw std::invalid_argument("imputation: predictor '" + p.name + "' has missing values");
    }
    PredictorView view{&p};
    if (p.kind == RawColumn::Kind::continuous && normalize) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (const auto& v : p.numeric) {
        lo = std::min(lo, *v);
        hi = std::max(hi, *v);
      }
      view.lo = lo;
      view.range = hi > lo ? hi - lo : 1.0;
    }
    views.push_back(view);
  }
  return views;
}

double row_distance(const std::vector<PredictorView>& views, size_t a, size_t b) {
  double d = 0.0;
  for (const PredictorView& view : views) {
    if (view.col->kind == RawColumn::Kind::categorical) {
      d += *view.col->category[a] == *view.col->category[b] ? 0.0 : 1.0;
    } else {
      const double va = (*view.col->numeric[a] - view.lo) / view.range;
      const double vb = (*view.col->numeric[b] - view.lo) / view.range;
      d += (va - vb) * (va - vb);
    }
  }
  return d;
}

}  // namespace

RawColumn impute_knn(const RawColumn& target, std::span<const RawColumn> predictors, int k,
                     bool normalize) {
  const size_t n = target.size();
  if (k < 1) throw std::invalid_argument("impute_knn: k must be positive");
  std::vector<size_t> donors;
  for (size_t r = 0; r < n; ++r) {
    const bool present = target.kind == RawColumn::Kind::continuous
                             ? target.numeric[r].has_value()
                             : target.category[r].has_value();
    if (present) donors.push_back(r);
  }
  if (donors.empty()) throw std::invalid_argument("impute_knn: no rows with the target present");
  if (static_cast<size_t>(k) > donors.size()) {
    throw std::invalid_argument("impute_knn: k exceeds the " + std::to_string(donors.size()) +
                                " rows with the target present");
  }
  const auto views = predictor_views(predictors, n, normalize);

  RawColumn out = target;
  std::vector<std::pair<double, size_t>> ranked;  // (distance, donor row)
  for (size_t r = 0; r < n; ++r) {
    const bool missing = target.kind == RawColumn::Kind::continuous
                             ? !target.numeric[r].has_value()
                             : !target.category[r].has_value();
    if (!missing) continue;
    ranked.clear();
    for (size_t d : donors) ranked.emplace_back(row_distance(views, r, d), d);
    std::sort(ranked.begin(), ranked.end());  // distance, then lower row index
    if (target.kind == RawColumn::Kind::continuous) {
      double sum = 0.0;
      for (int i = 0; i < k; ++i) sum += *target.numeric[ranked[static_cast<size_t>(i)].second];
      out.numeric[r] = sum / static_cast<double>(k);
    } else {
      std::map<std::string, int> votes;
      for (int i = 0; i < k; ++i) ++votes[*target.category[ranked[static_cast<size_t>(i)].second]];
      std::string winner;
      int best = 0;
      for (const auto& [cat, count] : votes) {  // map order breaks ties lexicographically
        if (count > best) {
          best = count;
          winner = cat;
        }
      }
      out.category[r] = winner;
    }
  }
  return out;
}

namespace {

// One-hot design over the predictors plus a trailing intercept column.
struct Design {
  std::vector<double> x;  // row-major
  size_t width = 0;
};

Design build_design(std::span<const RawColumn> predictors, size_t n_rows) {
  std::vector<std::vector<std::string>> categories(predictors.size());
  size_t width = 1;  // intercept
  for (size_t p = 0; p < predictors.size(); ++p) {
    if (predictors[p].kind == RawColumn::Kind::categorical) {
      std::set<std::string> uniq;
      for (const auto& v : predictors[p].category) uniq.insert(*v);
      categories[p].assign(uniq.begin(), uniq.end());
      width += categories[p].size();
    } else {
      width += 1;
    }
  }
  Design design;
  design.width = width;
  design.x.assign(n_rows * width, 0.0);
  for (size_t r = 0; r < n_rows; ++r) {
    double* row = design.x.data() + r * width;
    size_t c = 0;
    for (size_t p = 0; p < predictors.size(); ++p) {
      if (predictors[p].kind == RawColumn::Kind::categorical) {
        const auto& cats = categories[p];
        const auto it = std::lower_bound(cats.begin(), cats.end(), *predictors[p].category[r]);
        row[c + static_cast<size_t>(it - cats.begin())] = 1.0;
        c += cats.size();
      } else {
        row[c++] = *predictors[p].numeric[r];
      }
    }
    row[width - 1] = 1.0;
  }
  return design;
}

// (X^T X + 1e-8 I) beta = X^T y over the given rows.
std::vector<double> ridge_solve(const Design& design, std::span<const size_t> rows,
                                const std::vector<double>& y) {
  const size_t w = design.width;
  std::vector<double> gram(w * w, 0.0), moment(w, 0.0);
  for (size_t i = 0; i < rows.size(); ++i) {
    const double* row = design.x.data() + rows[i] * w;
    for (size_t a = 0; a < w; ++a) {
      if (row[a] == 0.0) continue;
      moment[a] += row[a] * y[i];
      for (size_t b = 0; b < w; ++b) gram[a * w + b] += row[a] * row[b];
    }
  }
  for (size_t a = 0; a < w; ++a) gram[a * w + a] += 1e-8;
  try {
    detail::cholesky_solve_in_place(gram, moment, w);
  } catch (const std::exception&) {
    throw std::runtime_error("impute_regression: design is rank-deficient beyond the stabilizer");
  }
  return moment;
}

}  // namespace

RawColumn impute_regression(const RawColumn& target, std::span<const RawColumn> predictors) {
  const size_t n = target.size();
  std::vector<size_t> present, missing;
  for (size_t r = 0; r < n; ++r) {
    const bool has = target.kind == RawColumn::Kind::continuous ? target.numeric[r].has_value()
                                                                : target.category[r].has_value();
    (has ? present : missing).push_back(r);
  }
  if (present.size() < predictors.size() + 1) {
    throw std::invalid_argument("impute_regression: needs at least " +
                                std::to_string(predictors.size() + 1) + " present rows");
  }
  (void)predictor_views(predictors, n, false);  // completeness / length checks
  const Design design = build_design(predictors, n);

  RawColumn out = target;
  if (target.kind == RawColumn::Kind::continuous) {
    std::vector<double> y;
    y.reserve(present.size());
    for (size_t r : present) y.push_back(*target.numeric[r]);
    const std::vector<double> beta = ridge_solve(design, present, y);
    for (size_t r : missing) {
      const double* row = design.x.data() + r * design.width;
      double v = 0.0;
      for (size_t c = 0; c < design.width; ++c) v += beta[c] * row[c];
      out.numeric[r] = v;
    }
  } else {
    std::set<std::string> uniq;
    for (size_t r : present) uniq.insert(*target.category[r]);
    const std::vector<std::string> cats(uniq.begin(), uniq.end());
    std::vector<std::vector<double>> betas;
    for (const std::string& cat : cats) {
      std::vector<double> y;
      y.reserve(present.size());
      for (size_t r : present) y.push_back(*target.category[r] == cat ? 1.0 : 0.0);
      betas.push_back(ridge_solve(design, present, y));
    }
    for (size_t r : missing) {
      const double* row = design.x.data() + r * design.width;
      size_t best = 0;
      double best_score = -std::numeric_limits<double>::infinity();
      for (size_t c = 0; c < cats.size(); ++c) {
        double score = 0.0;
        for (size_t j = 0; j < design.width; ++j) score += betas[c][j] * row[j];
        if (score > best_score) {  // ties keep the lexicographically first category
          best_score = score;
          best = c;
        }
      }
      out.category[r] = cats[best];
    }
  }
  return out;
}

std::string ImputerCandidate::label() const {
  switch (method) {
    case Method::baseline:
      return "baseline";
    case Method::knn:
      return "knn(k=" + std::to_string(k) + (normalize ? ",normalized)" : ",raw)");
    case Method::regression:
      return "regression";
  }
  return "?";
}

std::vector<ImputerCandidate> default_imputer_candidates() {
  return {{ImputerCandidate::Method::baseline},
          {ImputerCandidate::Method::knn, 5, true},
          {ImputerCandidate::Method::knn, 5, false},
          {ImputerCandidate::Method::regression}};
}

ImputerSelection select_imputer(const RawColumn& col, std::span<const RawColumn> predictors,
                                std::span<const ImputerCandidate> candidates, uint64_t seed) {
  if (candidates.empty()) throw std::invalid_argument("select_imputer: no candidates");
  const bool continuous = col.kind == RawColumn::Kind::continuous;
  std::vector<size_t> present;
  for (size_t r = 0; r < col.size(); ++r) {
    const bool has = continuous ? col.numeric[r].has_value() : col.category[r].has_value();
    if (has) present.push_back(r);
  }
  if (present.size() < 10) {
    throw std::invalid_argument("select_imputer: needs at least 10 present rows");
  }
  Rng rng(seed);
  rng.shuffle(present);
  constexpr int kFolds = 10;

  auto run_candidate = [&](const ImputerCandidate& candidate, const RawColumn& masked,
                           std::span<const size_t> held_out) {
    RawColumn filled;
    switch (candidate.method) {
      case ImputerCandidate::Method::baseline:
        filled = impute_baseline(masked);
        break;
      case ImputerCandidate::Method::knn:
        filled = impute_knn(masked, predictors, candidate.k, candidate.normalize);
        break;
      case ImputerCandidate::Method::regression:
        filled = impute_regression(masked, predictors);
        break;
    }
    if (continuous) {
      double mse = 0.0;
      for (size_t r : held_out) {
        const double err = *filled.numeric[r] - *col.numeric[r];
        mse += err * err;
      }
      return mse / static_cast<double>(held_out.size());
    }
    size_t correct = 0;
    for (size_t r : held_out) correct += *filled.category[r] == *col.category[r];
    return static_cast<double>(correct) / static_cast<double>(held_out.size());
  };

  ImputerSelection selection;
  for (const ImputerCandidate& candidate : candidates) {
    ImputerCandidateReport report;
    report.candidate = candidate;
    for (int f = 0; f < kFolds && !report.disqualified; ++f) {
      std::vector<size_t> held_out;
      for (size_t i = 0; i < present.size(); ++i) {
        if (static_cast<int>(i % kFolds) == f) held_out.push_back(present[i]);
      }
      if (held_out.empty()) continue;
      RawColumn masked = col;
      for (size_t r : held_out) {
        if (continuous) {
          masked.numeric[r].reset();
        } else {
          masked.category[r].reset();
        }
      }
      try {
        report.fold_scores.push_back(run_candidate(candidate, masked, held_out));
      } catch (const std::exception& e) {
        report.disqualified = true;
        report.error = e.what();
      }
    }
    if (!report.disqualified) report.mean_score = mean(report.fold_scores);
    selection.reports.push_back(std::move(report));
  }

  auto method_rank = [](ImputerCandidate::Method m) {
    switch (m) {
      case ImputerCandidate::Method::baseline:
        return 0;
      case ImputerCandidate::Method::knn:
        return 1;
      case ImputerCandidate::Method::regression:
        return 2;
    }
    return 3;
  };
  int best = -1;
  for (size_t i = 0; i < selection.reports.size(); ++i) {
    const ImputerCandidateReport& report = selection.reports[i];
    if (report.disqualified) continue;
    if (best < 0) {
      best = static_cast<int>(i);
      continue;
    }
    const ImputerCandidateReport& incumbent = selection.reports[static_cast<size_t>(best)];
    const bool better = continuous ? report.mean_score < incumbent.mean_score
                                   : report.mean_score > incumbent.mean_score;
    const bool tie = report.mean_score == incumbent.mean_score;
    if (better || (tie && method_rank(report.candidate.method) <
                              method_rank(incumbent.candidate.method))) {
      best = static_cast<int>(i);
    }
  }
  if (best < 0) throw std::runtime_error("select_imputer: every candidate was disqualified");
  selection.reports[static_cast<size_t>(best)].chosen = true;
  selection.chosen = selection.reports[static_cast<size_t>(best)].candidate;
  selection.score = selection.reports[static_cast<size_t>(best)].mean_score;
  return selection;
}

std::string ImputerSelection::to_json() const {
  json doc = json::array();
  for (const ImputerCandidateReport& report : reports) {
    json entry = {{"candidate", report.candidate.label()},
                  {"fold_scores", report.fold_scores},
                  {"mean", report.mean_score},
                  {"chosen", report.chosen}};
    if (report.disqualified) entry["disqualified"] = report.error;
    doc.push_back(entry);
  }
  return doc.dump(2);
}

// --- Discretisation -----------------------------------------------------------------

const char* method_name(Discretiser::Method m) {
  switch (m) {
    case Discretiser::Method::uniform:
      return "uniform";
    case Discretiser::Method::quantile:
      return "quantile";
    case Discretiser::Method::kmeans:
      return "kmeans";
  }
  return "?";
}

int Discretiser::apply(double value) const {
  const auto it = std::upper_bound(cut_points.begin(), cut_points.end(), value);
  return static_cast<int>(it - cut_points.begin());
}

namespace {

std::string trim_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::vector<std::string> Discretiser::bin_labels() const {
  std::vector<std::string> labels;
  for (int b = 0; b < bin_count; ++b) {
    if (b == 0) {
      labels.push_back("<" + trim_number(cut_points.front()));
    } else if (b == bin_count - 1) {
      labels.push_back(">=" + trim_number(cut_points.back()));
    } else {
      labels.push_back("[" + trim_number(cut_points[static_cast<size_t>(b) - 1]) + "," +
                       trim_number(cut_points[static_cast<size_t>(b)]) + ")");
    }
  }
  return labels;
}

Discretiser fit_discretiser(std::span<const double> values, Discretiser::Method method,
                            int bin_count) {
  if (bin_count < 2) throw std::invalid_argument("fit_discretiser: need at least 2 bins");
  if (values.empty()) throw std::invalid_argument("fit_discretiser: empty column");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  Discretiser d;
  d.method = method;
  d.bin_count = bin_count;
  switch (method) {
    case Discretiser::Method::uniform: {
      const double lo = sorted.front(), hi = sorted.back();
      if (!(hi > lo)) throw std::invalid_argument("fit_discretiser: constant column");
      for (int i = 1; i < bin_count; ++i) {
        d.cut_points.push_back(lo + (hi - lo) * static_cast<double>(i) /
                                        static_cast<double>(bin_count));
      }
      break;
    }
    case Discretiser::Method::quantile: {
      if (distinct.size() < static_cast<size_t>(bin_count)) {
        throw std::invalid_argument("fit_discretiser: fewer distinct values than bins");
      }
      const double last = static_cast<double>(sorted.size() - 1);
      for (int i = 1; i < bin_count; ++i) {
        const double pos = last * static_cast<double>(i) / static_cast<double>(bin_count);
        const size_t lo = static_cast<size_t>(std::floor(pos));
        const double frac = pos - std::floor(pos);
        const double q = lo + 1 < sorted.size() ? sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac
                                                : sorted[lo];
        d.cut_points.push_back(q);
      }
      for (size_t i = 1; i < d.cut_points.size(); ++i) {
        if (!(d.cut_points[i] > d.cut_points[i - 1])) {
          throw std::invalid_argument("fit_discretiser: quantile cuts collide (heavy ties)");
        }
      }
      break;
    }
    case Discretiser::Method::kmeans: {
      if (distinct.size() < static_cast<size_t>(bin_count)) {
        throw std::invalid_argument("fit_discretiser: fewer distinct values than bins");
      }
      // Exact 1-D k-means over distinct values with multiplicity weights.
      std::vector<double> weight(distinct.size(), 0.0);
      {
        size_t j = 0;
        for (double v : sorted) {
          while (distinct[j] != v) ++j;
          weight[j] += 1.0;
        }
      }
      const size_t n = distinct.size();
      std::vector<double> pw(n + 1, 0.0), pwx(n + 1, 0.0), pwx2(n + 1, 0.0);
      for (size_t i = 0; i < n; ++i) {
        pw[i + 1] = pw[i] + weight[i];
        pwx[i + 1] = pwx[i] + weight[i] * distinct[i];
        pwx2[i + 1] = pwx2[i] + weight[i] * distinct[i] * distinct[i];
      }
      auto sse = [&](size_t lo, size_t hi) {  // [lo, hi)
        const double w = pw[hi] - pw[lo];
        const double sx = pwx[hi] - pwx[lo];
        return (pwx2[hi] - pwx2[lo]) - sx * sx / w;
      };
      const size_t k = static_cast<size_t>(bin_count);
      constexpr double kInf = std::numeric_limits<double>::infinity();
      std::vector<std::vector<double>> cost(k + 1, std::vector<double>(n + 1, kInf));
      std::vector<std::vector<size_t>> split(k + 1, std::vector<size_t>(n + 1, 0));
      cost[0][0] = 0.0;
      for (size_t c = 1; c <= k; ++c) {
        for (size_t i = c; i <= n; ++i) {
          for (size_t j = c - 1; j < i; ++j) {
            const double candidate = cost[c - 1][j] + sse(j, i);
            if (candidate < cost[c][i]) {
              cost[c][i] = candidate;
              split[c][i] = j;
            }
          }
        }
      }
      std::vector<size_t> boundaries;  // start index of each cluster, reversed
      size_t end = n;
      for (size_t c = k; c >= 1; --c) {
        boundaries.push_back(split[c][end]);
        end = split[c][end];
      }
      std::reverse(boundaries.begin(), boundaries.end());
      for (size_t c = 1; c < k; ++c) {
        const size_t start = boundaries[c];
        d.cut_points.push_back(0.5 * (distinct[start - 1] + distinct[start]));
      }
      break;
    }
  }
  return d;
}

std::vector<int> default_bin_counts() { return {2, 4, 6, 8, 10, 12}; }

DiscretiserSelection select_discretiser(const CategoricalDataset& base, const RawColumn& column,
                                        std::span<const Discretiser::Method> methods,
                                        std::span<const int> bin_counts, const BrlHyper& brl_hyper,
                                        const MiningParams& mining, uint64_t seed) {
  if (column.kind != RawColumn::Kind::continuous) {
    throw std::invalid_argument("select_discretiser: column must be continuous");
  }
  if (!column.complete() || column.size() != base.n_rows()) {
    throw std::invalid_argument("select_discretiser: column must be complete and row-aligned");
  }
  std::vector<double> values;
  values.reserve(column.size());
  for (const auto& v : column.numeric) values.push_back(*v);

  Rng fold_rng(Rng::mix(seed, 0xd15c));
  const auto folds = stratified_folds(base.label, 5, fold_rng);

  DiscretiserSelection selection;
  size_t candidate_index = 0;
  for (Discretiser::Method method : methods) {
    for (int bins : bin_counts) {
      DiscretiserCandidateReport report;
      report.method = method;
      report.bin_count = bins;
      try {
        const Discretiser disc = fit_discretiser(values, method, bins);
        // Candidate dataset: base features plus the discretised column.
        CategoricalDataset candidate = base;
        Feature f;
        f.name = column.name;
        f.kind = FeatureKind::ordinal;
        f.categories = disc.bin_labels();
        candidate.schema.features.push_back(f);
        CategoricalDataset rebuilt;
        rebuilt.schema = candidate.schema;
        rebuilt.survival_days = base.survival_days;
        rebuilt.event_observed = base.event_observed;
        rebuilt.label = base.label;
        for (size_t r = 0; r < base.n_rows(); ++r) {
          for (size_t c = 0; c < base.n_features(); ++c) rebuilt.cells.push_back(base.category(r, c));
          rebuilt.cells.push_back(disc.apply(values[r]));
        }

        for (size_t fold = 0; fold < folds.size(); ++fold) {
          std::vector<size_t> train_rows;
          for (size_t g = 0; g < folds.size(); ++g) {
            if (g != fold) train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
          }
          std::sort(train_rows.begin(), train_rows.end());
          const CategoricalDataset train = rebuilt.subset(train_rows);
          const CategoricalDataset test = rebuilt.subset(folds[fold]);

          const std::vector<Itemset> pool = antecedent_pool(mine_antecedents(train, mining));
          BrlHyper hyper = brl_hyper;
          hyper.seed = Rng::mix(Rng::mix(seed, candidate_index), fold);
          const BrlPosterior posterior = mcmc_sample(train, pool, hyper);
          const DecisionList list = brl_point(posterior, train);
          std::vector<int> preds;
          preds.reserve(test.n_rows());
          for (size_t r = 0; r < test.n_rows(); ++r) {
            preds.push_back(predict(list, test.row(r), hyper.alpha_neg, hyper.alpha_pos).prob >= 0.5
                                ? 1
                                : 0);
          }
          report.fold_scores.push_back(accuracy(preds, test.label));
        }
        report.mean_score = mean(report.fold_scores);
      } catch (const std::exception& e) {
        report.disqualified = true;
        report.error = e.what();
      }
      selection.reports.push_back(std::move(report));
      ++candidate_index;
    }
  }

  auto method_rank = [](Discretiser::Method m) {
    switch (m) {
      case Discretiser::Method::uniform:
        return 0;
      case Discretiser::Method::quantile:
        return 1;
      case Discretiser::Method::kmeans:
        return 2;
    }
    return 3;
  };
  int best = -1;
  for (size_t i = 0; i < selection.reports.size(); ++i) {
    const DiscretiserCandidateReport& report = selection.reports[i];
    if (report.disqualified) continue;
    if (best < 0) {
      best = static_cast<int>(i);
      continue;
    }
    const DiscretiserCandidateReport& incumbent = selection.reports[static_cast<size_t>(best)];
    bool take = report.mean_score > incumbent.mean_score;
    if (report.mean_score == incumbent.mean_score) {
      if (report.bin_count != incumbent.bin_count) {
        take = report.bin_count < incumbent.bin_count;
      } else {
        take = method_rank(report.method) < method_rank(incumbent.method);
      }
    }
    if (take) best = static_cast<int>(i);
  }
  if (best < 0) throw std::runtime_error("select_discretiser: every candidate was disqualified");
  selection.reports[static_cast<size_t>(best)].chosen = true;
  selection.method = selection.reports[static_cast<size_t>(best)].method;
  selection.bin_count = selection.reports[static_cast<size_t>(best)].bin_count;
  selection.mean_accuracy = selection.reports[static_cast<size_t>(best)].mean_score;
  return selection;
}

std::string DiscretiserSelection::to_json() const {
  json doc = json::array();
  for (const DiscretiserCandidateReport& report : reports) {
    json entry = {{"candidate", std::string(method_name(report.method)) + "/" +
                                    std::to_string(report.bin_count)},
                  {"fold_scores", report.fold_scores},
                  {"mean", report.mean_score},
                  {"chosen", report.chosen}};
    if (report.disqualified) entry["disqualified"] = report.error;
    doc.push_back(entry);
  }
  return doc.dump(2);
}

// --- Raw CSV tables --------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line, size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      in_quotes = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch != '\r') {
      field += ch;
    }
  }
  if (in_quotes) throw std::invalid_argument("csv: unterminated quote on line " + std::to_string(line_no));
  fields.push_back(std::move(field));
  return fields;
}

bool parse_full_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  try {
    size_t pos = 0;
    out = std::stod(text, &pos);
    return pos == text.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

RawTable load_raw_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_raw_csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("load_raw_csv: missing header");
  const std::vector<std::string> header = split_csv_line(line, 1);

  std::vector<std::vector<std::string>> cells(header.size());
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() && in.peek() == EOF) break;
    const std::vector<std::string> fields = split_csv_line(line, line_no);
    if (fields.size() != header.size()) {
      throw std::invalid_argument("load_raw_csv: line " + std::to_string(line_no) +
                                  " has the wrong field count");
    }
    for (size_t c = 0; c < fields.size(); ++c) cells[c].push_back(fields[c]);
  }

  RawTable table;
  table.n_rows = cells.empty() ? 0 : cells[0].size();
  for (size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "survival_days" || header[c] == "event_observed") {
      const bool days = header[c] == "survival_days";
      for (size_t r = 0; r < table.n_rows; ++r) {
        const std::string& cell = cells[c][r];
        if (cell.empty()) {
          throw std::invalid_argument("load_raw_csv: outcome column '" + header[c] +
                                      "' has a missing value in row " + std::to_string(r));
        }
        if (days) {
          table.survival_days.push_back(std::stoi(cell));
        } else {
          table.event_observed.push_back(cell == "1" || cell == "true" ? 1 : 0);
        }
      }
      continue;
    }
    bool all_numeric = true;
    bool any_present = false;
    double parsed = 0.0;
    for (const std::string& cell : cells[c]) {
      if (cell.empty()) continue;
      any_present = true;
      if (!parse_full_double(cell, parsed)) {
        all_numeric = false;
        break;
      }
    }
    if (all_numeric && any_present) {
      std::vector<std::optional<double>> values;
      for (const std::string& cell : cells[c]) {
        if (cell.empty()) {
          values.push_back(std::nullopt);
        } else {
          parse_full_double(cell, parsed);
          values.push_back(parsed);
        }
      }
      table.columns.push_back(RawColumn::continuous_column(header[c], std::move(values)));
    } else {
      std::vector<std::optional<std::string>> values;
      for (const std::string& cell : cells[c]) {
        if (cell.empty()) {
          values.push_back(std::nullopt);
        } else {
          values.push_back(cell);
        }
      }
      table.columns.push_back(RawColumn::categorical_column(header[c], std::move(values)));
    }
  }
  table.has_outcome = !table.survival_days.empty() && !table.event_observed.empty();
  return table;
}

CategoricalDataset assemble_dataset(const RawTable& table,
                                    const std::map<std::string, Discretiser>& discretisers,
                                    int label_threshold_days) {
  if (!table.has_outcome) {
    throw std::invalid_argument("assemble_dataset: survival_days / event_observed required");
  }
  CategoricalDataset ds;
  std::vector<std::vector<int32_t>> columns;  // per feature, per row
  for (const RawColumn& col : table.columns) {
    if (!col.complete()) {
      throw std::invalid_argument("assemble_dataset: column '" + col.name + "' still has missing values");
    }
    Feature f;
    f.name = col.name;
    std::vector<int32_t> codes(table.n_rows);
    if (col.kind == RawColumn::Kind::categorical) {
      std::set<std::string> uniq;
      for (const auto& v : col.category) uniq.insert(*v);
      f.categories.assign(uniq.begin(), uniq.end());
      for (size_t r = 0; r < table.n_rows; ++r) {
        const auto it = std::lower_bound(f.categories.begin(), f.categories.end(), *col.category[r]);
        codes[r] = static_cast<int32_t>(it - f.categories.begin());
      }
    } else {
      const auto it = discretisers.find(col.name);
      if (it == discretisers.end()) {
        throw std::invalid_argument("assemble_dataset: no discretiser for continuous column '" +
                                    col.name + "'");
      }
      f.kind = FeatureKind::ordinal;
      f.categories = it->second.bin_labels();
      for (size_t r = 0; r < table.n_rows; ++r) {
        codes[r] = it->second.apply(*col.numeric[r]);
      }
    }
    ds.schema.features.push_back(std::move(f));
    columns.push_back(std::move(codes));
  }
  ds.schema.validate();
  for (size_t r = 0; r < table.n_rows; ++r) {
    for (const auto& col : columns) ds.cells.push_back(col[r]);
    ds.survival_days.push_back(table.survival_days[r]);
    ds.event_observed.push_back(table.event_observed[r]);
    ds.label.push_back(static_cast<uint8_t>(
        make_label(table.survival_days[r], table.event_observed[r] != 0, label_threshold_days)));
  }
  return ds;
}

}  // namespace rulekit
