#include "rulekit/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "rulekit/eval.hpp"
#include "rulekit/parallel.hpp"
#include "rulekit/rng.hpp"
#include "rulekit/stats.hpp"
#include "linalg.hpp"

namespace rulekit {

using nlohmann::json;

// --- Random forest -------------------------------------------------------------

namespace {

double gini(int64_t n0, int64_t n1) {
  const double n = static_cast<double>(n0 + n1);
  if (n == 0.0) return 0.0;
  const double p0 = static_cast<double>(n0) / n;
  const double p1 = static_cast<double>(n1) / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

struct TreeBuilder {
  const BinaryMatrix& m;
  std::span<const uint8_t> labels;
  int features_per_split;
  Rng rng;
  Tree tree;

  int32_t build(std::vector<size_t>& rows) {
    const int32_t id = static_cast<int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    int64_t n1 = 0;
    for (size_t r : rows) n1 += labels[r] ? 1 : 0;
    const int64_t n0 = static_cast<int64_t>(rows.size()) - n1;
    tree.nodes[id].n0 = n0;
    tree.nodes[id].n1 = n1;
    tree.nodes[id].p1 = rows.empty() ? 0.0
                                     : static_cast<double>(n1) / static_cast<double>(rows.size());
    if (n0 == 0 || n1 == 0) return id;  // pure

    // Random feature subset for this node.
    std::vector<size_t> candidates(m.n_cols());
    std::iota(candidates.begin(), candidates.end(), size_t{0});
    for (int i = 0; i < features_per_split; ++i) {
      const size_t j = i + static_cast<size_t>(rng.below(candidates.size() - i));
      std::swap(candidates[i], candidates[static_cast<size_t>(j)]);
    }
    candidates.resize(static_cast<size_t>(features_per_split));

    const double parent_impurity = gini(n0, n1);
    double best_gain = -1.0;
    size_t best_col = 0;
    for (size_t col : candidates) {
      int64_t l0 = 0, l1 = 0;
      for (size_t r : rows) {
        if (m.at(r, col) == 0) {
          ++(labels[r] ? l1 : l0);
        }
      }
      const int64_t left_n = l0 + l1;
      const int64_t right_n = static_cast<int64_t>(rows.size()) - left_n;
      if (left_n == 0 || right_n == 0) continue;
      const int64_t r0 = n0 - l0, r1 = n1 - l1;
      const double gain = parent_impurity -
                          (static_cast<double>(left_n) * gini(l0, l1) +
                           static_cast<double>(right_n) * gini(r0, r1)) /
                              static_cast<double>(rows.size());
      if (gain > best_gain) {
        best_gain = gain;
        best_col = col;
      }
    }
    if (best_gain < 0.0) return id;  // no usable split among the sampled features

    std::vector<size_t> left_rows, right_rows;
    for (size_t r : rows) {
      (m.at(r, best_col) == 0 ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int32_t left = build(left_rows);
    const int32_t right = build(right_rows);
    tree.nodes[id].column = static_cast<int32_t>(best_col);
    tree.nodes[id].left = left;
    tree.nodes[id].right = right;
    return id;
  }
};

double tree_proba(const Tree& tree, std::span<const uint8_t> row) {
  int32_t node = 0;
  while (tree.nodes[static_cast<size_t>(node)].column >= 0) {
    const TreeNode& n = tree.nodes[static_cast<size_t>(node)];
    node = row[static_cast<size_t>(n.column)] == 0 ? n.left : n.right;
  }
  return tree.nodes[static_cast<size_t>(node)].p1;
}

}  // namespace

double ForestModel::predict_proba(std::span<const uint8_t> row) const {
  double total = 0.0;
  for (const Tree& tree : trees) total += tree_proba(tree, row);
  return total / static_cast<double>(trees.size());
}

std::vector<double> ForestModel::predict_proba(const BinaryMatrix& m) const {
  std::vector<double> out(m.n_rows);
  for (size_t r = 0; r < m.n_rows; ++r) out[r] = predict_proba(m.row(r));
  return out;
}

std::vector<int> ForestModel::predict(const BinaryMatrix& m, double threshold) const {
  std::vector<int> out(m.n_rows);
  for (size_t r = 0; r < m.n_rows; ++r) out[r] = predict_proba(m.row(r)) >= threshold ? 1 : 0;
  return out;
}

ForestModel rf_train(const BinaryMatrix& m, std::span<const uint8_t> labels, int tree_count,
                     uint64_t seed, int threads) {
  if (m.n_rows != labels.size() || m.n_rows == 0) {
    throw std::invalid_argument("rf_train: size mismatch or empty input");
  }
  if (tree_count < 1) throw std::invalid_argument("rf_train: tree_count must be positive");
  bool has_pos = false, has_neg = false;
  for (uint8_t y : labels) (y ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) throw std::invalid_argument("rf_train: single-class labels");

  ForestModel model;
  model.tree_count = tree_count;
  model.seed = seed;
  model.n_cols = m.n_cols();
  model.features_per_split =
      std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(m.n_cols())))));
  model.trees.resize(static_cast<size_t>(tree_count));

  Rng root(seed);
  parallel_for(static_cast<size_t>(tree_count), threads, [&](size_t t) {
    Rng rng = root.stream(t);
    std::vector<size_t> rows(m.n_rows);
    for (size_t i = 0; i < m.n_rows; ++i) rows[i] = static_cast<size_t>(rng.below(m.n_rows));
    TreeBuilder builder{m, labels, model.features_per_split, rng.stream(1), {}};
    builder.build(rows);
    model.trees[t] = std::move(builder.tree);
  });
  return model;
}

ForestModel rf_fit(const BinaryMatrix& m, std::span<const uint8_t> labels,
                   std::span<const int> tree_count_grid, uint64_t seed, int threads) {
  if (tree_count_grid.empty()) throw std::invalid_argument("rf_fit: empty grid");
  int best_count = tree_count_grid[0];
  if (tree_count_grid.size() > 1) {
    Rng fold_rng(Rng::mix(seed, 0xf01d));
    const auto folds = stratified_folds(labels, 3, fold_rng);
    double best_score = -1.0;
    for (int count : tree_count_grid) {
      double total = 0.0;
      for (size_t f = 0; f < folds.size(); ++f) {
        std::vector<size_t> train_rows;
        for (size_t g = 0; g < folds.size(); ++g) {
          if (g != f) train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
        }
        std::sort(train_rows.begin(), train_rows.end());
        BinaryMatrix train;
        train.column_names = m.column_names;
        train.column_feature = m.column_feature;
        train.n_rows = train_rows.size();
        std::vector<uint8_t> train_labels;
        for (size_t r : train_rows) {
          const auto row = m.row(r);
          train.values.insert(train.values.end(), row.begin(), row.end());
          train_labels.push_back(labels[r]);
        }
        const ForestModel model =
            rf_train(train, train_labels, count, Rng::mix(seed, f * 100 + static_cast<size_t>(count)),
                     threads);
        std::vector<int> preds;
        std::vector<uint8_t> test_labels;
        for (size_t r : folds[f]) {
          preds.push_back(model.predict_proba(m.row(r)) >= 0.5 ? 1 : 0);
          test_labels.push_back(labels[r]);
        }
        total += accuracy(preds, test_labels);
      }
      const double score = total / static_cast<double>(folds.size());
      if (score > best_score) {
        best_score = score;
        best_count = count;
      }
    }
  }
  return rf_train(m, labels, best_count, seed, threads);
}

std::vector<int> default_tree_count_grid() { return {100, 200, 500}; }

std::string ForestModel::to_json() const {
  json jtrees = json::array();
  for (const Tree& tree : trees) {
    json jnodes = json::array();
    for (const TreeNode& n : tree.nodes) {
      jnodes.push_back({{"col", n.column}, {"l", n.left}, {"r", n.right},
                        {"n0", n.n0}, {"n1", n.n1}, {"p1", n.p1}});
    }
    jtrees.push_back(std::move(jnodes));
  }
  json doc;
  doc["type"] = "rf";
  doc["tree_count"] = tree_count;
  doc["features_per_split"] = features_per_split;
  doc["seed"] = seed;
  doc["n_cols"] = n_cols;
  doc["trees"] = jtrees;
  return doc.dump();
}

ForestModel ForestModel::from_json(const std::string& text) {
  json doc = json::parse(text);
  ForestModel model;
  model.tree_count = doc.at("tree_count").get<int>();
  model.features_per_split = doc.at("features_per_split").get<int>();
  model.seed = doc.at("seed").get<uint64_t>();
  model.n_cols = doc.at("n_cols").get<size_t>();
  for (const json& jtree : doc.at("trees")) {
    Tree tree;
    for (const json& jn : jtree) {
      TreeNode n;
      n.column = jn.at("col").get<int32_t>();
      n.left = jn.at("l").get<int32_t>();
      n.right = jn.at("r").get<int32_t>();
      n.n0 = jn.at("n0").get<int64_t>();
      n.n1 = jn.at("n1").get<int64_t>();
      n.p1 = jn.at("p1").get<double>();
      tree.nodes.push_back(n);
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

// --- L2 logistic regression -------------------------------------------------------

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

double LogisticModel::predict_proba(std::span<const uint8_t> row) const {
  double z = intercept;
  for (size_t c = 0; c < weights.size(); ++c) z += weights[c] * static_cast<double>(row[c]);
  return sigmoid(z);
}

std::vector<double> LogisticModel::predict_proba(const BinaryMatrix& m) const {
  std::vector<double> out(m.n_rows);
  for (size_t r = 0; r < m.n_rows; ++r) out[r] = predict_proba(m.row(r));
  return out;
}

std::vector<int> LogisticModel::predict(const BinaryMatrix& m, double threshold) const {
  std::vector<int> out(m.n_rows);
  for (size_t r = 0; r < m.n_rows; ++r) out[r] = predict_proba(m.row(r)) >= threshold ? 1 : 0;
  return out;
}

LogisticModel lr_train(const BinaryMatrix& m, std::span<const uint8_t> labels, double c_value) {
  if (m.n_rows != labels.size() || m.n_rows == 0) {
    throw std::invalid_argument("lr_train: size mismatch or empty input");
  }
  if (!(c_value > 0.0)) throw std::invalid_argument("lr_train: C must be positive");
  bool has_pos = false, has_neg = false;
  for (uint8_t y : labels) (y ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) throw std::invalid_argument("lr_train: single-class labels");

  const size_t p = m.n_cols();
  const size_t dim = p + 1;  // intercept last
  const double n = static_cast<double>(m.n_rows);
  const double lambda = 1.0 / c_value;
  std::vector<double> theta(dim, 0.0);

  // Objective: mean log-likelihood - |w|^2 / (2C); intercept unpenalized.
  auto objective = [&](std::span<const double> th) {
    double ll = 0.0;
    for (size_t r = 0; r < m.n_rows; ++r) {
      double z = th[p];
      const auto row = m.row(r);
      for (size_t c = 0; c < p; ++c) z += th[c] * static_cast<double>(row[c]);
      ll += labels[r] ? -std::log1p(std::exp(-z)) : -std::log1p(std::exp(z));
    }
    double pen = 0.0;
    for (size_t c = 0; c < p; ++c) pen += th[c] * th[c];
    return ll / n - 0.5 * lambda * pen;
  };

  double current = objective(theta);
  bool converged = false;
  double grad_norm = 0.0;
  for (int iter = 0; iter < 100 && !converged; ++iter) {
    std::vector<double> grad(dim, 0.0);
    std::vector<double> hess(dim * dim, 0.0);
    for (size_t r = 0; r < m.n_rows; ++r) {
      const auto row = m.row(r);
      double z = theta[p];
      for (size_t c = 0; c < p; ++c) z += theta[c] * static_cast<double>(row[c]);
      const double mu = sigmoid(z);
      const double resid = (labels[r] ? 1.0 : 0.0) - mu;
      const double w = std::max(mu * (1.0 - mu), 1e-10);
      for (size_t a = 0; a < p; ++a) {
        if (row[a] == 0) continue;
        grad[a] += resid;
        for (size_t b = 0; b < p; ++b) {
          if (row[b]) hess[a * dim + b] += w;
        }
        hess[a * dim + p] += w;
        hess[p * dim + a] += w;
      }
      grad[p] += resid;
      hess[p * dim + p] += w;
    }
    for (size_t c = 0; c < dim; ++c) grad[c] /= n;
    for (size_t c = 0; c < dim * dim; ++c) hess[c] /= n;
    for (size_t c = 0; c < p; ++c) {
      grad[c] -= lambda * theta[c];
      hess[c * dim + c] += lambda;
    }
    grad_norm = 0.0;
    for (double g : grad) grad_norm += g * g;
    grad_norm = std::sqrt(grad_norm);
    if (grad_norm < 1e-6) {
      converged = true;
      break;
    }

    std::vector<double> delta = grad;
    detail::cholesky_solve_in_place(hess, delta, dim);
    double step = 1.0;
    bool stepped = false;
    std::vector<double> candidate(dim);
    for (int halving = 0; halving < 40; ++halving) {
      for (size_t c = 0; c < dim; ++c) candidate[c] = theta[c] + step * delta[c];
      const double cand = objective(candidate);
      if (std::isfinite(cand) && cand >= current - 1e-14) {
        theta = candidate;
        current = cand;
        stepped = true;
        break;
      }
      step *= 0.5;
    }
    if (!stepped) break;
  }
  if (!converged) {
    throw std::runtime_error("lr_train: no convergence, gradient norm " + std::to_string(grad_norm));
  }

  LogisticModel model;
  model.weights.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(p));
  model.intercept = theta[p];
  model.c_value = c_value;
  return model;
}

LogisticModel lr_fit(const BinaryMatrix& m, std::span<const uint8_t> labels,
                     std::span<const double> c_grid, uint64_t seed) {
  if (c_grid.empty()) throw std::invalid_argument("lr_fit: empty grid");
  double best_c = c_grid[0];
  if (c_grid.size() > 1) {
    Rng fold_rng(Rng::mix(seed, 0x10c));
    const auto folds = stratified_folds(labels, 3, fold_rng);
    double best_score = -1.0;
    for (double c_value : c_grid) {
      double total = 0.0;
      bool ok = true;
      for (size_t f = 0; f < folds.size() && ok; ++f) {
        std::vector<size_t> train_rows;
        for (size_t g = 0; g < folds.size(); ++g) {
          if (g != f) train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
        }
        std::sort(train_rows.begin(), train_rows.end());
        BinaryMatrix train;
        train.column_names = m.column_names;
        train.column_feature = m.column_feature;
        train.n_rows = train_rows.size();
        std::vector<uint8_t> train_labels;
        for (size_t r : train_rows) {
          const auto row = m.row(r);
          train.values.insert(train.values.end(), row.begin(), row.end());
          train_labels.push_back(labels[r]);
        }
        try {
          const LogisticModel model = lr_train(train, train_labels, c_value);
          std::vector<int> preds;
          std::vector<uint8_t> test_labels;
          for (size_t r : folds[f]) {
            preds.push_back(model.predict_proba(m.row(r)) >= 0.5 ? 1 : 0);
            test_labels.push_back(labels[r]);
          }
          total += accuracy(preds, test_labels);
        } catch (const std::exception&) {
          ok = false;
        }
      }
      if (!ok) continue;
      const double score = total / 3.0;
      if (score > best_score || (score == best_score && c_value > best_c)) {
        best_score = score;
        best_c = c_value;
      }
    }
  }
  return lr_train(m, labels, best_c);
}

std::vector<double> default_c_grid() {
  std::vector<double> grid;
  for (int e = -4; e <= 4; ++e) grid.push_back(std::pow(2.0, e));
  return grid;
}

std::string LogisticModel::to_json(std::span<const std::string> column_names) const {
  json doc;
  doc["type"] = "lr";
  doc["C"] = c_value;
  doc["intercept"] = intercept;
  doc["weights"] = weights;
  doc["columns"] = std::vector<std::string>(column_names.begin(), column_names.end());
  return doc.dump(2);
}

LogisticModel LogisticModel::from_json(const std::string& text) {
  json doc = json::parse(text);
  LogisticModel model;
  model.c_value = doc.at("C").get<double>();
  model.intercept = doc.at("intercept").get<double>();
  model.weights = doc.at("weights").get<std::vector<double>>();
  return model;
}

// --- Permutation importance ----------------------------------------------------

std::vector<PermutationImportance> permutation_importance(const MatrixScorer& scorer,
                                                          const BinaryMatrix& m,
                                                          std::span<const uint8_t> labels,
                                                          int repeats, uint64_t seed) {
  if (repeats < 1) throw std::invalid_argument("permutation_importance: repeats must be positive");
  if (m.n_rows != labels.size() || m.n_rows == 0) {
    throw std::invalid_argument("permutation_importance: size mismatch or empty input");
  }

  // Column groups: one per original feature; lone columns group by themselves.
  std::vector<std::vector<size_t>> groups;
  std::vector<std::string> group_names;
  if (m.column_feature.size() == m.n_cols()) {
    int32_t max_feature = -1;
    for (int32_t f : m.column_feature) max_feature = std::max(max_feature, f);
    groups.assign(static_cast<size_t>(max_feature) + 1, {});
    group_names.assign(groups.size(), "");
    for (size_t c = 0; c < m.n_cols(); ++c) {
      const size_t g = static_cast<size_t>(m.column_feature[c]);
      groups[g].push_back(c);
      if (group_names[g].empty()) {
        const std::string& name = m.column_names[c];
        const size_t colon = name.find(": ");
        group_names[g] = colon == std::string::npos ? name : name.substr(0, colon);
      }
    }
  } else {
    for (size_t c = 0; c < m.n_cols(); ++c) {
      groups.push_back({c});
      group_names.push_back(m.column_names.empty() ? "col" + std::to_string(c)
                                                   : m.column_names[c]);
    }
  }

  const double baseline = auroc(scorer(m), labels);
  Rng root(seed);
  std::vector<PermutationImportance> out;
  BinaryMatrix shuffled = m;
  for (size_t g = 0; g < groups.size(); ++g) {
    std::vector<double> drops;
    for (int rep = 0; rep < repeats; ++rep) {
      Rng rng = root.stream(g * 1000 + static_cast<size_t>(rep));
      std::vector<size_t> perm(m.n_rows);
      std::iota(perm.begin(), perm.end(), size_t{0});
      rng.shuffle(perm);
      for (size_t r = 0; r < m.n_rows; ++r) {
        for (size_t c : groups[g]) {
          shuffled.values[r * m.n_cols() + c] = m.at(perm[r], c);
        }
      }
      drops.push_back(baseline - auroc(scorer(shuffled), labels));
    }
    // restore the group
    for (size_t r = 0; r < m.n_rows; ++r) {
      for (size_t c : groups[g]) shuffled.values[r * m.n_cols() + c] = m.at(r, c);
    }
    out.push_back({group_names[g], mean(drops), sample_std(drops)});
  }
  return out;
}

std::string permutation_importance_to_json(std::span<const PermutationImportance> entries) {
  json doc = json::array();
  for (const PermutationImportance& e : entries) {
    doc.push_back({{"feature", e.feature}, {"mean_drop", e.mean_drop}, {"std_drop", e.std_drop}});
  }
  return doc.dump(2);
}

// --- Sequential forward selection --------------------------------------------------

std::vector<size_t> sequential_feature_selection(const BinaryMatrix& m,
                                                 std::span<const uint8_t> labels,
                                                 const SfsConfig& config) {
  if (config.k < 0 || static_cast<size_t>(config.k) > m.n_cols()) {
    throw std::invalid_argument("sfs: k outside [0, column count]");
  }
  if (config.k == 0) return {};

  Rng fold_rng(Rng::mix(config.seed, 0x5f5));
  const auto folds = stratified_folds(labels, config.folds, fold_rng);

  auto cv_auroc = [&](const std::vector<size_t>& columns) {
    double total = 0.0;
    for (size_t f = 0; f < folds.size(); ++f) {
      std::vector<size_t> train_rows;
      for (size_t g = 0; g < folds.size(); ++g) {
        if (g != f) train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
      }
      std::sort(train_rows.begin(), train_rows.end());
      BinaryMatrix sub_train, sub_test;
      sub_train.n_rows = train_rows.size();
      sub_test.n_rows = folds[f].size();
      for (size_t c : columns) {
        sub_train.column_names.push_back(m.column_names[c]);
        sub_test.column_names.push_back(m.column_names[c]);
      }
      std::vector<uint8_t> train_labels, test_labels;
      for (size_t r : train_rows) {
        for (size_t c : columns) sub_train.values.push_back(m.at(r, c));
        train_labels.push_back(labels[r]);
      }
      for (size_t r : folds[f]) {
        for (size_t c : columns) sub_test.values.push_back(m.at(r, c));
        test_labels.push_back(labels[r]);
      }
      bool has_pos = false, has_neg = false;
      for (uint8_t y : test_labels) (y ? has_pos : has_neg) = true;
      if (!has_pos || !has_neg) continue;
      const ForestModel model = rf_train(sub_train, train_labels, config.tree_count,
                                         Rng::mix(config.seed, f), config.threads);
      total += auroc(model.predict_proba(sub_test), test_labels);
    }
    return total / static_cast<double>(folds.size());
  };

  std::vector<size_t> selected;
  std::vector<uint8_t> in_use(m.n_cols(), 0);
  for (int step = 0; step < config.k; ++step) {
    double best_score = -1.0;
    size_t best_col = m.n_cols();
    std::vector<size_t> trial = selected;
    trial.push_back(0);
    for (size_t c = 0; c < m.n_cols(); ++c) {
      if (in_use[c]) continue;
      trial.back() = c;
      const double score = cv_auroc(trial);
      if (score > best_score) {  // ties keep the lower column index
        best_score = score;
        best_col = c;
      }
    }
    selected.push_back(best_col);
    in_use[best_col] = 1;
  }
  return selected;
}

// --- Local surrogate explanation ------------------------------------------------------

LocalExplanation local_surrogate_explain(const MatrixScorer& scorer,
                                         const CategoricalDataset& train,
                                         std::span<const int32_t> instance,
                                         const SurrogateConfig& config) {
  if (config.n_samples < 2) throw std::invalid_argument("surrogate: n_samples too small");
  if (!(config.kernel_width > 0.0)) throw std::invalid_argument("surrogate: kernel width must be positive");
  const size_t n_features = train.n_features();
  if (instance.size() != n_features) throw std::invalid_argument("surrogate: instance width mismatch");

  // Empirical training marginals drive the feature resampling.
  std::vector<std::vector<double>> marginals(n_features);
  for (size_t f = 0; f < n_features; ++f) {
    marginals[f].assign(train.schema.features[f].categories.size(), 0.0);
    for (size_t r = 0; r < train.n_rows(); ++r) {
      marginals[f][static_cast<size_t>(train.category(r, f))] += 1.0;
    }
  }

  Rng rng(config.seed);
  CategoricalDataset perturbed;
  perturbed.schema = train.schema;
  std::vector<double> distances;
  bool any_changed = false;
  for (int s = 0; s < config.n_samples; ++s) {
    size_t changed = 0;
    for (size_t f = 0; f < n_features; ++f) {
      int32_t value = instance[f];
      if (rng.bernoulli(0.5)) {
        value = static_cast<int32_t>(rng.categorical(marginals[f]));
      }
      if (value != instance[f]) ++changed;
      perturbed.cells.push_back(value);
    }
    any_changed |= changed > 0;
    perturbed.survival_days.push_back(1);
    perturbed.event_observed.push_back(1);
    perturbed.label.push_back(0);
    distances.push_back(static_cast<double>(changed) / static_cast<double>(n_features));
  }
  if (!any_changed) {
    throw std::runtime_error("surrogate: degenerate perturbations, every sample equals the instance");
  }

  const BinaryMatrix design = one_hot_encode(perturbed);
  const std::vector<double> target = scorer(design);
  if (target.size() != static_cast<size_t>(config.n_samples)) {
    throw std::runtime_error("surrogate: scorer returned wrong number of probabilities");
  }

  std::vector<double> sample_weight(distances.size());
  const double w2 = config.kernel_width * config.kernel_width;
  for (size_t s = 0; s < distances.size(); ++s) {
    sample_weight[s] = std::exp(-distances[s] * distances[s] / w2);
  }

  // Weighted ridge on [columns, intercept]; the intercept is unpenalized.
  const size_t p = design.n_cols();
  const size_t dim = p + 1;
  std::vector<double> gram(dim * dim, 0.0);
  std::vector<double> moment(dim, 0.0);
  for (size_t s = 0; s < distances.size(); ++s) {
    const auto row = design.row(s);
    const double sw = sample_weight[s];
    for (size_t a = 0; a < p; ++a) {
      if (row[a] == 0) continue;
      for (size_t b = 0; b < p; ++b) {
        if (row[b]) gram[a * dim + b] += sw;
      }
      gram[a * dim + p] += sw;
      gram[p * dim + a] += sw;
      moment[a] += sw * target[s];
    }
    gram[p * dim + p] += sw;
    moment[p] += sw * target[s];
  }
  for (size_t c = 0; c < p; ++c) gram[c * dim + c] += config.ridge;
  // A hair of regularization on the intercept keeps the solve well-posed
  // without visibly moving it.
  gram[p * dim + p] += 1e-12;
  std::vector<double> theta = moment;
  detail::cholesky_solve_in_place(gram, theta, dim);

  LocalExplanation out;
  out.instance_id = config.instance_id;
  out.weights.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(p));
  out.intercept = theta[p];

  // Weighted R^2 against the black box's probabilities.
  double wsum = 0.0, ymean = 0.0;
  for (size_t s = 0; s < distances.size(); ++s) {
    wsum += sample_weight[s];
    ymean += sample_weight[s] * target[s];
  }
  ymean /= wsum;
  double ss_res = 0.0, ss_tot = 0.0;
  for (size_t s = 0; s < distances.size(); ++s) {
    const auto row = design.row(s);
    double fit = out.intercept;
    for (size_t c = 0; c < p; ++c) {
      if (row[c]) fit += out.weights[c];
    }
    ss_res += sample_weight[s] * (target[s] - fit) * (target[s] - fit);
    ss_tot += sample_weight[s] * (target[s] - ymean) * (target[s] - ymean);
  }
  // a constant target has no variance to explain; report zero fidelity
  out.fidelity_r2 = ss_tot > 1e-12 ? 1.0 - ss_res / ss_tot : 0.0;

  std::vector<size_t> order(p);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const double fa = std::fabs(out.weights[a]), fb = std::fabs(out.weights[b]);
    return fa != fb ? fa > fb : a < b;
  });
  const size_t take = std::min<size_t>(10, p);
  for (size_t i = 0; i < take; ++i) out.top.emplace_back(order[i], out.weights[order[i]]);
  return out;
}

std::string local_explanation_to_json(const LocalExplanation& explanation,
                                      std::span<const std::string> column_names) {
  json top = json::array();
  for (const auto& [col, weight] : explanation.top) {
    top.push_back({{"column", col < column_names.size() ? column_names[col]
                                                        : "col" + std::to_string(col)},
                   {"weight", weight},
                   {"direction", weight >= 0.0 ? "positive" : "negative"}});
  }
  json doc;
  doc["instance_id"] = explanation.instance_id;
  doc["top"] = top;
  doc["intercept"] = explanation.intercept;
  doc["fidelity_r2"] = explanation.fidelity_r2;
  return doc.dump(2);
}

}  // namespace rulekit
