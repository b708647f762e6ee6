#include "rulekit/learners.hpp"

#include <memory>
#include <stdexcept>

namespace rulekit {

LearnerSpec make_brl_learner(const BrlHyper& hyper, const RuleLearnerOptions& options) {
  LearnerSpec spec;
  spec.name = "brl";
  spec.hyper_labels = {"default"};
  spec.produces_scores = true;
  spec.fit = [hyper, options](const CategoricalDataset& train, size_t, uint64_t seed) {
    const std::vector<Itemset> pool = antecedent_pool(mine_antecedents(train, options.mining));
    if (pool.empty()) throw std::runtime_error("brl learner: no antecedents pass the mining thresholds");
    BrlHyper h = hyper;
    h.seed = seed;
    const BrlPosterior posterior = mcmc_sample(train, pool, h);
    auto list = std::make_shared<DecisionList>(brl_point(posterior, train));
    const double alpha_neg = h.alpha_neg, alpha_pos = h.alpha_pos;
    const double threshold = options.classification_threshold;
    FittedModel model;
    model.score = [list, alpha_neg, alpha_pos](const CategoricalDataset& ds) {
      std::vector<double> out;
      out.reserve(ds.n_rows());
      for (size_t r = 0; r < ds.n_rows(); ++r) {
        out.push_back(predict(*list, ds.row(r), alpha_neg, alpha_pos).prob);
      }
      return out;
    };
    model.predict = [list, alpha_neg, alpha_pos, threshold](const CategoricalDataset& ds) {
      std::vector<int> out;
      out.reserve(ds.n_rows());
      for (size_t r = 0; r < ds.n_rows(); ++r) {
        out.push_back(predict(*list, ds.row(r), alpha_neg, alpha_pos).prob >= threshold ? 1 : 0);
      }
      return out;
    };
    return model;
  };
  return spec;
}

LearnerSpec make_frl_learner(const FrlHyper& hyper, const RuleLearnerOptions& options) {
  LearnerSpec spec;
  spec.name = "frl";
  spec.hyper_labels = {"default"};
  spec.produces_scores = true;
  spec.fit = [hyper, options](const CategoricalDataset& train, size_t, uint64_t seed) {
    const std::vector<Itemset> pool = antecedent_pool(mine_antecedents(train, options.mining));
    if (pool.empty()) throw std::runtime_error("frl learner: no antecedents pass the mining thresholds");
    FrlHyper h = hyper;
    h.seed = seed;
    auto list = std::make_shared<FallingRuleList>(frl_fit(train, pool, h));
    const double threshold = options.classification_threshold;
    FittedModel model;
    model.score = [list](const CategoricalDataset& ds) {
      std::vector<double> out;
      out.reserve(ds.n_rows());
      for (size_t r = 0; r < ds.n_rows(); ++r) out.push_back(frl_predict(*list, ds.row(r)).risk);
      return out;
    };
    model.predict = [list, threshold](const CategoricalDataset& ds) {
      std::vector<int> out;
      out.reserve(ds.n_rows());
      for (size_t r = 0; r < ds.n_rows(); ++r) {
        out.push_back(frl_predict(*list, ds.row(r)).risk >= threshold ? 1 : 0);
      }
      return out;
    };
    return model;
  };
  return spec;
}

LearnerSpec make_rf_learner(std::vector<int> tree_count_grid, int threads) {
  if (tree_count_grid.empty()) throw std::invalid_argument("rf learner: empty grid");
  LearnerSpec spec;
  spec.name = "rf";
  for (int count : tree_count_grid) spec.hyper_labels.push_back("trees=" + std::to_string(count));
  spec.produces_scores = true;
  spec.fit = [tree_count_grid, threads](const CategoricalDataset& train, size_t hyper_index,
                                        uint64_t seed) {
    const BinaryMatrix matrix = one_hot_encode(train);
    auto forest = std::make_shared<ForestModel>(
        rf_train(matrix, train.label, tree_count_grid[hyper_index], seed, threads));
    FittedModel model;
    model.score = [forest](const CategoricalDataset& ds) {
      return forest->predict_proba(one_hot_encode(ds));
    };
    model.predict = [forest](const CategoricalDataset& ds) {
      return forest->predict(one_hot_encode(ds));
    };
    return model;
  };
  return spec;
}

LearnerSpec make_lr_learner(std::vector<double> c_grid) {
  if (c_grid.empty()) throw std::invalid_argument("lr learner: empty grid");
  LearnerSpec spec;
  spec.name = "lr";
  for (double c : c_grid) spec.hyper_labels.push_back("C=" + std::to_string(c));
  spec.produces_scores = true;
  spec.fit = [c_grid](const CategoricalDataset& train, size_t hyper_index, uint64_t) {
    const BinaryMatrix matrix = one_hot_encode(train);
    auto lr = std::make_shared<LogisticModel>(lr_train(matrix, train.label, c_grid[hyper_index]));
    FittedModel model;
    model.score = [lr](const CategoricalDataset& ds) { return lr->predict_proba(one_hot_encode(ds)); };
    model.predict = [lr](const CategoricalDataset& ds) { return lr->predict(one_hot_encode(ds)); };
    return model;
  };
  return spec;
}

LearnerSpec make_cox_learner(std::vector<double> penalizer_grid, int label_threshold_days) {
  if (penalizer_grid.empty()) throw std::invalid_argument("cox learner: empty grid");
  LearnerSpec spec;
  spec.name = "cox";
  for (double p : penalizer_grid) spec.hyper_labels.push_back("penalizer=" + std::to_string(p));
  spec.produces_scores = false;  // the Cox baseline yields times, not class scores
  spec.fit = [penalizer_grid, label_threshold_days](const CategoricalDataset& train,
                                                    size_t hyper_index, uint64_t) {
    auto [rows, names] = survival_design(train);
    auto cox = std::make_shared<CoxModel>(
        cox_fit(rows, penalizer_grid[hyper_index], std::move(names)));
    // a prediction past the observed horizon reads as "survived the year"
    // even when the training horizon itself is shorter than the threshold
    const double horizon = cox->baseline_cumhaz.back().first;
    FittedModel model;
    model.predict = [cox, horizon, label_threshold_days](const CategoricalDataset& ds) {
      auto [test_rows, test_names] = survival_design(ds);
      std::vector<int> out;
      out.reserve(test_rows.size());
      for (const SurvivalRow& row : test_rows) {
        const double days = cox_predict_survival_days(*cox, row.covariates);
        out.push_back(days > static_cast<double>(label_threshold_days) || days > horizon ? 1 : 0);
      }
      return out;
    };
    return model;
  };
  return spec;
}

}  // namespace rulekit
