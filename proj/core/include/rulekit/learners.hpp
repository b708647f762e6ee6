#pragma once

#include "rulekit/baselines.hpp"
#include "rulekit/brl.hpp"
#include "rulekit/coxph.hpp"
#include "rulekit/eval.hpp"
#include "rulekit/frl.hpp"
#include "rulekit/rulemine.hpp"

namespace rulekit {

// Adapters that wrap each model as a LearnerSpec for nested_cv. Every fit
// receives only its training rows; rule learners mine their antecedent pool
// inside fit, so no mining statistic leaks across folds.

struct RuleLearnerOptions {
  MiningParams mining;
  double classification_threshold = 0.5;
};

LearnerSpec make_brl_learner(const BrlHyper& hyper, const RuleLearnerOptions& options = {});
LearnerSpec make_frl_learner(const FrlHyper& hyper, const RuleLearnerOptions& options = {});

// Grid over tree counts; the harness's inner loop does the searching.
LearnerSpec make_rf_learner(std::vector<int> tree_count_grid = default_tree_count_grid(),
                            int threads = 1);

LearnerSpec make_lr_learner(std::vector<double> c_grid = default_c_grid());

// Penalizer grid; trains on survival times and converts the predicted days to
// one-year labels. Produces no class scores, so AUROC is not reported.
LearnerSpec make_cox_learner(std::vector<double> penalizer_grid = {1e-3, 1e-2, 1e-1, 1e0, 1e1},
                             int label_threshold_days = kDefaultLabelThresholdDays);

}  // namespace rulekit
