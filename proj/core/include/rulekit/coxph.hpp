#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rulekit/dataset.hpp"

namespace rulekit {

struct SurvivalRow {
  std::vector<double> covariates;
  double time = 0.0;  // days, > 0
  bool event = false; // true = death observed
};

// Proportional-hazards model over one-hot columns with each feature's first
// category dropped; the baseline cumulative hazard is the Breslow step table.
struct CoxModel {
  std::vector<std::string> column_names;
  std::vector<double> beta;
  double penalizer = 0.0;
  std::vector<std::pair<double, double>> baseline_cumhaz;  // (time, H0), non-decreasing

  std::string to_json() const;
  static CoxModel from_json(const std::string& text);
};

// Design rows for cox_fit: one-hot encoding with the first category per
// feature dropped (k categories -> k-1 columns).
std::pair<std::vector<SurvivalRow>, std::vector<std::string>> survival_design(
    const CategoricalDataset& ds);

// Breslow-tie partial log-likelihood of beta (unpenalized).
double cox_partial_log_likelihood(std::span<const SurvivalRow> rows, std::span<const double> beta);

// Newton maximization of the partial log-likelihood minus (penalizer/2)|beta|^2
// with step halving; converges when the step's max component drops below 1e-7.
CoxModel cox_fit(std::span<const SurvivalRow> rows, double penalizer,
                 std::vector<std::string> column_names = {});

// 5-fold cross-validation on held-out partial likelihood; ties prefer the
// larger penalizer. A candidate that fails to fit on any fold is disqualified.
double select_penalizer(std::span<const SurvivalRow> rows,
                        std::span<const double> grid, uint64_t seed = 0, int folds = 5);

// Median survival time of the individual curve S(t) = exp(-H0(t) e^{beta x});
// if S never reaches 0.5 within the observed horizon, horizon + 1 is returned
// (downstream that reads as "survived past the label threshold").
double cox_predict_survival_days(const CoxModel& model, std::span<const double> covariates);

struct CoxImportanceEntry {
  std::string column;
  double mean = 0.0;
  double std_dev = 0.0;
};

// Coefficient mean/std across fold models; the 5 most negative means
// (ascending) followed by the 5 most positive (descending). Positive
// coefficients mean increased hazard, i.e. reduced survival.
std::vector<CoxImportanceEntry> cox_importance(std::span<const CoxModel> models);

std::string cox_importance_to_json(std::span<const CoxImportanceEntry> entries);

}  // namespace rulekit
