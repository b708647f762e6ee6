#pragma once

#include "rulekit/dataset.hpp"

namespace rulekit {

// Bundled brain-tumour cohort template: 19 predictor features (94 categories
// in total) with their published marginal frequencies. Used as the default
// template for synthetic cohorts.
FeatureSchema brain_tumour_schema();

// Per-feature category probabilities aligned with brain_tumour_schema().
std::vector<std::vector<double>> brain_tumour_marginals();

// SynthSpec over the bundled schema with no planted rules; the default
// positive rate and censoring rate mirror the cohort the template describes
// (56.5% one-year survivors, 35% of all records censored).
SynthSpec brain_tumour_synth_spec();

}  // namespace rulekit
