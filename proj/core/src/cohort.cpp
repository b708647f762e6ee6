#include "rulekit/cohort.hpp"

namespace rulekit {

namespace {

struct FeatureDef {
  const char* name;
  FeatureKind kind;
  std::vector<std::pair<const char*, double>> categories;  // name, probability
};

const std::vector<FeatureDef>& cohort_defs() {
  static const std::vector<FeatureDef> defs = {
      {"Age",
       FeatureKind::ordinal,
       {{"0-44", 0.171}, {"45-54", 0.187}, {"55-61", 0.160}, {"62-67", 0.158},
        {"68-74", 0.169}, {"75+", 0.155}}},
      {"Sex", FeatureKind::categorical, {{"Male", 0.505}, {"Female", 0.495}}},
      {"History of Cancer", FeatureKind::categorical, {{"Yes", 0.182}, {"No", 0.818}}},
      {"Comorbidity", FeatureKind::categorical, {{"Yes", 0.477}, {"No", 0.523}}},
      {"SIMD",
       FeatureKind::ordinal,
       {{"1", 0.139}, {"2", 0.226}, {"3", 0.210}, {"4", 0.188}, {"5", 0.237}}},
      {"KP Score",
       FeatureKind::ordinal,
       {{"100", 0.376}, {"90", 0.286}, {"80", 0.146}, {"<=70", 0.192}}},
      {"Symptom 1",
       FeatureKind::categorical,
       {{"Focal Neurology", 0.346}, {"Headache", 0.284}, {"Fits/Faints/Falls", 0.171},
        {"Behavioural/Cognitive", 0.167}, {"Other/Non-specific", 0.024},
        {"Non-specific Neurological", 0.008}}},
      {"Symptom 1 Duration",
       FeatureKind::ordinal,
       {{"0-2 weeks", 0.206}, {"3-4 weeks", 0.201}, {"5-8 weeks", 0.195},
        {"9-20 weeks", 0.204}, {"20-52 weeks", 0.194}}},
      {"Symptom 2",
       FeatureKind::categorical,
       {{"Focal Neurology", 0.313}, {"No Symptoms", 0.304}, {"Behavioural/Cognitive", 0.189},
        {"Fits/Faints/Falls", 0.091}, {"Headache", 0.064}, {"Other/Non-specific", 0.039}}},
      {"Sign 1",
       FeatureKind::categorical,
       {{"No Signs", 0.427}, {"Neurological", 0.362}, {"Cognitive", 0.150},
        {"Cranial Nerve", 0.050}, {"Other", 0.008}, {"Behavioural", 0.003}}},
      {"Urgency of Referral",
       FeatureKind::categorical,
       {{"Emergency", 0.597}, {"Suspicion of Cancer (within 2 weeks)", 0.173},
        {"Soon (up to 3-4 weeks)", 0.029}, {"Routine (up to 12 weeks)", 0.201}}},
      {"Diagnosis",
       FeatureKind::categorical,
       {{"Glioma Malignant", 0.465}, {"Metastasis", 0.190}, {"Meningioma Benign", 0.136},
        {"Glioma Benign", 0.071}, {"Rare Tumour Benign", 0.047}, {"Lymphoma Malignant", 0.041},
        {"Meningioma Malignant", 0.023}, {"Rare Tumour Malignant", 0.015},
        {"Hemangioblastoma Benign", 0.012}}},
      {"Max Size",
       FeatureKind::ordinal,
       {{"<=20", 0.197}, {"21-40", 0.381}, {"41-60", 0.308}, {">=61", 0.114}}},
      {"Side",
       FeatureKind::categorical,
       {{"Left", 0.419}, {"Right", 0.412}, {"Both Left and Right", 0.116}, {"Midline", 0.053}}},
      {"Lobe",
       FeatureKind::categorical,
       {{"Frontal", 0.342}, {"Temporal", 0.216}, {"Parietal", 0.146}, {"Multiple", 0.122},
        {"Cerebellar", 0.073}, {"Brainstem", 0.057}, {"Occipital", 0.044}}},
      {"Morphology", FeatureKind::categorical, {{"Heterogenous", 0.685}, {"Homogenous", 0.315}}},
      {"Midline Shift",
       FeatureKind::ordinal,
       {{"0", 0.433}, {"<5mm", 0.281}, {"5-10mm", 0.174}, {">10mm", 0.112}}},
      {"First Treatment",
       FeatureKind::categorical,
       {{"Surgery Removal 100%", 0.160}, {"Surgery Removal 90-99%", 0.244},
        {"Surgery Removal 50-89%", 0.064}, {"Surgery Removal <50%", 0.049},
        {"Biopsy", 0.169}, {"Radiotherapy", 0.055}, {"Chemotherapy", 0.009},
        {"Other", 0.025}, {"No Treatment", 0.225}}},
      {"Post-op Performance Status",
       FeatureKind::ordinal,
       {{"0", 0.315}, {"1", 0.274}, {"2", 0.062}, {"3", 0.019}, {"4", 0.014},
        {"5", 0.002}, {"No Surgery", 0.314}}},
  };
  return defs;
}

}  // namespace

FeatureSchema brain_tumour_schema() {
  FeatureSchema schema;
  for (const FeatureDef& def : cohort_defs()) {
    Feature f;
    f.name = def.name;
    f.kind = def.kind;
    for (const auto& [cat, prob] : def.categories) {
      (void)prob;
      f.categories.push_back(cat);
    }
    schema.features.push_back(std::move(f));
  }
  schema.validate();
  return schema;
}

std::vector<std::vector<double>> brain_tumour_marginals() {
  std::vector<std::vector<double>> marginals;
  for (const FeatureDef& def : cohort_defs()) {
    std::vector<double> probs;
    for (const auto& [cat, prob] : def.categories) {
      (void)cat;
      probs.push_back(prob);
    }
    marginals.push_back(std::move(probs));
  }
  return marginals;
}

SynthSpec brain_tumour_synth_spec() {
  SynthSpec spec;
  spec.schema = brain_tumour_schema();
  spec.marginals = brain_tumour_marginals();
  spec.default_positive_prob = 0.565;
  spec.censor_prob_given_survivor = 0.62;
  spec.validate();
  return spec;
}

}  // namespace rulekit
