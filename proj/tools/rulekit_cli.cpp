// rulekit: interpretable rule-list classifiers, survival baselines, and an
// evaluation harness for categorical survival cohorts. One binary, one
// subcommand per pipeline stage; every run is seeded and echoes its resolved
// configuration next to its outputs.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rulekit/baselines.hpp"
#include "rulekit/brl.hpp"
#include "rulekit/cohort.hpp"
#include "rulekit/coxph.hpp"
#include "rulekit/dataset.hpp"
#include "rulekit/eval.hpp"
#include "rulekit/frl.hpp"
#include "rulekit/learners.hpp"
#include "rulekit/preprocess.hpp"
#include "rulekit/rulemine.hpp"

using nlohmann::json;
using namespace rulekit;

namespace {

// Exit codes: 0 ok, 1 runtime failure, 2 bad flags, 3 malformed config or
// input file, 4 schema / data mismatch.
constexpr int kExitRuntime = 1;
constexpr int kExitFlags = 2;
constexpr int kExitConfig = 3;
constexpr int kExitSchema = 4;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

// Config-file support: values in the JSON file become defaults, flags on the
// command line override them. The file is applied before CLI11 parses.
json load_config_json(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      return json::parse(read_file(argv[i + 1]));
    }
  }
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg.rfind("--config=", 0) == 0) {
      return json::parse(read_file(arg.substr(9)));
    }
  }
  return json::object();
}

template <typename T>
void from_config(const json& config, const char* key, T& value) {
  if (config.contains(key)) value = config.at(key).get<T>();
}

void echo_config(const std::string& out_path, const json& resolved) {
  write_file(out_path + ".config.json", resolved.dump(2) + "\n");
}

FeatureSchema load_schema(const std::string& path) {
  return FeatureSchema::from_json(read_file(path));
}

struct MiningFlags {
  double min_support = 0.10;
  double min_confidence = 0.80;
  int max_cardinality = 2;

  void attach(CLI::App* cmd, const json& config) {
    from_config(config, "min_support", min_support);
    from_config(config, "min_confidence", min_confidence);
    from_config(config, "max_cardinality", max_cardinality);
    cmd->add_option("--min-support", min_support, "Minimum antecedent support fraction");
    cmd->add_option("--min-confidence", min_confidence, "Minimum antecedent confidence fraction");
    cmd->add_option("--max-card", max_cardinality, "Maximum antecedent cardinality");
  }
  MiningParams params() const { return {min_support, min_confidence, max_cardinality}; }
  json to_json() const {
    return {{"min_support", min_support},
            {"min_confidence", min_confidence},
            {"max_cardinality", max_cardinality}};
  }
};

struct BrlFlags {
  double lambda = 3.0, eta = 1.0, alpha_neg = 1.0, alpha_pos = 1.0;
  int chains = 3, iterations = 30000, burn_in = -1, thin = 10;

  void attach(CLI::App* cmd, const json& config) {
    from_config(config, "brl_lambda", lambda);
    from_config(config, "brl_eta", eta);
    from_config(config, "brl_alpha_neg", alpha_neg);
    from_config(config, "brl_alpha_pos", alpha_pos);
    from_config(config, "brl_chains", chains);
    from_config(config, "brl_iterations", iterations);
    from_config(config, "brl_burn_in", burn_in);
    from_config(config, "brl_thin", thin);
    cmd->add_option("--lambda", lambda, "Expected list length");
    cmd->add_option("--eta", eta, "Expected rule cardinality");
    cmd->add_option("--alpha-neg", alpha_neg, "Beta pseudo-count for label 0");
    cmd->add_option("--alpha-pos", alpha_pos, "Beta pseudo-count for label 1");
    cmd->add_option("--chains", chains, "Markov chains");
    cmd->add_option("--iters", iterations, "Iterations per chain");
    cmd->add_option("--burn-in", burn_in, "Burn-in iterations (default half)");
    cmd->add_option("--thin", thin, "Keep every n-th post-burn-in state");
  }
  BrlHyper hyper(uint64_t seed, int threads) const {
    BrlHyper h;
    h.expected_list_length = lambda;
    h.expected_rule_cardinality = eta;
    h.alpha_neg = alpha_neg;
    h.alpha_pos = alpha_pos;
    h.chains = chains;
    h.iterations = iterations;
    h.burn_in = burn_in >= 0 ? burn_in : iterations / 2;
    h.thin = thin;
    h.seed = seed;
    h.threads = threads;
    return h;
  }
  json to_json() const {
    return {{"brl_lambda", lambda},     {"brl_eta", eta},
            {"brl_alpha_neg", alpha_neg}, {"brl_alpha_pos", alpha_pos},
            {"brl_chains", chains},     {"brl_iterations", iterations},
            {"brl_burn_in", burn_in},   {"brl_thin", thin}};
  }
};

struct FrlFlags {
  double lambda = 3.0, alpha_neg = 1.0, alpha_pos = 1.0;
  int iterations = 20000, restarts = 5;
  double t0 = 1.0, decay = 0.995, t_floor = 1e-3;

  void attach(CLI::App* cmd, const json& config) {
    from_config(config, "frl_lambda", lambda);
    from_config(config, "frl_alpha_neg", alpha_neg);
    from_config(config, "frl_alpha_pos", alpha_pos);
    from_config(config, "frl_iterations", iterations);
    from_config(config, "frl_restarts", restarts);
    from_config(config, "frl_t0", t0);
    from_config(config, "frl_decay", decay);
    from_config(config, "frl_t_floor", t_floor);
    cmd->add_option("--frl-lambda", lambda, "Expected list length");
    cmd->add_option("--frl-alpha-neg", alpha_neg, "Beta pseudo-count for label 0");
    cmd->add_option("--frl-alpha-pos", alpha_pos, "Beta pseudo-count for label 1");
    cmd->add_option("--frl-iters", iterations, "Proposal steps per restart");
    cmd->add_option("--restarts", restarts, "Annealing restarts");
    cmd->add_option("--t0", t0, "Initial annealing temperature");
    cmd->add_option("--decay", decay, "Geometric temperature decay per step");
    cmd->add_option("--t-floor", t_floor, "Temperature floor");
  }
  FrlHyper hyper(uint64_t seed, int threads) const {
    FrlHyper h;
    h.expected_list_length = lambda;
    h.alpha_neg = alpha_neg;
    h.alpha_pos = alpha_pos;
    h.iterations = iterations;
    h.restarts = restarts;
    h.initial_temperature = t0;
    h.temperature_decay = decay;
    h.temperature_floor = t_floor;
    h.seed = seed;
    h.threads = threads;
    return h;
  }
  json to_json() const {
    return {{"frl_lambda", lambda},     {"frl_alpha_neg", alpha_neg},
            {"frl_alpha_pos", alpha_pos}, {"frl_iterations", iterations},
            {"frl_restarts", restarts}, {"frl_t0", t0},
            {"frl_decay", decay},       {"frl_t_floor", t_floor}};
  }
};

// --- synth ---------------------------------------------------------------------

struct SynthArgs {
  std::string spec_path = "builtin";
  size_t n = 1018;
  uint64_t seed = 0;
  std::string out;
  std::string schema_out;
  std::string config_path;
};

int run_synth(const SynthArgs& args) {
  const SynthSpec spec = args.spec_path == "builtin"
                             ? brain_tumour_synth_spec()
                             : SynthSpec::from_json(read_file(args.spec_path));
  const CategoricalDataset ds = synth_generate(spec, args.n, args.seed);
  save_csv(ds, args.out);
  const std::string schema_path =
      args.schema_out.empty() ? args.out + ".schema.json" : args.schema_out;
  write_file(schema_path, spec.schema.to_json() + "\n");
  echo_config(args.out, json{{"command", "synth"},
                             {"spec", args.spec_path},
                             {"n", args.n},
                             {"seed", args.seed},
                             {"out", args.out},
                             {"schema_out", schema_path}});
  std::cout << "wrote " << ds.n_rows() << " rows to " << args.out << "\n";
  return 0;
}

// --- preprocess -----------------------------------------------------------------

struct PreprocessArgs {
  std::string in, out, report;
  uint64_t seed = 0;
  int knn_k = 5;
  int label_threshold = kDefaultLabelThresholdDays;
  bool select_bins = true;
  int disc_bins_max = 12;
  int brl_iters = 2000;
  int brl_chains = 1;
  std::string config_path;
};

int run_preprocess(const PreprocessArgs& args) {
  RawTable table = load_raw_csv(args.in);
  if (!table.has_outcome) {
    throw std::invalid_argument("preprocess: input needs survival_days and event_observed columns");
  }
  json report;
  report["imputation"] = json::object();

  std::vector<ImputerCandidate> candidates = {
      {ImputerCandidate::Method::baseline},
      {ImputerCandidate::Method::knn, args.knn_k, true},
      {ImputerCandidate::Method::knn, args.knn_k, false},
      {ImputerCandidate::Method::regression}};

  // Impute column by column; complete columns act as predictors.
  for (size_t c = 0; c < table.columns.size(); ++c) {
    RawColumn& col = table.columns[c];
    if (col.complete()) continue;
    std::vector<RawColumn> predictors;
    for (size_t p = 0; p < table.columns.size(); ++p) {
      if (p != c && table.columns[p].complete()) predictors.push_back(table.columns[p]);
    }
    if (col.present_count() < 10 || predictors.empty()) {
      col = impute_baseline(col);
      report["imputation"][col.name] = {{"chosen", "baseline"},
                                        {"note", "too few present rows for selection"}};
      continue;
    }
    const ImputerSelection selection =
        select_imputer(col, predictors, candidates, Rng::mix(args.seed, c));
    switch (selection.chosen.method) {
      case ImputerCandidate::Method::baseline:
        col = impute_baseline(col);
        break;
      case ImputerCandidate::Method::knn:
        col = impute_knn(col, predictors, selection.chosen.k, selection.chosen.normalize);
        break;
      case ImputerCandidate::Method::regression:
        col = impute_regression(col, predictors);
        break;
    }
    report["imputation"][col.name] = json::parse(selection.to_json());
  }

  // Discretise continuous columns; selection scores candidates with a
  // rule-list classifier over the categorical columns.
  report["discretisation"] = json::object();
  std::map<std::string, Discretiser> discretisers;
  RawTable categorical_only;
  categorical_only.n_rows = table.n_rows;
  categorical_only.survival_days = table.survival_days;
  categorical_only.event_observed = table.event_observed;
  categorical_only.has_outcome = true;
  for (const RawColumn& col : table.columns) {
    if (col.kind == RawColumn::Kind::categorical) categorical_only.columns.push_back(col);
  }
  std::optional<CategoricalDataset> base;
  if (!categorical_only.columns.empty()) {
    base = assemble_dataset(categorical_only, {}, args.label_threshold);
  }

  std::vector<int> bin_grid;
  for (int b = 2; b <= args.disc_bins_max; b += 2) bin_grid.push_back(b);
  const std::vector<Discretiser::Method> methods = {
      Discretiser::Method::uniform, Discretiser::Method::quantile, Discretiser::Method::kmeans};

  for (const RawColumn& col : table.columns) {
    if (col.kind != RawColumn::Kind::continuous) continue;
    std::vector<double> values;
    for (const auto& v : col.numeric) values.push_back(*v);
    if (args.select_bins && base) {
      BrlHyper hyper;
      hyper.chains = args.brl_chains;
      hyper.iterations = args.brl_iters;
      hyper.burn_in = args.brl_iters / 2;
      const DiscretiserSelection selection =
          select_discretiser(*base, col, methods, bin_grid, hyper, MiningParams{},
                             Rng::mix(args.seed, 0xd15c));
      discretisers.emplace(col.name, fit_discretiser(values, selection.method, selection.bin_count));
      report["discretisation"][col.name] = json::parse(selection.to_json());
    } else {
      discretisers.emplace(col.name,
                           fit_discretiser(values, Discretiser::Method::quantile, 4));
      report["discretisation"][col.name] = {{"chosen", "quantile/4"},
                                            {"note", "selection disabled"}};
    }
  }

  const CategoricalDataset ds = assemble_dataset(table, discretisers, args.label_threshold);
  save_csv(ds, args.out);
  write_file(args.out + ".schema.json", ds.schema.to_json() + "\n");
  if (!args.report.empty()) write_file(args.report, report.dump(2) + "\n");
  echo_config(args.out, json{{"command", "preprocess"},
                             {"in", args.in},
                             {"out", args.out},
                             {"report", args.report},
                             {"seed", args.seed},
                             {"knn_k", args.knn_k},
                             {"label_threshold", args.label_threshold},
                             {"select_bins", args.select_bins},
                             {"brl_iters", args.brl_iters},
                             {"brl_chains", args.brl_chains}});
  std::cout << "wrote " << ds.n_rows() << " preprocessed rows to " << args.out << "\n";
  return 0;
}

// --- mine ------------------------------------------------------------------------

struct MineArgs {
  std::string in, schema, out;
  MiningFlags mining;
  std::string config_path;
};

int run_mine(const MineArgs& args) {
  const FeatureSchema schema = load_schema(args.schema);
  const CategoricalDataset ds = load_csv(args.in, schema);
  const auto rules = mine_antecedents(ds, args.mining.params());
  write_file(args.out, mined_rules_to_json(rules, schema) + "\n");
  json config = args.mining.to_json();
  config["command"] = "mine";
  config["in"] = args.in;
  config["schema"] = args.schema;
  config["out"] = args.out;
  echo_config(args.out, config);
  std::cout << "mined " << rules.size() << " antecedents into " << args.out << "\n";
  return 0;
}

// --- train ------------------------------------------------------------------------

struct TrainArgs {
  std::string in, schema, model, out;
  uint64_t seed = 0;
  int threads = 1;
  MiningFlags mining;
  BrlFlags brl;
  FrlFlags frl;
  double cox_penalizer = -1.0;  // negative: select from the grid
  int rf_trees = 0;             // 0: grid search
  double lr_c = 0.0;            // 0: grid search
  int label_threshold = kDefaultLabelThresholdDays;
  std::string config_path;
};

int run_train(const TrainArgs& args) {
  const FeatureSchema schema = load_schema(args.schema);
  const CategoricalDataset ds = load_csv(args.in, schema, args.label_threshold);

  json config = {{"command", "train"}, {"in", args.in},     {"schema", args.schema},
                 {"model", args.model}, {"out", args.out},  {"seed", args.seed},
                 {"threads", args.threads}};

  if (args.model == "brl") {
    const auto pool = antecedent_pool(mine_antecedents(ds, args.mining.params()));
    if (pool.empty()) throw std::runtime_error("train: no antecedents pass the mining thresholds");
    const BrlHyper hyper = args.brl.hyper(args.seed, args.threads);
    const BrlPosterior posterior = mcmc_sample(ds, pool, hyper);
    const DecisionList list = brl_point(posterior, ds);
    write_file(args.out, decision_list_to_json(list, schema, hyper.alpha_neg, hyper.alpha_pos) + "\n");
    std::cout << render_decision_list(list, schema, hyper.alpha_neg, hyper.alpha_pos);
    config.update(args.mining.to_json());
    config.update(args.brl.to_json());
  } else if (args.model == "frl") {
    const auto pool = antecedent_pool(mine_antecedents(ds, args.mining.params()));
    if (pool.empty()) throw std::runtime_error("train: no antecedents pass the mining thresholds");
    const FrlHyper hyper = args.frl.hyper(args.seed, args.threads);
    const FallingRuleList list = frl_fit(ds, pool, hyper);
    write_file(args.out, falling_list_to_json(list, schema) + "\n");
    std::cout << render_falling_list(list, schema);
    config.update(args.mining.to_json());
    config.update(args.frl.to_json());
  } else if (args.model == "cox") {
    auto [rows, names] = survival_design(ds);
    double penalizer = args.cox_penalizer;
    if (penalizer < 0.0) {
      const std::vector<double> grid = {1e-3, 1e-2, 1e-1, 1e0, 1e1};
      penalizer = select_penalizer(rows, grid, args.seed);
    }
    const CoxModel model = cox_fit(rows, penalizer, names);
    write_file(args.out, model.to_json() + "\n");
    config["penalizer"] = penalizer;
    std::cout << "cox model fitted, penalizer " << penalizer << "\n";
  } else if (args.model == "rf") {
    const BinaryMatrix matrix = one_hot_encode(ds);
    const ForestModel model =
        args.rf_trees > 0
            ? rf_train(matrix, ds.label, args.rf_trees, args.seed, args.threads)
            : rf_fit(matrix, ds.label, default_tree_count_grid(), args.seed, args.threads);
    write_file(args.out, model.to_json() + "\n");
    config["tree_count"] = model.tree_count;
    std::cout << "random forest fitted with " << model.tree_count << " trees\n";
  } else if (args.model == "lr") {
    const BinaryMatrix matrix = one_hot_encode(ds);
    const LogisticModel model = args.lr_c > 0.0
                                    ? lr_train(matrix, ds.label, args.lr_c)
                                    : lr_fit(matrix, ds.label, default_c_grid(), args.seed);
    write_file(args.out, model.to_json(matrix.column_names) + "\n");
    config["C"] = model.c_value;
    std::cout << "logistic model fitted, C = " << model.c_value << "\n";
  } else {
    throw CLI::ValidationError("--model", "unknown model '" + args.model + "'");
  }
  echo_config(args.out, config);
  return 0;
}

// --- eval -------------------------------------------------------------------------

struct EvalArgs {
  std::string in, schema, model, out, roc;
  int outer = 5, inner = 3, seeds = 3;
  uint64_t seed = 0;
  int threads = 1;
  bool table = true;
  MiningFlags mining;
  BrlFlags brl;
  FrlFlags frl;
  int label_threshold = kDefaultLabelThresholdDays;
  std::string config_path;
};

int run_eval(const EvalArgs& args) {
  const FeatureSchema schema = load_schema(args.schema);
  const CategoricalDataset ds = load_csv(args.in, schema, args.label_threshold);

  LearnerSpec learner;
  RuleLearnerOptions options;
  options.mining = args.mining.params();
  if (args.model == "brl") {
    learner = make_brl_learner(args.brl.hyper(0, 1), options);
  } else if (args.model == "frl") {
    learner = make_frl_learner(args.frl.hyper(0, 1), options);
  } else if (args.model == "rf") {
    learner = make_rf_learner();
  } else if (args.model == "lr") {
    learner = make_lr_learner();
  } else if (args.model == "cox") {
    learner = make_cox_learner({1e-3, 1e-2, 1e-1, 1e0, 1e1}, args.label_threshold);
  } else {
    throw CLI::ValidationError("--model", "unknown model '" + args.model + "'");
  }

  const EvalReport report =
      nested_cv(learner, ds, args.inner, args.outer, args.seeds, args.seed, args.threads);
  if (!args.out.empty()) write_file(args.out, report.to_json() + "\n");
  if (!args.roc.empty()) write_file(args.roc, report.roc_csv());
  if (args.table) std::cout << report.to_table();

  json config = {{"command", "eval"},   {"in", args.in},       {"schema", args.schema},
                 {"model", args.model}, {"outer", args.outer}, {"inner", args.inner},
                 {"seeds", args.seeds}, {"seed", args.seed},   {"threads", args.threads}};
  config.update(args.mining.to_json());
  if (args.model == "brl") config.update(args.brl.to_json());
  if (args.model == "frl") config.update(args.frl.to_json());
  if (!args.out.empty()) echo_config(args.out, config);
  return 0;
}

// --- explain -----------------------------------------------------------------------

struct ExplainArgs {
  std::vector<std::string> models;
  std::string in, schema, method, out;
  int instance = 0;
  int samples = 5000;
  double kernel_width = 0.25;
  int repeats = 10;
  uint64_t seed = 0;
  std::string config_path;
};

MatrixScorer scorer_from_model_json(const std::string& text) {
  const json doc = json::parse(text);
  const std::string type = doc.value("type", "");
  if (type == "rf") {
    auto model = std::make_shared<ForestModel>(ForestModel::from_json(text));
    return [model](const BinaryMatrix& m) { return model->predict_proba(m); };
  }
  if (type == "lr") {
    auto model = std::make_shared<LogisticModel>(LogisticModel::from_json(text));
    return [model](const BinaryMatrix& m) { return model->predict_proba(m); };
  }
  throw std::invalid_argument("explain: model type '" + type + "' exposes no class probability");
}

int run_explain(const ExplainArgs& args) {
  if (args.models.empty()) throw CLI::ValidationError("--model", "at least one model required");
  json config = {{"command", "explain"}, {"method", args.method}, {"out", args.out},
                 {"seed", args.seed},    {"models", args.models}};

  if (args.method == "cox-coef") {
    std::vector<CoxModel> models;
    for (const std::string& path : args.models) {
      models.push_back(CoxModel::from_json(read_file(path)));
    }
    const auto report = cox_importance(models);
    write_file(args.out, cox_importance_to_json(report) + "\n");
  } else {
    const FeatureSchema schema = load_schema(args.schema);
    const CategoricalDataset ds = load_csv(args.in, schema);
    const MatrixScorer scorer = scorer_from_model_json(read_file(args.models[0]));
    config["in"] = args.in;
    config["schema"] = args.schema;
    if (args.method == "surrogate") {
      if (args.instance < 0 || static_cast<size_t>(args.instance) >= ds.n_rows()) {
        throw std::invalid_argument("explain: instance index out of range");
      }
      SurrogateConfig sc;
      sc.n_samples = args.samples;
      sc.kernel_width = args.kernel_width;
      sc.seed = args.seed;
      sc.instance_id = args.instance;
      const BinaryMatrix matrix = one_hot_encode(ds);
      const LocalExplanation explanation =
          local_surrogate_explain(scorer, ds, ds.row(static_cast<size_t>(args.instance)), sc);
      write_file(args.out, local_explanation_to_json(explanation, matrix.column_names) + "\n");
      config["instance"] = args.instance;
      config["samples"] = args.samples;
      config["kernel_width"] = args.kernel_width;
    } else if (args.method == "permutation") {
      const BinaryMatrix matrix = one_hot_encode(ds);
      const auto importances =
          permutation_importance(scorer, matrix, ds.label, args.repeats, args.seed);
      write_file(args.out, permutation_importance_to_json(importances) + "\n");
      config["repeats"] = args.repeats;
    } else {
      throw CLI::ValidationError("--method", "unknown method '" + args.method + "'");
    }
  }
  echo_config(args.out, config);
  std::cout << "explanation written to " << args.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rulekit: rule-list classifiers and survival baselines for categorical cohorts"};
  app.require_subcommand(1);

  json config;
  try {
    config = load_config_json(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return kExitConfig;
  }

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic cohort CSV");
  from_config(config, "spec", synth_args.spec_path);
  from_config(config, "n", synth_args.n);
  from_config(config, "seed", synth_args.seed);
  synth->add_option("--spec", synth_args.spec_path, "SynthSpec JSON path or 'builtin'");
  synth->add_option("--n", synth_args.n, "Rows to generate");
  synth->add_option("--seed", synth_args.seed, "Random seed");
  synth->add_option("--out", synth_args.out, "Output CSV path")->required();
  synth->add_option("--schema-out", synth_args.schema_out, "Schema JSON path");
  synth->add_option("--config", synth_args.config_path, "JSON config file");

  PreprocessArgs pre_args;
  CLI::App* pre = app.add_subcommand("preprocess", "Impute and discretise a raw CSV");
  from_config(config, "seed", pre_args.seed);
  from_config(config, "knn_k", pre_args.knn_k);
  pre->add_option("--in", pre_args.in, "Raw CSV (empty cells are missing)")->required();
  pre->add_option("--out", pre_args.out, "Preprocessed CSV path")->required();
  pre->add_option("--report", pre_args.report, "Selection report JSON path");
  pre->add_option("--seed", pre_args.seed, "Random seed");
  pre->add_option("--knn-k", pre_args.knn_k, "Neighbours for the kNN imputer");
  pre->add_option("--label-threshold", pre_args.label_threshold, "Days for the one-year label");
  pre->add_flag("--select-bins,!--no-select-bins", pre_args.select_bins,
                "Cross-validate discretiser candidates");
  pre->add_option("--disc-bins-max", pre_args.disc_bins_max, "Largest bin count in the grid");
  pre->add_option("--disc-brl-iters", pre_args.brl_iters, "Rule-list iterations during selection");
  pre->add_option("--disc-brl-chains", pre_args.brl_chains, "Rule-list chains during selection");
  pre->add_option("--config", pre_args.config_path, "JSON config file");

  MineArgs mine_args;
  CLI::App* mine = app.add_subcommand("mine", "Mine antecedents from a cohort CSV");
  mine->add_option("--in", mine_args.in, "Cohort CSV")->required();
  mine->add_option("--schema", mine_args.schema, "Schema JSON")->required();
  mine->add_option("--out", mine_args.out, "Mined rules JSON path")->required();
  mine_args.mining.attach(mine, config);
  mine->add_option("--config", mine_args.config_path, "JSON config file");

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "Train a model and serialize it");
  from_config(config, "seed", train_args.seed);
  from_config(config, "threads", train_args.threads);
  from_config(config, "model", train_args.model);
  train->add_option("--in", train_args.in, "Cohort CSV")->required();
  train->add_option("--schema", train_args.schema, "Schema JSON")->required();
  train->add_option("--model", train_args.model, "brl | frl | cox | rf | lr")->required();
  train->add_option("--out", train_args.out, "Model JSON path")->required();
  train->add_option("--seed", train_args.seed, "Random seed");
  train->add_option("--threads", train_args.threads, "Worker threads");
  train->add_option("--label-threshold", train_args.label_threshold, "Days for the one-year label");
  train_args.mining.attach(train, config);
  train_args.brl.attach(train, config);
  train_args.frl.attach(train, config);
  train->add_option("--penalizer", train_args.cox_penalizer,
                    "Cox penalizer (omit to select by cross-validation)");
  train->add_option("--trees", train_args.rf_trees, "Tree count (0 = grid search)");
  train->add_option("--c-value", train_args.lr_c, "Logistic C (0 = grid search)");
  train->add_option("--config", train_args.config_path, "JSON config file");

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "Nested cross-validation report");
  from_config(config, "seed", eval_args.seed);
  from_config(config, "threads", eval_args.threads);
  from_config(config, "model", eval_args.model);
  from_config(config, "outer", eval_args.outer);
  from_config(config, "inner", eval_args.inner);
  from_config(config, "seeds", eval_args.seeds);
  eval->add_option("--in", eval_args.in, "Cohort CSV")->required();
  eval->add_option("--schema", eval_args.schema, "Schema JSON")->required();
  eval->add_option("--model", eval_args.model, "brl | frl | cox | rf | lr")->required();
  eval->add_option("--out", eval_args.out, "Report JSON path");
  eval->add_option("--roc", eval_args.roc, "ROC points CSV path");
  eval->add_option("--outer", eval_args.outer, "Outer folds");
  eval->add_option("--inner", eval_args.inner, "Inner folds");
  eval->add_option("--seeds", eval_args.seeds, "Seed repeats");
  eval->add_option("--seed", eval_args.seed, "Base random seed");
  eval->add_option("--threads", eval_args.threads, "Worker threads");
  eval->add_option("--label-threshold", eval_args.label_threshold, "Days for the one-year label");
  eval->add_flag("--table,!--no-table", eval_args.table, "Print the summary table");
  eval_args.mining.attach(eval, config);
  eval_args.brl.attach(eval, config);
  eval_args.frl.attach(eval, config);
  eval->add_option("--config", eval_args.config_path, "JSON config file");

  ExplainArgs explain_args;
  CLI::App* explain = app.add_subcommand("explain", "Explain a trained model");
  from_config(config, "seed", explain_args.seed);
  explain->add_option("--model", explain_args.models, "Model JSON (repeat for cox-coef folds)")
      ->required();
  explain->add_option("--in", explain_args.in, "Cohort CSV");
  explain->add_option("--schema", explain_args.schema, "Schema JSON");
  explain->add_option("--method", explain_args.method, "surrogate | permutation | cox-coef")
      ->required();
  explain->add_option("--instance", explain_args.instance, "Row to explain (surrogate)");
  explain->add_option("--samples", explain_args.samples, "Perturbation samples (surrogate)");
  explain->add_option("--kernel-width", explain_args.kernel_width, "Proximity kernel width");
  explain->add_option("--repeats", explain_args.repeats, "Shuffles per feature (permutation)");
  explain->add_option("--seed", explain_args.seed, "Random seed");
  explain->add_option("--out", explain_args.out, "Explanation JSON path")->required();
  explain->add_option("--config", explain_args.config_path, "JSON config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: flags: " << e.what() << "\n";
    return kExitFlags;
  }

  try {
    if (synth->parsed()) return run_synth(synth_args);
    if (pre->parsed()) return run_preprocess(pre_args);
    if (mine->parsed()) return run_mine(mine_args);
    if (train->parsed()) return run_train(train_args);
    if (eval->parsed()) return run_eval(eval_args);
    if (explain->parsed()) return run_explain(explain_args);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: flags: " << e.what() << "\n";
    return kExitFlags;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: schema: " << e.what() << "\n";
    return kExitSchema;
  } catch (const std::exception& e) {
    std::cerr << "error: runtime: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
