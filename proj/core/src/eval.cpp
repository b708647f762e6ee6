#include "rulekit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "rulekit/parallel.hpp"
#include "rulekit/stats.hpp"

namespace rulekit {

using nlohmann::json;

double accuracy(std::span<const int> preds, std::span<const uint8_t> labels) {
  if (preds.size() != labels.size() || preds.empty()) {
    throw std::invalid_argument("accuracy: size mismatch or empty input");
  }
  size_t correct = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == static_cast<int>(labels[i])) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

double macro_f1(std::span<const int> preds, std::span<const uint8_t> labels) {
  if (preds.size() != labels.size() || preds.empty()) {
    throw std::invalid_argument("macro_f1: size mismatch or empty input");
  }
  double sum = 0.0;
  for (int cls = 0; cls <= 1; ++cls) {
    int64_t tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < preds.size(); ++i) {
      const bool p = preds[i] == cls;
      const bool a = static_cast<int>(labels[i]) == cls;
      tp += p && a;
      fp += p && !a;
      fn += !p && a;
    }
    const int64_t denom = 2 * tp + fp + fn;
    sum += denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
  }
  return sum / 2.0;
}

double auroc(std::span<const double> scores, std::span<const uint8_t> labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw std::invalid_argument("auroc: size mismatch or empty input");
  }
  int64_t n_pos = 0;
  for (uint8_t y : labels) n_pos += y ? 1 : 0;
  const int64_t n_neg = static_cast<int64_t>(labels.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("auroc: needs both classes");

  std::vector<size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  double rank_sum_pos = 0.0;
  size_t i = 0;
  while (i < idx.size()) {
    size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (size_t k = i; k < j; ++k) {
      if (labels[idx[k]]) rank_sum_pos += avg_rank;
    }
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

std::vector<std::pair<double, double>> roc_curve(std::span<const double> scores,
                                                 std::span<const uint8_t> labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw std::invalid_argument("roc_curve: size mismatch or empty input");
  }
  int64_t n_pos = 0;
  for (uint8_t y : labels) n_pos += y ? 1 : 0;
  const int64_t n_neg = static_cast<int64_t>(labels.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("roc_curve: needs both classes");

  std::vector<size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return scores[a] > scores[b]; });

  std::vector<std::pair<double, double>> points;
  points.emplace_back(0.0, 0.0);
  int64_t tp = 0, fp = 0;
  size_t i = 0;
  while (i < idx.size()) {
    size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    for (size_t k = i; k < j; ++k) {
      if (labels[idx[k]]) {
        ++tp;
      } else {
        ++fp;
      }
    }
    points.emplace_back(static_cast<double>(fp) / static_cast<double>(n_neg),
                        static_cast<double>(tp) / static_cast<double>(n_pos));
    i = j;
  }
  return points;
}

std::vector<std::vector<size_t>> stratified_folds(std::span<const uint8_t> labels, int k, Rng& rng) {
  if (k < 2) throw std::invalid_argument("stratified_folds: k must be at least 2");
  std::vector<std::vector<size_t>> folds(static_cast<size_t>(k));
  for (int cls = 0; cls <= 1; ++cls) {
    std::vector<size_t> members;
    for (size_t i = 0; i < labels.size(); ++i) {
      if (static_cast<int>(labels[i]) == cls) members.push_back(i);
    }
    rng.shuffle(members);
    for (size_t i = 0; i < members.size(); ++i) {
      folds[i % static_cast<size_t>(k)].push_back(members[i]);
    }
  }
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

namespace {

std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  std::string s(buf);
  if (s.size() > 1 && s[0] == '0') s.erase(0, 1);  // Table style: ".758"
  return s;
}

}  // namespace

std::string EvalReport::to_json() const {
  json doc;
  doc["model"] = model;
  doc["protocol"] = {{"inner_folds", inner_folds},
                     {"outer_folds", outer_folds},
                     {"seed_repeats", seed_repeats},
                     {"base_seed", base_seed}};
  json jruns = json::array();
  for (const RunResult& run : runs) {
    json jr = {{"seed_index", run.seed_index},
               {"outer_fold", run.outer_fold},
               {"hyper_index", run.hyper_index},
               {"failed", run.failed}};
    if (run.failed) {
      jr["error"] = run.error;
    } else {
      jr["accuracy"] = run.accuracy;
      jr["macro_f1"] = run.f1;
      if (run.auroc) jr["auroc"] = *run.auroc;
    }
    jruns.push_back(jr);
  }
  doc["runs"] = jruns;
  doc["failed_runs"] = failed_runs;
  json agg = {{"accuracy", {{"mean", acc_mean}, {"std", acc_std}}},
              {"macro_f1", {{"mean", f1_mean}, {"std", f1_std}}}};
  if (auroc_mean) agg["auroc"] = {{"mean", *auroc_mean}, {"std", *auroc_std}};
  doc["aggregate"] = agg;
  return doc.dump(2);
}

std::string EvalReport::to_table() const {
  std::ostringstream out;
  out << "Metric    " << model << "\n";
  out << "Accuracy  " << fmt3(acc_mean) << " (" << fmt3(acc_std) << ")\n";
  out << "F1        " << fmt3(f1_mean) << " (" << fmt3(f1_std) << ")\n";
  if (auroc_mean) {
    out << "AUROC     " << fmt3(*auroc_mean) << " (" << fmt3(*auroc_std) << ")\n";
  } else {
    out << "AUROC     n/a\n";
  }
  return out.str();
}

std::string EvalReport::roc_csv() const {
  std::ostringstream out;
  out << "run,fpr,tpr\n";
  for (size_t r = 0; r < runs.size(); ++r) {
    for (const auto& [fpr, tpr] : runs[r].roc) {
      out << r << ',' << fpr << ',' << tpr << '\n';
    }
  }
  return out.str();
}

EvalReport nested_cv(const LearnerSpec& learner, const CategoricalDataset& ds, int inner, int outer,
                     int seeds, uint64_t base_seed, int threads) {
  if (inner < 2 || outer < 2 || seeds < 1) {
    throw std::invalid_argument("nested_cv: need inner >= 2, outer >= 2, seeds >= 1");
  }
  if (ds.n_rows() < static_cast<size_t>(outer)) {
    throw std::invalid_argument("nested_cv: fewer rows than outer folds");
  }
  if (learner.hyper_labels.empty()) throw std::invalid_argument("nested_cv: empty hyper grid");

  // Outer fold assignments per seed, fixed up front.
  Rng root(base_seed);
  std::vector<std::vector<std::vector<size_t>>> outer_folds(static_cast<size_t>(seeds));
  for (int s = 0; s < seeds; ++s) {
    Rng fold_rng = root.stream(static_cast<uint64_t>(s));
    outer_folds[static_cast<size_t>(s)] = stratified_folds(ds.label, outer, fold_rng);
  }

  EvalReport report;
  report.model = learner.name;
  report.inner_folds = inner;
  report.outer_folds = outer;
  report.seed_repeats = seeds;
  report.base_seed = base_seed;
  const size_t n_runs = static_cast<size_t>(seeds) * static_cast<size_t>(outer);
  report.runs.assign(n_runs, {});

  parallel_for(n_runs, threads, [&](size_t run_index) {
    const int s = static_cast<int>(run_index) / outer;
    const int f = static_cast<int>(run_index) % outer;
    RunResult& run = report.runs[run_index];
    run.seed_index = s;
    run.outer_fold = f;

    const std::vector<size_t>& test_rows = outer_folds[static_cast<size_t>(s)][static_cast<size_t>(f)];
    std::vector<size_t> train_rows;
    for (int g = 0; g < outer; ++g) {
      if (g == f) continue;
      const auto& fold = outer_folds[static_cast<size_t>(s)][static_cast<size_t>(g)];
      train_rows.insert(train_rows.end(), fold.begin(), fold.end());
    }
    std::sort(train_rows.begin(), train_rows.end());
    const CategoricalDataset train = ds.subset(train_rows);
    const CategoricalDataset test = ds.subset(test_rows);

    try {
      size_t chosen = 0;
      if (learner.hyper_labels.size() > 1) {
        Rng inner_rng = root.stream(0x1000 + run_index);
        const auto inner_folds_idx = stratified_folds(train.label, inner, inner_rng);
        double best_score = -1.0;
        for (size_t h = 0; h < learner.hyper_labels.size(); ++h) {
          double total = 0.0;
          for (int g = 0; g < inner; ++g) {
            const std::vector<size_t>& inner_test_rows = inner_folds_idx[static_cast<size_t>(g)];
            std::vector<size_t> inner_train_rows;
            for (int q = 0; q < inner; ++q) {
              if (q == g) continue;
              inner_train_rows.insert(inner_train_rows.end(),
                                      inner_folds_idx[static_cast<size_t>(q)].begin(),
                                      inner_folds_idx[static_cast<size_t>(q)].end());
            }
            std::sort(inner_train_rows.begin(), inner_train_rows.end());
            const CategoricalDataset inner_train = train.subset(inner_train_rows);
            const CategoricalDataset inner_test = train.subset(inner_test_rows);
            const uint64_t fit_seed = Rng::mix(Rng::mix(base_seed, run_index),
                                               0x2000 + h * 100 + static_cast<size_t>(g));
            const FittedModel model = learner.fit(inner_train, h, fit_seed);
            const std::vector<int> preds = model.predict(inner_test);
            total += accuracy(preds, inner_test.label);
          }
          const double score = total / static_cast<double>(inner);
          if (score > best_score) {
            best_score = score;
            chosen = h;
          }
        }
      }
      run.hyper_index = chosen;

      const uint64_t refit_seed = Rng::mix(Rng::mix(base_seed, run_index), 0x3000);
      const FittedModel model = learner.fit(train, chosen, refit_seed);
      const std::vector<int> preds = model.predict(test);
      run.accuracy = accuracy(preds, test.label);
      run.f1 = macro_f1(preds, test.label);
      if (learner.produces_scores && model.score) {
        bool has_pos = false, has_neg = false;
        for (uint8_t y : test.label) (y ? has_pos : has_neg) = true;
        if (has_pos && has_neg) {
          const std::vector<double> scores = model.score(test);
          run.auroc = auroc(scores, test.label);
          run.roc = roc_curve(scores, test.label);
        }
      }
    } catch (const std::exception& e) {
      run.failed = true;
      run.error = e.what();
    }
  });

  std::vector<double> accs, f1s, aurocs;
  for (const RunResult& run : report.runs) {
    if (run.failed) {
      ++report.failed_runs;
      continue;
    }
    accs.push_back(run.accuracy);
    f1s.push_back(run.f1);
    if (run.auroc) aurocs.push_back(*run.auroc);
  }
  if (report.failed_runs > 3) {
    throw std::runtime_error("nested_cv: " + std::to_string(report.failed_runs) +
                             " folds failed (limit 3); first error: " +
                             [&] {
                               for (const RunResult& run : report.runs) {
                                 if (run.failed) return run.error;
                               }
                               return std::string();
                             }());
  }
  if (accs.empty()) throw std::runtime_error("nested_cv: no successful runs");
  report.acc_mean = mean(accs);
  report.acc_std = sample_std(accs);
  report.f1_mean = mean(f1s);
  report.f1_std = sample_std(f1s);
  if (!aurocs.empty()) {
    report.auroc_mean = mean(aurocs);
    report.auroc_std = sample_std(aurocs);
  }
  return report;
}

}  // namespace rulekit
