#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "rulekit/preprocess.hpp"
#include "rulekit/rng.hpp"

#include "oracles.hpp"

using namespace rulekit;

namespace {

std::vector<std::optional<double>> nums(std::initializer_list<double> values) {
  std::vector<std::optional<double>> out;
  for (double v : values) out.emplace_back(v);
  return out;
}

std::optional<std::string> miss() { return std::nullopt; }

}  // namespace

TEST_CASE("baseline imputation: mode and mean with the documented tie rule") {
  RawColumn cat = RawColumn::categorical_column("c", {"A", "A", "B", miss()});
  const RawColumn filled = impute_baseline(cat);
  CHECK(*filled.category[3] == "A");

  RawColumn num = RawColumn::continuous_column("n", {2.0, 4.0, std::nullopt});
  const RawColumn mean_filled = impute_baseline(num);
  CHECK(*mean_filled.numeric[2] == doctest::Approx(3.0));

  RawColumn tie = RawColumn::categorical_column("t", {"A", "B", miss()});
  CHECK(*impute_baseline(tie).category[2] == "A");  // lexicographic tie-break

  RawColumn empty = RawColumn::categorical_column("e", {miss(), miss()});
  CHECK_THROWS_AS(static_cast<void>(impute_baseline(empty)), std::invalid_argument);
}

TEST_CASE("knn copies an exact duplicate with k = 1") {
  // row 3 duplicates row 1 on both predictors
  const RawColumn p1 = RawColumn::categorical_column("p1", {"x", "y", "x", "y"});
  const RawColumn p2 = RawColumn::continuous_column("p2", nums({1.0, 5.0, 9.0, 5.0}));
  RawColumn target = RawColumn::categorical_column("t", {"L", "R", "L", miss()});
  const std::vector<RawColumn> predictors = {p1, p2};
  const RawColumn filled = impute_knn(target, predictors, 1, true);
  CHECK(*filled.category[3] == "R");
}

TEST_CASE("knn against an exhaustive distance computation") {
  // six rows, two predictors, target missing in rows 4 and 5
  const RawColumn p1 = RawColumn::categorical_column("p1", {"a", "a", "b", "b", "a", "b"});
  const RawColumn p2 = RawColumn::continuous_column("p2", nums({0.0, 2.0, 4.0, 6.0, 1.0, 5.0}));
  RawColumn target =
      RawColumn::continuous_column("t", {10.0, 20.0, 30.0, 40.0, std::nullopt, std::nullopt});
  const std::vector<RawColumn> predictors = {p1, p2};
  const RawColumn filled = impute_knn(target, predictors, 3, true);
  CHECK(filled.complete());

  // oracle: recompute every donor distance by hand, scaled to [0, 1]
  auto oracle_fill = [&](size_t row) {
    struct Entry {
      double dist;
      size_t donor;
    };
    std::vector<Entry> entries;
    for (size_t d = 0; d < 4; ++d) {
      double dist = *p1.category[row] == *p1.category[d] ? 0.0 : 1.0;
      const double scaled_r = (*p2.numeric[row] - 0.0) / 6.0;
      const double scaled_d = (*p2.numeric[d] - 0.0) / 6.0;
      dist += (scaled_r - scaled_d) * (scaled_r - scaled_d);
      entries.push_back({dist, d});
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      return a.dist != b.dist ? a.dist < b.dist : a.donor < b.donor;
    });
    return (*target.numeric[entries[0].donor] + *target.numeric[entries[1].donor] +
            *target.numeric[entries[2].donor]) /
           3.0;
  };
  CHECK(*filled.numeric[4] == doctest::Approx(oracle_fill(4)).epsilon(1e-12));
  CHECK(*filled.numeric[5] == doctest::Approx(oracle_fill(5)).epsilon(1e-12));
}

TEST_CASE("scaling can flip the nearest neighbour") {
  // p1 spans [0, 1000], p2 is categorical. Raw distances are dominated by p1;
  // scaled distances let the categorical mismatch decide.
  const RawColumn p1 = RawColumn::continuous_column("p1", nums({0.0, 100.0, 1000.0, 90.0}));
  const RawColumn p2 = RawColumn::categorical_column("p2", {"u", "v", "u", "u"});
  RawColumn target = RawColumn::continuous_column("t", {1.0, 2.0, 3.0, std::nullopt});
  const std::vector<RawColumn> predictors = {p1, p2};
  // raw distances from row 3: row 0 = 90^2, row 1 = 10^2 + 1 mismatch, so the
  // mismatched row 1 wins; scaled to [0,1] the numeric gap shrinks and the
  // categorical mismatch makes row 0 the nearest instead
  const RawColumn raw = impute_knn(target, predictors, 1, false);
  const RawColumn scaled = impute_knn(target, predictors, 1, true);
  CHECK(*raw.numeric[3] == doctest::Approx(2.0));
  CHECK(*scaled.numeric[3] == doctest::Approx(1.0));
}

TEST_CASE("knn preconditions") {
  RawColumn target = RawColumn::continuous_column("t", {std::nullopt, 1.0});
  const std::vector<RawColumn> predictors = {
      RawColumn::categorical_column("p", {"a", "b"})};
  CHECK_THROWS_AS(static_cast<void>(impute_knn(target, predictors, 2, true)),
                  std::invalid_argument);  // k exceeds present rows
  RawColumn all_missing = RawColumn::continuous_column("t", {std::nullopt, std::nullopt});
  CHECK_THROWS_AS(static_cast<void>(impute_knn(all_missing, predictors, 1, true)),
                  std::invalid_argument);
}

TEST_CASE("regression imputation is exact on a linear target") {
  std::vector<std::optional<double>> x_values, y_values;
  for (int i = 0; i < 20; ++i) {
    x_values.emplace_back(static_cast<double>(i));
    y_values.emplace_back(2.0 * i + 1.0);
  }
  y_values[7].reset();
  const std::vector<RawColumn> predictors = {RawColumn::continuous_column("x", x_values)};
  const RawColumn filled =
      impute_regression(RawColumn::continuous_column("y", y_values), predictors);
  CHECK(filled.complete());
  CHECK(std::fabs(*filled.numeric[7] - 15.0) < 1e-8);
}

TEST_CASE("regression imputation: constant target and hand-solved system") {
  const std::vector<RawColumn> predictors = {
      RawColumn::continuous_column("x", nums({0.0, 1.0, 2.0, 3.0}))};
  RawColumn constant =
      RawColumn::continuous_column("y", {5.0, 5.0, 5.0, std::nullopt});
  CHECK(*impute_regression(constant, predictors).numeric[3] == doctest::Approx(5.0));

  // present rows (0,1), (1,3), (2,4): slope 3/2, intercept 7/6, prediction at
  // x = 3 is 17/3
  RawColumn target = RawColumn::continuous_column("y", {1.0, 3.0, 4.0, std::nullopt});
  const RawColumn filled = impute_regression(target, predictors);
  CHECK(*filled.numeric[3] == doctest::Approx(17.0 / 3.0).epsilon(1e-7));
}

TEST_CASE("regression imputation picks the argmax category") {
  // category tracks the predictor's sign
  std::vector<std::optional<double>> x_values;
  std::vector<std::optional<std::string>> y_values;
  for (int i = 0; i < 30; ++i) {
    const double x = i < 15 ? -1.0 - i % 5 : 1.0 + i % 5;
    x_values.emplace_back(x);
    y_values.emplace_back(x < 0 ? "neg" : "pos");
  }
  y_values[3].reset();
  y_values[20].reset();
  const std::vector<RawColumn> predictors = {RawColumn::continuous_column("x", x_values)};
  const RawColumn filled =
      impute_regression(RawColumn::categorical_column("y", y_values), predictors);
  CHECK(*filled.category[3] == "neg");
  CHECK(*filled.category[20] == "pos");
}

TEST_CASE("imputer selection prefers regression on a linear target") {
  Rng rng(101);
  std::vector<std::optional<double>> x_values, y_values;
  for (int i = 0; i < 60; ++i) {
    const double x = rng.uniform() * 10.0;
    x_values.emplace_back(x);
    y_values.emplace_back(3.0 * x - 2.0);
  }
  for (size_t i = 0; i < 6; ++i) y_values[i * 9].reset();
  const std::vector<RawColumn> predictors = {RawColumn::continuous_column("x", x_values)};
  const auto candidates = default_imputer_candidates();
  const ImputerSelection selection = select_imputer(
      RawColumn::continuous_column("y", y_values), predictors, candidates, 7);
  CHECK(selection.chosen.method == ImputerCandidate::Method::regression);
}

TEST_CASE("imputer selection on pure noise usually keeps the baseline") {
  int baseline_wins = 0;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(200 + seed);
    std::vector<std::optional<double>> x_values, y_values;
    for (int i = 0; i < 50; ++i) {
      x_values.emplace_back(rng.uniform());
      y_values.emplace_back(rng.uniform());
    }
    const std::vector<RawColumn> predictors = {RawColumn::continuous_column("x", x_values)};
    const ImputerSelection selection =
        select_imputer(RawColumn::continuous_column("y", y_values), predictors,
                       default_imputer_candidates(), seed);
    if (selection.chosen.method == ImputerCandidate::Method::baseline) ++baseline_wins;
  }
  CHECK(baseline_wins >= 6);
}

TEST_CASE("imputer selection tie rule on a constant target") {
  std::vector<std::optional<std::string>> y_values(30, std::optional<std::string>("only"));
  std::vector<std::optional<std::string>> p_values;
  for (int i = 0; i < 30; ++i) p_values.emplace_back(i % 2 ? "a" : "b");
  const std::vector<RawColumn> predictors = {RawColumn::categorical_column("p", p_values)};
  const ImputerSelection selection = select_imputer(
      RawColumn::categorical_column("y", y_values), predictors, default_imputer_candidates(), 3);
  // every method scores perfect accuracy; the tie goes to the baseline
  CHECK(selection.chosen.method == ImputerCandidate::Method::baseline);
  CHECK(selection.score == doctest::Approx(1.0));
}

TEST_CASE("selection report JSON carries per-fold scores and the chosen flag") {
  Rng rng(5);
  std::vector<std::optional<double>> x_values, y_values;
  for (int i = 0; i < 40; ++i) {
    x_values.emplace_back(rng.uniform());
    y_values.emplace_back(rng.uniform());
  }
  const std::vector<RawColumn> predictors = {RawColumn::continuous_column("x", x_values)};
  const ImputerSelection selection =
      select_imputer(RawColumn::continuous_column("y", y_values), predictors,
                     default_imputer_candidates(), 1);
  const std::string text = selection.to_json();
  CHECK(text.find("\"chosen\": true") != std::string::npos);
  CHECK(text.find("fold_scores") != std::string::npos);
}

TEST_CASE("uniform discretiser: twelve equal bins over [0, 120]") {
  std::vector<double> values;
  for (int i = 0; i <= 120; ++i) values.push_back(static_cast<double>(i));
  const Discretiser d = fit_discretiser(values, Discretiser::Method::uniform, 12);
  REQUIRE(d.cut_points.size() == 11);
  for (int i = 0; i < 11; ++i) {
    CHECK(d.cut_points[static_cast<size_t>(i)] == doctest::Approx(10.0 * (i + 1)));
  }
}

TEST_CASE("quantile discretiser: median split of 1..10") {
  std::vector<double> values;
  for (int i = 1; i <= 10; ++i) values.push_back(static_cast<double>(i));
  const Discretiser d = fit_discretiser(values, Discretiser::Method::quantile, 2);
  REQUIRE(d.cut_points.size() == 1);
  CHECK(d.cut_points[0] == doctest::Approx(5.5));
  int low = 0, high = 0;
  for (double v : values) (d.apply(v) == 0 ? low : high) += 1;
  CHECK(low == 5);
  CHECK(high == 5);
}

TEST_CASE("kmeans discretiser separates the two obvious clusters") {
  const std::vector<double> values = {1, 2, 3, 10, 11, 12};
  const Discretiser d = fit_discretiser(values, Discretiser::Method::kmeans, 2);
  REQUIRE(d.cut_points.size() == 1);
  CHECK(d.cut_points[0] > 3.0);
  CHECK(d.cut_points[0] < 10.0);
}

TEST_CASE("dp kmeans is optimal against exhaustive partition enumeration") {
  Rng rng(303);
  for (int trial = 0; trial < 20; ++trial) {
    const size_t n = 5 + rng.below(8);  // up to 12 values
    std::vector<double> values;
    for (size_t i = 0; i < n; ++i) values.push_back(std::floor(rng.uniform() * 50.0));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    const int k = 2 + static_cast<int>(rng.below(3));
    if (values.size() < static_cast<size_t>(k)) continue;

    const Discretiser d = fit_discretiser(values, Discretiser::Method::kmeans, k);
    // SSE of the DP clustering, reconstructed through apply()
    std::vector<std::vector<double>> clusters(static_cast<size_t>(k));
    for (double v : values) clusters[static_cast<size_t>(d.apply(v))].push_back(v);
    double dp_sse = 0.0;
    for (const auto& cluster : clusters) {
      if (cluster.empty()) continue;
      double m = 0.0;
      for (double v : cluster) m += v;
      m /= static_cast<double>(cluster.size());
      for (double v : cluster) dp_sse += (v - m) * (v - m);
    }
    CHECK(dp_sse == doctest::Approx(oracles::best_contiguous_sse(values, k)).epsilon(1e-9));
  }
}

TEST_CASE("apply is monotone and clamps out-of-range values") {
  std::vector<double> values;
  for (int i = 0; i <= 100; ++i) values.push_back(static_cast<double>(i));
  const Discretiser d = fit_discretiser(values, Discretiser::Method::quantile, 4);
  int prev = d.apply(-1000.0);
  CHECK(prev == 0);
  for (double v = -5.0; v <= 105.0; v += 0.5) {
    const int bin = d.apply(v);
    CHECK(bin >= prev);
    prev = bin;
  }
  CHECK(d.apply(1e9) == 3);
  CHECK(static_cast<int>(d.bin_labels().size()) == 4);
}

TEST_CASE("discretiser rejects impossible requests") {
  const std::vector<double> constant = {3.0, 3.0, 3.0};
  CHECK_THROWS_AS(static_cast<void>(fit_discretiser(constant, Discretiser::Method::uniform, 2)),
                  std::invalid_argument);
  const std::vector<double> three = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(static_cast<void>(fit_discretiser(three, Discretiser::Method::quantile, 4)),
                  std::invalid_argument);
  CHECK_THROWS_AS(static_cast<void>(fit_discretiser(three, Discretiser::Method::kmeans, 4)),
                  std::invalid_argument);
}

namespace {

// Base dataset with a single noise feature; labels planted on the continuous
// column to be discretised.
CategoricalDataset threshold_base(const std::vector<double>& xs, double threshold, uint64_t seed) {
  CategoricalDataset ds;
  ds.schema.features.push_back({"noise", FeatureKind::categorical, {"a", "b"}});
  Rng rng(seed);
  for (double x : xs) {
    ds.cells.push_back(static_cast<int32_t>(rng.below(2)));
    const uint8_t label = x > threshold ? 1 : 0;
    ds.survival_days.push_back(label ? 500 : 100);
    ds.event_observed.push_back(1);
    ds.label.push_back(label);
  }
  return ds;
}

BrlHyper small_brl() {
  BrlHyper hyper;
  hyper.chains = 1;
  hyper.iterations = 800;
  hyper.burn_in = 300;
  hyper.thin = 5;
  return hyper;
}

}  // namespace

TEST_CASE("discretiser selection finds the quantile split of a median threshold") {
  int quantile_near_top = 0;
  for (uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(400 + seed);
    std::vector<double> xs;
    for (int i = 0; i < 160; ++i) xs.push_back(std::exp(rng.uniform() * 3.0));  // skewed
    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    const double median = 0.5 * (sorted[79] + sorted[80]);
    const CategoricalDataset base = threshold_base(xs, median, seed);
    std::vector<std::optional<double>> column;
    for (double x : xs) column.emplace_back(x);

    const std::vector<Discretiser::Method> methods = {
        Discretiser::Method::uniform, Discretiser::Method::quantile, Discretiser::Method::kmeans};
    const std::vector<int> bins = {2, 4};
    const DiscretiserSelection selection =
        select_discretiser(base, RawColumn::continuous_column("x", column), methods, bins,
                           small_brl(), MiningParams{0.1, 0.7, 2}, seed);
    double best = 0.0, quantile2 = 0.0;
    for (const auto& report : selection.reports) {
      if (report.disqualified) continue;
      best = std::max(best, report.mean_score);
      if (report.method == Discretiser::Method::quantile && report.bin_count == 2) {
        quantile2 = report.mean_score;
      }
    }
    if (quantile2 >= best - 0.03) ++quantile_near_top;
  }
  CHECK(quantile_near_top >= 4);
}

TEST_CASE("discretiser selection tie rule and full grid size") {
  // constant labels: every candidate ties at accuracy 1
  std::vector<double> xs;
  Rng rng(17);
  for (int i = 0; i < 80; ++i) xs.push_back(rng.uniform() * 100.0);
  CategoricalDataset base = threshold_base(xs, -1.0, 3);  // every label is 1
  std::vector<std::optional<double>> column;
  for (double x : xs) column.emplace_back(x);

  const std::vector<Discretiser::Method> methods = {
      Discretiser::Method::uniform, Discretiser::Method::quantile, Discretiser::Method::kmeans};
  const std::vector<int> bins = default_bin_counts();
  const DiscretiserSelection selection =
      select_discretiser(base, RawColumn::continuous_column("x", column), methods, bins,
                         small_brl(), MiningParams{}, 5);
  CHECK(selection.reports.size() == 18);  // 3 methods x 6 sizes
  CHECK(selection.method == Discretiser::Method::uniform);
  CHECK(selection.bin_count == 2);
  CHECK(selection.mean_accuracy == doctest::Approx(1.0));
}

TEST_CASE("raw csv to dataset round trip through imputation and discretisation") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "rulekit_raw_test.csv").string();
  {
    std::ofstream out(path);
    out << "Colour,Size,survival_days,event_observed\n";
    out << "red,1.5,400,1\n";
    out << "blue,,100,1\n";
    out << "red,3.5,900,0\n";
    out << ",9.0,50,1\n";
    out << "blue,12.0,800,1\n";
    out << "red,2.0,30,1\n";
  }
  RawTable table = load_raw_csv(path);
  REQUIRE(table.n_rows == 6);
  REQUIRE(table.columns.size() == 2);
  CHECK(table.columns[0].kind == RawColumn::Kind::categorical);
  CHECK(table.columns[1].kind == RawColumn::Kind::continuous);
  CHECK(table.has_outcome);

  for (RawColumn& col : table.columns) {
    if (!col.complete()) col = impute_baseline(col);
  }
  std::vector<double> size_values;
  for (const auto& v : table.columns[1].numeric) size_values.push_back(*v);
  std::map<std::string, Discretiser> discretisers;
  discretisers.emplace("Size", fit_discretiser(size_values, Discretiser::Method::quantile, 2));

  const CategoricalDataset ds = assemble_dataset(table, discretisers);
  CHECK(ds.n_rows() == 6);
  CHECK(ds.n_features() == 2);
  CHECK(ds.schema.features[0].categories == std::vector<std::string>{"blue", "red"});
  CHECK(ds.label[0] == 1);
  CHECK(ds.label[1] == 0);
  CHECK(ds.label[2] == 1);  // censored past a year
  ds.validate();
  std::remove(path.c_str());
}
