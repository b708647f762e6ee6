#include "rulekit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "rulekit/rng.hpp"

namespace rulekit {

using nlohmann::json;

int Feature::category_index(std::string_view category) const {
  for (size_t i = 0; i < categories.size(); ++i) {
    if (categories[i] == category) return static_cast<int>(i);
  }
  return -1;
}

void FeatureSchema::validate() const {
  std::unordered_set<std::string> names;
  for (const Feature& f : features) {
    if (!names.insert(f.name).second) {
      throw std::invalid_argument("schema: duplicate feature name '" + f.name + "'");
    }
    if (f.categories.size() < 2) {
      throw std::invalid_argument("schema: feature '" + f.name + "' needs at least 2 categories");
    }
    std::unordered_set<std::string> cats;
    for (const std::string& c : f.categories) {
      if (!cats.insert(c).second) {
        throw std::invalid_argument("schema: feature '" + f.name + "' repeats category '" + c + "'");
      }
    }
  }
}

int FeatureSchema::feature_index(std::string_view name) const {
  for (size_t i = 0; i < features.size(); ++i) {
    if (features[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

size_t FeatureSchema::total_categories() const {
  size_t total = 0;
  for (const Feature& f : features) total += f.categories.size();
  return total;
}

std::string FeatureSchema::to_json() const {
  json doc;
  doc["features"] = json::array();
  for (const Feature& f : features) {
    doc["features"].push_back({{"name", f.name},
                               {"kind", f.kind == FeatureKind::ordinal ? "ordinal-categorical" : "categorical"},
                               {"categories", f.categories}});
  }
  return doc.dump(2);
}

FeatureSchema FeatureSchema::from_json(const std::string& text) {
  json doc = json::parse(text);
  FeatureSchema schema;
  for (const json& jf : doc.at("features")) {
    Feature f;
    f.name = jf.at("name").get<std::string>();
    const std::string kind = jf.value("kind", "categorical");
    f.kind = kind == "ordinal-categorical" ? FeatureKind::ordinal : FeatureKind::categorical;
    f.categories = jf.at("categories").get<std::vector<std::string>>();
    schema.features.push_back(std::move(f));
  }
  schema.validate();
  return schema;
}

void CategoricalDataset::validate() const {
  schema.validate();
  const size_t n = n_rows();
  const size_t width = schema.features.size();
  if (cells.size() != n * width || event_observed.size() != n || label.size() != n) {
    throw std::invalid_argument("dataset: column lengths differ");
  }
  for (size_t r = 0; r < n; ++r) {
    for (size_t f = 0; f < width; ++f) {
      const int32_t c = category(r, f);
      if (c < 0 || static_cast<size_t>(c) >= schema.features[f].categories.size()) {
        throw std::invalid_argument("dataset: invalid category index in row " + std::to_string(r));
      }
    }
    if (!event_observed[r] && survival_days[r] <= kDefaultLabelThresholdDays) {
      throw std::invalid_argument("dataset: censored row " + std::to_string(r) +
                                  " has survival_days <= threshold");
    }
  }
}

CategoricalDataset CategoricalDataset::subset(std::span<const size_t> row_indices) const {
  CategoricalDataset out;
  out.schema = schema;
  const size_t width = schema.features.size();
  out.cells.reserve(row_indices.size() * width);
  for (size_t r : row_indices) {
    for (size_t f = 0; f < width; ++f) out.cells.push_back(category(r, f));
    out.survival_days.push_back(survival_days[r]);
    out.event_observed.push_back(event_observed[r]);
    out.label.push_back(label[r]);
  }
  return out;
}

int make_label(int survival_days, bool event_observed, int threshold_days) {
  if (survival_days < 0) throw std::invalid_argument("make_label: negative survival_days");
  if (!event_observed && survival_days <= threshold_days) {
    throw std::invalid_argument("make_label: censored observation with survival_days " +
                                std::to_string(survival_days) + " <= threshold " +
                                std::to_string(threshold_days));
  }
  return survival_days > threshold_days ? 1 : 0;
}

BinaryMatrix one_hot_encode(const CategoricalDataset& ds) {
  BinaryMatrix m;
  m.n_rows = ds.n_rows();
  std::vector<size_t> offsets;  // first column of each feature group
  size_t total = 0;
  for (size_t f = 0; f < ds.n_features(); ++f) {
    offsets.push_back(total);
    const Feature& feat = ds.schema.features[f];
    for (const std::string& c : feat.categories) {
      m.column_names.push_back(feat.name + ": " + c);
      m.column_feature.push_back(static_cast<int32_t>(f));
    }
    total += feat.categories.size();
  }
  m.values.assign(m.n_rows * total, 0);
  for (size_t r = 0; r < ds.n_rows(); ++r) {
    for (size_t f = 0; f < ds.n_features(); ++f) {
      m.values[r * total + offsets[f] + static_cast<size_t>(ds.category(r, f))] = 1;
    }
  }
  return m;
}

CategoricalDataset merge_collinear(const CategoricalDataset& ds,
                                   std::span<const CollinearMerge> merges) {
  CategoricalDataset current = ds;
  for (const CollinearMerge& merge : merges) {
    std::vector<size_t> source_idx;
    for (const std::string& name : merge.source_features) {
      const int idx = current.schema.feature_index(name);
      if (idx < 0) throw std::invalid_argument("merge_collinear: unknown source feature '" + name + "'");
      source_idx.push_back(static_cast<size_t>(idx));
    }
    if (source_idx.empty()) throw std::invalid_argument("merge_collinear: empty source list");

    // Merged categories keep the first-appearance order of the combination map.
    Feature merged;
    merged.name = merge.merged_feature;
    std::unordered_map<std::string, int> merged_code;
    // combination key -> merged category index
    std::unordered_map<std::string, int> combo_to_code;
    auto combo_key = [](std::span<const std::string> cats) {
      std::string key;
      for (const std::string& c : cats) {
        key += c;
        key += '\x1f';
      }
      return key;
    };
    for (const auto& [cats, merged_cat] : merge.combinations) {
      if (cats.size() != source_idx.size()) {
        throw std::invalid_argument("merge_collinear: combination arity mismatch for '" +
                                    merged_cat + "'");
      }
      auto [it, inserted] = merged_code.try_emplace(merged_cat, static_cast<int>(merged.categories.size()));
      if (inserted) merged.categories.push_back(merged_cat);
      combo_to_code[combo_key(cats)] = it->second;
    }
    if (merged.categories.size() < 2) {
      throw std::invalid_argument("merge_collinear: merged feature '" + merge.merged_feature +
                                  "' needs at least 2 categories");
    }

    FeatureSchema next_schema;
    std::vector<size_t> kept;  // feature indices carried over unchanged
    for (size_t f = 0; f < current.n_features(); ++f) {
      if (std::find(source_idx.begin(), source_idx.end(), f) == source_idx.end()) {
        next_schema.features.push_back(current.schema.features[f]);
        kept.push_back(f);
      }
    }
    next_schema.features.push_back(merged);
    next_schema.validate();

    CategoricalDataset next;
    next.schema = next_schema;
    next.survival_days = current.survival_days;
    next.event_observed = current.event_observed;
    next.label = current.label;
    next.cells.reserve(current.n_rows() * next_schema.features.size());
    std::vector<std::string> combo(source_idx.size());
    for (size_t r = 0; r < current.n_rows(); ++r) {
      for (size_t f : kept) next.cells.push_back(current.category(r, f));
      for (size_t s = 0; s < source_idx.size(); ++s) {
        const Feature& sf = current.schema.features[source_idx[s]];
        combo[s] = sf.categories[static_cast<size_t>(current.category(r, source_idx[s]))];
      }
      const auto it = combo_to_code.find(combo_key(combo));
      if (it == combo_to_code.end()) {
        std::string pair_text;
        for (size_t s = 0; s < combo.size(); ++s) {
          if (s) pair_text += ", ";
          pair_text += combo[s];
        }
        throw std::invalid_argument("merge_collinear: row " + std::to_string(r) +
                                    " has uncovered combination (" + pair_text + ")");
      }
      next.cells.push_back(it->second);
    }
    current = std::move(next);
  }
  return current;
}

// --- CSV ---------------------------------------------------------------------

namespace {

std::vector<std::string> parse_csv_record(const std::string& line, size_t line_no) {
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
    } else if (ch == '\r') {
      // tolerated before the line end
    } else {
      field += ch;
    }
  }
  if (in_quotes) {
    throw std::invalid_argument("csv: unterminated quote on line " + std::to_string(line_no));
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

CategoricalDataset load_csv(const std::string& path, const FeatureSchema& schema,
                            int label_threshold_days) {
  schema.validate();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("load_csv: missing header in '" + path + "'");
  const std::vector<std::string> header = parse_csv_record(line, 1);

  std::unordered_map<std::string, size_t> col_of;
  for (size_t i = 0; i < header.size(); ++i) col_of[header[i]] = i;
  std::vector<size_t> feature_col(schema.features.size());
  for (size_t f = 0; f < schema.features.size(); ++f) {
    auto it = col_of.find(schema.features[f].name);
    if (it == col_of.end()) {
      throw std::invalid_argument("load_csv: missing required column '" + schema.features[f].name + "'");
    }
    feature_col[f] = it->second;
  }
  auto require_col = [&](const char* name) {
    auto it = col_of.find(name);
    if (it == col_of.end()) {
      throw std::invalid_argument(std::string("load_csv: missing required column '") + name + "'");
    }
    return it->second;
  };
  const size_t days_col = require_col("survival_days");
  const size_t event_col = require_col("event_observed");

  CategoricalDataset ds;
  ds.schema = schema;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() && in.peek() == EOF) break;  // trailing newline
    const std::vector<std::string> fields = parse_csv_record(line, line_no);
    if (fields.size() != header.size()) {
      throw std::invalid_argument("load_csv: row " + std::to_string(line_no - 1) + " has " +
                                  std::to_string(fields.size()) + " fields, header has " +
                                  std::to_string(header.size()));
    }
    const size_t row = ds.survival_days.size();
    for (size_t f = 0; f < schema.features.size(); ++f) {
      const std::string& cell = fields[feature_col[f]];
      const int code = schema.features[f].category_index(cell);
      if (code < 0) {
        throw std::invalid_argument("load_csv: row " + std::to_string(row) + ", column '" +
                                    schema.features[f].name + "': unknown category '" + cell + "'");
      }
      ds.cells.push_back(code);
    }
    const std::string& days_text = fields[days_col];
    int days = 0;
    try {
      size_t pos = 0;
      days = std::stoi(days_text, &pos);
      if (pos != days_text.size()) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      throw std::invalid_argument("load_csv: row " + std::to_string(row) +
                                  ": non-numeric survival_days '" + days_text + "'");
    }
    if (days < 0) {
      throw std::invalid_argument("load_csv: row " + std::to_string(row) + ": negative survival_days");
    }
    const std::string& event_text = fields[event_col];
    bool event = false;
    if (event_text == "1" || event_text == "true") {
      event = true;
    } else if (event_text == "0" || event_text == "false") {
      event = false;
    } else {
      throw std::invalid_argument("load_csv: row " + std::to_string(row) +
                                  ": event_observed must be 0/1, got '" + event_text + "'");
    }
    ds.survival_days.push_back(days);
    ds.event_observed.push_back(event ? 1 : 0);
    ds.label.push_back(static_cast<uint8_t>(make_label(days, event, label_threshold_days)));
  }
  return ds;
}

void save_csv(const CategoricalDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_csv: cannot open '" + path + "' for writing");
  for (size_t f = 0; f < ds.n_features(); ++f) {
    if (f) out << ',';
    out << csv_escape(ds.schema.features[f].name);
  }
  out << ",survival_days,event_observed\n";
  for (size_t r = 0; r < ds.n_rows(); ++r) {
    for (size_t f = 0; f < ds.n_features(); ++f) {
      if (f) out << ',';
      out << csv_escape(ds.schema.features[f].categories[static_cast<size_t>(ds.category(r, f))]);
    }
    out << ',' << ds.survival_days[r] << ',' << (ds.event_observed[r] ? 1 : 0) << '\n';
  }
  if (!out) throw std::runtime_error("save_csv: write failure on '" + path + "'");
}

// --- Synthetic cohorts ---------------------------------------------------------

void SynthSpec::validate() const {
  schema.validate();
  if (marginals.size() != schema.features.size()) {
    throw std::invalid_argument("synth spec: one marginal vector per feature required");
  }
  for (size_t f = 0; f < marginals.size(); ++f) {
    if (marginals[f].size() != schema.features[f].categories.size()) {
      throw std::invalid_argument("synth spec: marginal size mismatch for feature '" +
                                  schema.features[f].name + "'");
    }
    double sum = 0.0;
    for (double p : marginals[f]) {
      if (p < 0.0) throw std::invalid_argument("synth spec: negative probability");
      sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-9) {
      throw std::invalid_argument("synth spec: marginals for feature '" + schema.features[f].name +
                                  "' sum to " + std::to_string(sum));
    }
  }
  for (const SynthRule& rule : planted_rules) {
    if (rule.positive_prob < 0.0 || rule.positive_prob > 1.0) {
      throw std::invalid_argument("synth spec: rule probability outside [0, 1]");
    }
    for (const auto& [f, c] : rule.items) {
      if (f < 0 || static_cast<size_t>(f) >= schema.features.size() || c < 0 ||
          static_cast<size_t>(c) >= schema.features[static_cast<size_t>(f)].categories.size()) {
        throw std::invalid_argument("synth spec: planted rule references invalid (feature, category)");
      }
    }
  }
  if (default_positive_prob < 0.0 || default_positive_prob > 1.0 ||
      censor_prob_given_survivor < 0.0 || censor_prob_given_survivor > 1.0) {
    throw std::invalid_argument("synth spec: probability outside [0, 1]");
  }
}

std::string SynthSpec::to_json() const {
  json doc;
  doc["schema"] = json::parse(schema.to_json());
  doc["marginals"] = json::array();
  for (size_t f = 0; f < marginals.size(); ++f) {
    json entries = json::array();
    for (size_t c = 0; c < marginals[f].size(); ++c) {
      entries.push_back({{"category", schema.features[f].categories[c]},
                         {"probability", marginals[f][c]}});
    }
    doc["marginals"].push_back({{"feature", schema.features[f].name}, {"probabilities", entries}});
  }
  doc["planted_rules"] = json::array();
  for (const SynthRule& rule : planted_rules) {
    json items = json::array();
    for (const auto& [f, c] : rule.items) {
      items.push_back({{"feature", schema.features[static_cast<size_t>(f)].name},
                       {"category", schema.features[static_cast<size_t>(f)].categories[static_cast<size_t>(c)]}});
    }
    doc["planted_rules"].push_back({{"items", items}, {"p", rule.positive_prob}});
  }
  doc["default_positive_prob"] = default_positive_prob;
  doc["censor_prob_given_survivor"] = censor_prob_given_survivor;
  return doc.dump(2);
}

SynthSpec SynthSpec::from_json(const std::string& text) {
  json doc = json::parse(text);
  SynthSpec spec;
  spec.schema = FeatureSchema::from_json(doc.at("schema").dump());
  spec.marginals.assign(spec.schema.features.size(), {});
  for (const json& jm : doc.at("marginals")) {
    const std::string feature = jm.at("feature").get<std::string>();
    const int f = spec.schema.feature_index(feature);
    if (f < 0) throw std::invalid_argument("synth spec: marginal for unknown feature '" + feature + "'");
    std::vector<double> probs(spec.schema.features[static_cast<size_t>(f)].categories.size(), 0.0);
    for (const json& je : jm.at("probabilities")) {
      const std::string category = je.at("category").get<std::string>();
      const int c = spec.schema.features[static_cast<size_t>(f)].category_index(category);
      if (c < 0) {
        throw std::invalid_argument("synth spec: marginal for unknown category '" + category + "'");
      }
      probs[static_cast<size_t>(c)] = je.at("probability").get<double>();
    }
    spec.marginals[static_cast<size_t>(f)] = std::move(probs);
  }
  for (const json& jr : doc.value("planted_rules", json::array())) {
    SynthRule rule;
    for (const json& ji : jr.at("items")) {
      const std::string feature = ji.at("feature").get<std::string>();
      const std::string category = ji.at("category").get<std::string>();
      const int f = spec.schema.feature_index(feature);
      if (f < 0) throw std::invalid_argument("synth spec: rule references unknown feature '" + feature + "'");
      const int c = spec.schema.features[static_cast<size_t>(f)].category_index(category);
      if (c < 0) throw std::invalid_argument("synth spec: rule references unknown category '" + category + "'");
      rule.items.emplace_back(f, c);
    }
    rule.positive_prob = jr.at("p").get<double>();
    spec.planted_rules.push_back(std::move(rule));
  }
  spec.default_positive_prob = doc.value("default_positive_prob", 0.5);
  spec.censor_prob_given_survivor = doc.value("censor_prob_given_survivor", 0.0);
  spec.validate();
  return spec;
}

CategoricalDataset synth_generate(const SynthSpec& spec, size_t n, uint64_t seed) {
  spec.validate();
  if (n == 0) throw std::invalid_argument("synth_generate: n must be at least 1");
  Rng rng(seed);
  CategoricalDataset ds;
  ds.schema = spec.schema;
  const size_t width = spec.schema.features.size();
  ds.cells.reserve(n * width);
  ds.survival_days.reserve(n);
  ds.event_observed.reserve(n);
  ds.label.reserve(n);
  std::vector<int32_t> row(width);
  for (size_t r = 0; r < n; ++r) {
    for (size_t f = 0; f < width; ++f) {
      row[f] = static_cast<int32_t>(rng.categorical(spec.marginals[f]));
      ds.cells.push_back(row[f]);
    }
    double p = spec.default_positive_prob;
    for (const SynthRule& rule : spec.planted_rules) {
      bool matches = true;
      for (const auto& [f, c] : rule.items) {
        if (row[static_cast<size_t>(f)] != c) {
          matches = false;
          break;
        }
      }
      if (matches) {
        p = rule.positive_prob;
        break;
      }
    }
    const int label = rng.bernoulli(p) ? 1 : 0;
    const int days = label ? static_cast<int>(rng.int_range(366, 2000))
                           : static_cast<int>(rng.int_range(1, 365));
    const bool censored = label && rng.bernoulli(spec.censor_prob_given_survivor);
    ds.label.push_back(static_cast<uint8_t>(label));
    ds.survival_days.push_back(days);
    ds.event_observed.push_back(censored ? 0 : 1);
  }
  return ds;
}

}  // namespace rulekit
