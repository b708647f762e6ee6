#include "rulekit/rulemine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

namespace rulekit {

using nlohmann::json;

Itemset Itemset::of(std::vector<Item> items) {
  std::sort(items.begin(), items.end());
  for (size_t i = 1; i < items.size(); ++i) {
    if (items[i] == items[i - 1]) throw std::invalid_argument("itemset: duplicate item");
    if (items[i].feature == items[i - 1].feature) {
      throw std::invalid_argument("itemset: two categories of feature " +
                                  std::to_string(items[i].feature));
    }
  }
  Itemset s;
  s.items = std::move(items);
  return s;
}

bool Itemset::matches(const CategoricalDataset& ds, size_t row) const {
  for (const Item& item : items) {
    if (ds.category(row, static_cast<size_t>(item.feature)) != item.category) return false;
  }
  return true;
}

std::string Itemset::describe(const FeatureSchema& schema) const {
  if (items.empty()) return "(always)";
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out += " AND ";
    const Feature& f = schema.features[static_cast<size_t>(items[i].feature)];
    out += f.name + ": " + f.categories[static_cast<size_t>(items[i].category)];
  }
  return out;
}

double support(const Itemset& a, const CategoricalDataset& ds) {
  if (ds.n_rows() == 0) throw std::invalid_argument("support: empty dataset");
  size_t hits = 0;
  for (size_t r = 0; r < ds.n_rows(); ++r) {
    if (a.matches(ds, r)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(ds.n_rows());
}

double confidence(const Itemset& a, int label_value, const CategoricalDataset& ds) {
  size_t hits = 0, labelled = 0;
  for (size_t r = 0; r < ds.n_rows(); ++r) {
    if (!a.matches(ds, r)) continue;
    ++hits;
    if (ds.label[r] == static_cast<uint8_t>(label_value)) ++labelled;
  }
  if (hits == 0) throw std::invalid_argument("confidence: antecedent matches no rows");
  return static_cast<double>(labelled) / static_cast<double>(hits);
}

// --- FP-Growth ---------------------------------------------------------------

namespace {

struct FpNode {
  int item = -1;  // dense item id
  int64_t count = 0;
  FpNode* parent = nullptr;
  std::map<int, std::unique_ptr<FpNode>> children;
  FpNode* next_same_item = nullptr;  // header-table chain
};

struct FpTree {
  std::unique_ptr<FpNode> root = std::make_unique<FpNode>();
  std::unordered_map<int, FpNode*> header;  // item id -> chain head
  std::unordered_map<int, int64_t> item_counts;

  void insert(const std::vector<int>& ordered_items, int64_t count) {
    FpNode* node = root.get();
    for (int item : ordered_items) {
      auto it = node->children.find(item);
      if (it == node->children.end()) {
        auto child = std::make_unique<FpNode>();
        child->item = item;
        child->parent = node;
        child->next_same_item = header.count(item) ? header[item] : nullptr;
        header[item] = child.get();
        it = node->children.emplace(item, std::move(child)).first;
      }
      it->second->count += count;
      node = it->second.get();
    }
  }
};

// Mines `tree` recursively; `suffix` is the conditional pattern in dense ids.
void fp_mine(const FpTree& tree, int64_t min_count, std::vector<int>& suffix,
             const std::vector<std::pair<int64_t, int>>& item_order,
             std::vector<std::pair<std::vector<int>, int64_t>>& out) {
  // Iterate items from least frequent to most frequent in this tree.
  std::vector<int> items;
  items.reserve(tree.item_counts.size());
  for (const auto& [item, count] : tree.item_counts) {
    if (count >= min_count) items.push_back(item);
  }
  std::sort(items.begin(), items.end(), [&](int a, int b) {
    return item_order[static_cast<size_t>(a)] > item_order[static_cast<size_t>(b)];
  });
  for (int item : items) {
    suffix.push_back(item);
    out.emplace_back(suffix, tree.item_counts.at(item));

    // Conditional tree from the prefix paths of `item`.
    FpTree cond;
    for (FpNode* node = tree.header.count(item) ? tree.header.at(item) : nullptr; node;
         node = node->next_same_item) {
      std::vector<int> path;
      for (FpNode* p = node->parent; p && p->item >= 0; p = p->parent) path.push_back(p->item);
      std::reverse(path.begin(), path.end());
      if (path.empty()) continue;
      for (int pi : path) cond.item_counts[pi] += node->count;
      cond.insert(path, node->count);
    }
    for (auto it = cond.item_counts.begin(); it != cond.item_counts.end();) {
      it = it->second < min_count ? cond.item_counts.erase(it) : std::next(it);
    }
    if (!cond.item_counts.empty()) fp_mine(cond, min_count, suffix, item_order, out);
    suffix.pop_back();
  }
}

}  // namespace

std::vector<std::pair<Itemset, int64_t>> fp_growth(const std::vector<Itemset>& transactions,
                                                   double min_support) {
  if (!(min_support > 0.0) || min_support > 1.0) {
    throw std::invalid_argument("fp_growth: min_support outside (0, 1]");
  }
  if (transactions.empty()) return {};
  const int64_t n = static_cast<int64_t>(transactions.size());
  const int64_t min_count =
      static_cast<int64_t>(std::ceil(min_support * static_cast<double>(n) - 1e-12));

  // Dense item ids in lexicographic Item order.
  std::map<Item, int> id_of;
  for (const Itemset& t : transactions) {
    for (const Item& item : t.items) id_of.emplace(item, 0);
  }
  std::vector<Item> items_by_id;
  for (auto& [item, id] : id_of) {
    id = static_cast<int>(items_by_id.size());
    items_by_id.push_back(item);
  }

  std::vector<int64_t> counts(items_by_id.size(), 0);
  for (const Itemset& t : transactions) {
    for (const Item& item : t.items) ++counts[static_cast<size_t>(id_of[item])];
  }

  // FP order: descending frequency, ties by item identity.
  std::vector<std::pair<int64_t, int>> item_order(items_by_id.size());
  for (size_t i = 0; i < items_by_id.size(); ++i) {
    item_order[i] = {counts[i], -static_cast<int>(i)};
  }

  FpTree tree;
  std::vector<int> tx;
  for (const Itemset& t : transactions) {
    tx.clear();
    for (const Item& item : t.items) {
      const int id = id_of[item];
      if (counts[static_cast<size_t>(id)] >= min_count) tx.push_back(id);
    }
    std::sort(tx.begin(), tx.end(), [&](int a, int b) {
      return item_order[static_cast<size_t>(a)] > item_order[static_cast<size_t>(b)];
    });
    if (!tx.empty()) tree.insert(tx, 1);
  }
  for (size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] >= min_count) tree.item_counts[static_cast<int>(i)] = counts[i];
  }

  std::vector<std::pair<std::vector<int>, int64_t>> dense;
  std::vector<int> suffix;
  fp_mine(tree, std::max<int64_t>(min_count, 1), suffix, item_order, dense);

  std::vector<std::pair<Itemset, int64_t>> out;
  out.reserve(dense.size() + 1);
  if (n >= min_count) out.emplace_back(Itemset{}, n);  // the empty itemset
  for (auto& [ids, count] : dense) {
    std::vector<Item> items;
    items.reserve(ids.size());
    for (int id : ids) items.push_back(items_by_id[static_cast<size_t>(id)]);
    out.emplace_back(Itemset::of(std::move(items)), count);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.first.items.size() != b.first.items.size()) {
      return a.first.items.size() < b.first.items.size();
    }
    return a.first < b.first;
  });
  return out;
}

std::vector<MinedRule> mine_antecedents(const CategoricalDataset& ds, double min_support,
                                        double min_confidence, int max_cardinality) {
  if (!(min_support > 0.0) || min_support > 1.0 || !(min_confidence > 0.0) || min_confidence > 1.0) {
    throw std::invalid_argument("mine_antecedents: thresholds outside (0, 1]");
  }
  if (max_cardinality < 1) throw std::invalid_argument("mine_antecedents: max_cardinality < 1");
  if (ds.n_rows() == 0) return {};

  std::vector<Itemset> transactions;
  transactions.reserve(ds.n_rows());
  for (size_t r = 0; r < ds.n_rows(); ++r) {
    std::vector<Item> items;
    items.reserve(ds.n_features());
    for (size_t f = 0; f < ds.n_features(); ++f) {
      items.push_back({static_cast<int32_t>(f), ds.category(r, f)});
    }
    transactions.push_back(Itemset::of(std::move(items)));
  }

  const auto frequent = fp_growth(transactions, min_support);
  const double n = static_cast<double>(ds.n_rows());
  std::vector<MinedRule> rules;
  for (const auto& [itemset, count] : frequent) {
    if (itemset.items.empty() || itemset.items.size() > static_cast<size_t>(max_cardinality)) {
      continue;
    }
    int64_t pos = 0;
    for (size_t r = 0; r < ds.n_rows(); ++r) {
      if (ds.label[r] && itemset.matches(ds, r)) ++pos;
    }
    const int64_t neg = count - pos;
    const double conf = static_cast<double>(std::max(pos, neg)) / static_cast<double>(count);
    if (conf + 1e-12 < min_confidence) continue;
    MinedRule rule;
    rule.antecedent = itemset;
    rule.n_neg = neg;
    rule.n_pos = pos;
    rule.support = static_cast<double>(count) / n;
    rule.confidence = conf;
    rules.push_back(std::move(rule));
  }
  return rules;
}

std::string mined_rules_to_json(const std::vector<MinedRule>& rules, const FeatureSchema& schema) {
  json doc = json::array();
  for (const MinedRule& rule : rules) {
    json items = json::array();
    for (const Item& item : rule.antecedent.items) {
      const Feature& f = schema.features[static_cast<size_t>(item.feature)];
      items.push_back({{"feature", f.name},
                       {"category", f.categories[static_cast<size_t>(item.category)]}});
    }
    doc.push_back({{"items", items},
                   {"support", rule.support},
                   {"confidence", rule.confidence},
                   {"counts", {rule.n_neg, rule.n_pos}}});
  }
  return doc.dump(2);
}

std::vector<MinedRule> mined_rules_from_json(const std::string& text, const FeatureSchema& schema) {
  json doc = json::parse(text);
  std::vector<MinedRule> rules;
  for (const json& jr : doc) {
    MinedRule rule;
    std::vector<Item> items;
    for (const json& ji : jr.at("items")) {
      const int f = schema.feature_index(ji.at("feature").get<std::string>());
      if (f < 0) throw std::invalid_argument("mined rules: unknown feature in JSON");
      const int c = schema.features[static_cast<size_t>(f)].category_index(
          ji.at("category").get<std::string>());
      if (c < 0) throw std::invalid_argument("mined rules: unknown category in JSON");
      items.push_back({f, c});
    }
    rule.antecedent = Itemset::of(std::move(items));
    rule.support = jr.at("support").get<double>();
    rule.confidence = jr.at("confidence").get<double>();
    rule.n_neg = jr.at("counts").at(0).get<int64_t>();
    rule.n_pos = jr.at("counts").at(1).get<int64_t>();
    rules.push_back(std::move(rule));
  }
  return rules;
}

}  // namespace rulekit
