#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <vector>

#include "rulekit/dataset.hpp"
#include "rulekit/rulemine.hpp"

namespace rulekit::detail {

// Per-antecedent row bitmasks for fast first-match counting.
struct RowMasks {
  size_t n_rows = 0;
  size_t words = 0;
  std::vector<uint64_t> antecedent;  // pool_size x words
  std::vector<uint64_t> positives;   // label == 1
  std::vector<uint64_t> all;         // n_rows ones

  RowMasks(const std::vector<Itemset>& pool, const CategoricalDataset& ds) {
    n_rows = ds.n_rows();
    words = (n_rows + 63) / 64;
    all.assign(words, 0);
    positives.assign(words, 0);
    for (size_t r = 0; r < n_rows; ++r) {
      all[r >> 6] |= uint64_t{1} << (r & 63);
      if (ds.label[r]) positives[r >> 6] |= uint64_t{1} << (r & 63);
    }
    antecedent.assign(pool.size() * words, 0);
    for (size_t a = 0; a < pool.size(); ++a) {
      uint64_t* mask = antecedent.data() + a * words;
      for (size_t r = 0; r < n_rows; ++r) {
        if (pool[a].matches(ds, r)) mask[r >> 6] |= uint64_t{1} << (r & 63);
      }
    }
  }

  const uint64_t* mask_of(size_t pool_index) const {
    return antecedent.data() + pool_index * words;
  }

  // First-match (n_neg, n_pos) per rule plus the default entry at the end.
  void counts_for(const std::vector<int32_t>& ids,
                  std::vector<std::array<int64_t, 2>>& out) const {
    out.assign(ids.size() + 1, {0, 0});
    std::vector<uint64_t> remaining = all;
    for (size_t j = 0; j < ids.size(); ++j) {
      const uint64_t* mask = mask_of(static_cast<size_t>(ids[j]));
      int64_t n = 0, pos = 0;
      for (size_t w = 0; w < words; ++w) {
        const uint64_t captured = mask[w] & remaining[w];
        n += std::popcount(captured);
        pos += std::popcount(captured & positives[w]);
      }
      out[j] = {n - pos, pos};
      for (size_t w = 0; w < words; ++w) remaining[w] &= ~mask[w];
    }
    int64_t n = 0, pos = 0;
    for (size_t w = 0; w < words; ++w) {
      n += std::popcount(remaining[w]);
      pos += std::popcount(remaining[w] & positives[w]);
    }
    out[ids.size()] = {n - pos, pos};
  }
};

}  // namespace rulekit::detail
