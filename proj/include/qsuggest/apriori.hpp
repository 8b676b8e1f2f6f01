#pragma once

/// Level-wise frequent itemset mining (Apriori) with subset pruning.
/// Support is counted with per-itemset transaction-id lists.

#include <algorithm>
#include <cstddef>
#include <map>
#include <vector>

#include "qsuggest/common.hpp"

namespace qsuggest {

template <class Item>
struct FrequentItemset {
  std::vector<Item> items;  // sorted ascending
  std::size_t support = 0;

  friend bool operator==(FrequentItemset const&, FrequentItemset const&) = default;
};

/// All itemsets of size 1..max_size whose support (number of transactions
/// containing them) is at least `min_support`. Output ordered by size, then
/// lexicographically.
template <class Item>
std::vector<FrequentItemset<Item>> apriori_frequent_itemsets(
    std::vector<std::vector<Item>> const& transactions, std::size_t min_support,
    std::size_t max_size) {
  if (min_support < 1) throw InvalidArgument("apriori: min_support must be >= 1");
  using Tids = std::vector<std::uint32_t>;
  struct Level {
    std::vector<Item> items;
    Tids tids;
  };

  std::vector<FrequentItemset<Item>> result;
  if (max_size == 0) return result;

  std::map<Item, Tids> singles;
  for (std::uint32_t t = 0; t < transactions.size(); ++t) {
    auto row = transactions[t];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    for (auto const& item : row) singles[item].push_back(t);
  }

  std::vector<Level> level;
  for (auto& [item, tids] : singles)
    if (tids.size() >= min_support) level.push_back({{item}, std::move(tids)});

  auto const in_level = [](std::vector<Level> const& lv, std::vector<Item> const& items) {
    auto it = std::lower_bound(lv.begin(), lv.end(), items,
                               [](Level const& l, std::vector<Item> const& x) { return l.items < x; });
    return it != lv.end() && it->items == items;
  };

  for (std::size_t k = 1; !level.empty(); ++k) {
    for (auto const& l : level) result.push_back({l.items, l.tids.size()});
    if (k == max_size) break;

    std::vector<Level> next;
    for (std::size_t i = 0; i < level.size(); ++i) {
      for (std::size_t j = i + 1; j < level.size(); ++j) {
        auto const& a = level[i].items;
        auto const& b = level[j].items;
        if (!std::equal(a.begin(), a.end() - 1, b.begin(), b.end() - 1)) break;
        std::vector<Item> cand = a;
        cand.push_back(b.back());
        bool pruned = false;
        for (std::size_t drop = 0; drop + 2 < cand.size() && !pruned; ++drop) {
          std::vector<Item> sub;
          sub.reserve(k);
          for (std::size_t x = 0; x < cand.size(); ++x)
            if (x != drop) sub.push_back(cand[x]);
          pruned = !in_level(level, sub);
        }
        if (pruned) continue;
        Tids tids;
        std::set_intersection(level[i].tids.begin(), level[i].tids.end(), level[j].tids.begin(),
                              level[j].tids.end(), std::back_inserter(tids));
        if (tids.size() >= min_support) next.push_back({std::move(cand), std::move(tids)});
      }
    }
    level = std::move(next);
  }
  return result;
}

}  // namespace qsuggest
