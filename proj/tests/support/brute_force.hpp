#pragma once

// Exhaustive generation of unlabelled rooted trees, independent of the
// generating-function machinery. A tree is a root with a multiset of
// subtrees; multisets are generated as nondecreasing sequences of subtree
// ids, so every isomorphism class appears exactly once.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace polya::testing {

struct BruteTree {
  std::string code;                  // "(" + children codes + ")"
  std::vector<std::size_t> profile;  // nodes per level
  std::size_t height = 0;
};

class BruteForceTrees {
 public:
  const std::vector<BruteTree>& of_size(std::size_t n) {
    while (by_size_.size() <= n) extend();
    return by_size_[n];
  }

 private:
  struct Entry {
    std::size_t size;
    std::size_t index;
  };

  void extend() {
    const std::size_t n = by_size_.size();
    by_size_.emplace_back();
    if (n == 0) return;
    std::vector<std::size_t> chosen;
    build(n, n - 1, 0, chosen);
    for (std::size_t i = 0; i < by_size_[n].size(); ++i) ids_.push_back({n, i});
  }

  // Appends every tree of size `total` whose children are ids >= min_id.
  void build(std::size_t total, std::size_t remaining, std::size_t min_id, std::vector<std::size_t>& chosen) {
    if (remaining == 0) {
      BruteTree t;
      t.code = "(";
      t.profile = {1};
      for (std::size_t id : chosen) {
        const BruteTree& c = by_size_[ids_[id].size][ids_[id].index];
        t.code += c.code;
        if (t.profile.size() < c.profile.size() + 1) t.profile.resize(c.profile.size() + 1, 0);
        for (std::size_t k = 0; k < c.profile.size(); ++k) t.profile[k + 1] += c.profile[k];
      }
      t.code += ")";
      t.height = t.profile.size() - 1;
      by_size_[total].push_back(std::move(t));
      return;
    }
    for (std::size_t id = min_id; id < ids_.size(); ++id) {
      const std::size_t s = ids_[id].size;
      if (s > remaining) break;  // ids are ordered by size
      chosen.push_back(id);
      build(total, remaining - s, id, chosen);
      chosen.pop_back();
    }
  }

  std::vector<std::vector<BruteTree>> by_size_;
  std::vector<Entry> ids_;
};

inline BruteForceTrees& brute_force() {
  static BruteForceTrees instance;
  return instance;
}

}  // namespace polya::testing
