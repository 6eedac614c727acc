#pragma once

// Tree representations: a compact arena the sampler writes into, the
// canonical form used for output and isomorphism tests, and level profiles.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace polya {

// Rooted tree with repeated children stored once plus a multiplicity.
// Node 0 is the root once anything has been added.
struct TreeArena {
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
  struct Node {
    std::uint32_t first_edge = kNone;
  };
  struct Edge {
    std::uint32_t child;
    std::uint32_t multiplicity;
    std::uint32_t next;
  };

  std::vector<Node> nodes;
  std::vector<Edge> edges;

  void clear() {
    nodes.clear();
    edges.clear();
  }

  std::uint32_t add_node() {
    nodes.push_back({});
    return static_cast<std::uint32_t>(nodes.size() - 1);
  }

  void add_child(std::uint32_t parent, std::uint32_t child, std::uint32_t multiplicity) {
    edges.push_back({child, multiplicity, nodes[parent].first_edge});
    nodes[parent].first_edge = static_cast<std::uint32_t>(edges.size() - 1);
  }

  template <class F>
  void for_each_child(std::uint32_t node, F&& f) const {
    for (std::uint32_t e = nodes[node].first_edge; e != kNone; e = edges[e].next) f(edges[e].child, edges[e].multiplicity);
  }
};

namespace detail {

using LevelSeq = std::vector<std::uint32_t>;

// Children of the subtree seq[begin, end) rooted at depth seq[begin].
inline std::vector<std::pair<std::size_t, std::size_t>> child_ranges(const LevelSeq& seq, std::size_t begin, std::size_t end) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const std::uint32_t child_depth = seq[begin] + 1;
  for (std::size_t i = begin + 1; i < end; ++i) {
    if (seq[i] == child_depth) {
      if (!out.empty()) out.back().second = i;
      out.push_back({i, end});
    }
  }
  return out;
}

// Canonical relative level sequence: children sorted in decreasing
// lexicographic order of their own canonical sequences.
inline LevelSeq canonical_levels(const LevelSeq& seq, std::size_t begin, std::size_t end) {
  std::vector<LevelSeq> kids;
  for (const auto& [b, e] : child_ranges(seq, begin, end)) kids.push_back(canonical_levels(seq, b, e));
  std::sort(kids.begin(), kids.end(), std::greater<>());
  LevelSeq out{0};
  for (const auto& k : kids)
    for (auto v : k) out.push_back(v + 1);
  return out;
}

inline LevelSeq arena_levels(const TreeArena& arena, std::uint32_t node) {
  std::vector<LevelSeq> kids;
  arena.for_each_child(node, [&](std::uint32_t child, std::uint32_t mult) {
    LevelSeq k = arena_levels(arena, child);
    for (std::uint32_t r = 1; r < mult; ++r) kids.push_back(k);
    kids.push_back(std::move(k));
  });
  std::sort(kids.begin(), kids.end(), std::greater<>());
  LevelSeq out{0};
  for (const auto& k : kids)
    for (auto v : k) out.push_back(v + 1);
  return out;
}

}  // namespace detail

// Unlabelled rooted tree in canonical form, stored as its preorder level
// sequence (depth of each node, root first). Isomorphic trees have equal
// sequences, so == and <=> are isomorphism tests / a total order.
class CanonicalTree {
 public:
  CanonicalTree() : levels_{0} {}

  // Accepts any valid level sequence and canonicalises it.
  static CanonicalTree from_level_sequence(const std::vector<std::uint32_t>& seq) {
    if (seq.empty() || seq[0] != 0) throw std::invalid_argument("level sequence must start with the root depth 0");
    for (std::size_t i = 1; i < seq.size(); ++i)
      if (seq[i] == 0 || seq[i] > seq[i - 1] + 1) throw std::invalid_argument("invalid level sequence");
    return CanonicalTree(detail::canonical_levels(seq, 0, seq.size()));
  }

  static CanonicalTree from_arena(const TreeArena& arena) {
    if (arena.nodes.empty()) throw std::invalid_argument("empty arena");
    return CanonicalTree(detail::arena_levels(arena, 0));
  }

  // Parenthesised form, e.g. "(()(()))".
  static CanonicalTree from_encoding(const std::string& code) {
    std::vector<std::uint32_t> seq;
    long depth = -1;
    for (char ch : code) {
      if (ch == '(') {
        ++depth;
        if (depth == 0 && !seq.empty()) throw std::invalid_argument("encoding has more than one root");
        seq.push_back(static_cast<std::uint32_t>(depth));
      } else if (ch == ')') {
        if (--depth < -1) throw std::invalid_argument("unbalanced encoding");
      } else {
        throw std::invalid_argument("unexpected character in encoding");
      }
    }
    if (depth != -1 || seq.empty()) throw std::invalid_argument("unbalanced encoding");
    return from_level_sequence(seq);
  }

  std::size_t size() const { return levels_.size(); }
  std::size_t height() const { return *std::max_element(levels_.begin(), levels_.end()); }
  const std::vector<std::uint32_t>& level_sequence() const { return levels_; }

  std::vector<CanonicalTree> children() const {
    std::vector<CanonicalTree> out;
    for (const auto& [b, e] : detail::child_ranges(levels_, 0, levels_.size())) {
      detail::LevelSeq k(levels_.begin() + static_cast<long>(b), levels_.begin() + static_cast<long>(e));
      for (auto& v : k) v -= 1;
      out.push_back(CanonicalTree(std::move(k)));
    }
    return out;
  }

  std::string encoding() const {
    std::string out;
    out.reserve(2 * levels_.size());
    std::size_t open = 0;
    for (auto d : levels_) {
      while (open > d) {
        out += ')';
        --open;
      }
      out += '(';
      open = d + 1;
    }
    out.append(open, ')');
    return out;
  }

  friend bool operator==(const CanonicalTree&, const CanonicalTree&) = default;
  friend auto operator<=>(const CanonicalTree&, const CanonicalTree&) = default;

 private:
  explicit CanonicalTree(detail::LevelSeq levels) : levels_(std::move(levels)) {}
  detail::LevelSeq levels_;
};

// Level sizes L(0..H); L(0) = 1 and every listed level is nonempty.
struct ProfileVector {
  std::vector<std::uint64_t> levels;

  std::size_t height() const { return levels.empty() ? 0 : levels.size() - 1; }
  std::uint64_t size() const {
    std::uint64_t n = 0;
    for (auto v : levels) n += v;
    return n;
  }
  std::uint64_t level(std::size_t k) const { return k < levels.size() ? levels[k] : 0; }
  friend bool operator==(const ProfileVector&, const ProfileVector&) = default;
  friend auto operator<=>(const ProfileVector&, const ProfileVector&) = default;
};

inline ProfileVector profile(const CanonicalTree& tree) {
  ProfileVector p;
  p.levels.assign(tree.height() + 1, 0);
  for (auto d : tree.level_sequence()) p.levels[d]++;
  return p;
}

// Breadth-first census that carries multiplicities, so shared children
// are expanded only once per level.
inline ProfileVector profile(const TreeArena& arena) {
  ProfileVector p;
  if (arena.nodes.empty()) return p;
  std::vector<std::pair<std::uint32_t, std::uint64_t>> cur{{0, 1}}, next;
  while (!cur.empty()) {
    std::uint64_t total = 0;
    next.clear();
    for (const auto& [node, count] : cur) {
      total += count;
      arena.for_each_child(node, [&](std::uint32_t child, std::uint32_t mult) { next.push_back({child, count * mult}); });
    }
    p.levels.push_back(total);
    std::swap(cur, next);
  }
  return p;
}

// L(x) for real x >= 0: linear interpolation between integer levels, zero
// beyond the height.
inline double interpolated_level(const ProfileVector& p, double x) {
  if (!(x >= 0)) throw std::invalid_argument("level position must be nonnegative");
  const double fl = std::floor(x);
  const auto k = static_cast<std::size_t>(fl);
  const double frac = x - fl;
  return (1 - frac) * static_cast<double>(p.level(k)) + frac * static_cast<double>(p.level(k + 1));
}

// l_n(t) = L(t sqrt n) / sqrt n.
inline double scaled_profile(const ProfileVector& p, double t) {
  const double rn = std::sqrt(static_cast<double>(p.size()));
  return interpolated_level(p, t * rn) / rn;
}

}  // namespace polya
