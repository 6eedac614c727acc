#pragma once

// Exactly uniform sampling of Polya trees of a given size (recursive
// method). A tree of size m > 1 splits off j copies of a subtree of size d
// with probability d y_d y_{m-jd} / ((m-1) y_m); the copies and the rest
// (a tree of size m - jd sharing the root) are generated independently.
//
// The categorical draws compare one uniform real U against cumulative
// weights. Scaled long-double weights decide almost every draw; a draw is
// handed to a quad-precision table, then to exact big integers, only when
// U falls within a proven error margin of a bucket boundary. All tiers
// refine the same U, so the output distribution is exactly uniform.

#include "polya/bigint.hpp"
#include "polya/enumeration.hpp"
#include "polya/random.hpp"
#include "polya/tree.hpp"

#include <atomic>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace polya {

struct SamplerOptions {
  bool force_exact = false;  // skip the floating tiers (tests)
};

struct SamplerStats {
  std::uint64_t draws = 0;
  std::uint64_t quad_fallbacks = 0;
  std::uint64_t exact_fallbacks = 0;
};

// One (s, d) outcome of a split of a size-m tree, j = s/d copies of a
// size-d subtree. Weight is the exact d y_d y_{m-s}.
struct SplitChoice {
  std::size_t s;
  std::size_t d;
  BigInt weight;
};

namespace detail {

#ifdef __SIZEOF_FLOAT128__
using QuadFloat = __float128;
#else
using QuadFloat = long double;
#endif

template <class F>
constexpr F unit_roundoff() {
  if constexpr (std::is_same_v<F, long double>) {
    return std::numeric_limits<long double>::epsilon() / 2;
  } else {
    // 2^-113 for binary128
    F u = 1;
    for (int i = 0; i < 113; ++i) u /= 2;
    return u;
  }
}

// Position i of the scan order 1, m-1, 2, m-2, ... over s in [1, m-1].
inline std::size_t scan_s(std::size_t m, std::size_t i) { return i % 2 == 0 ? 1 + i / 2 : m - 1 - i / 2; }

// Divisors of every s <= order, largest first.
inline std::vector<std::vector<std::uint32_t>> divisor_lists(std::size_t order) {
  std::vector<std::vector<std::uint32_t>> out(order + 1);
  for (std::size_t d = order; d >= 1; --d)
    for (std::size_t s = d; s <= order; s += d) out[s].push_back(static_cast<std::uint32_t>(d));
  return out;
}

// y_k r^k and S_s r^s with S_s = sum_{d|s} d y_d, in floating type F.
// Relative error of every entry is below 3 k^2 u (the recurrence is
// quadratic in y, so errors add along a + b <= k - 1, plus O(k u) per
// step); margin() below uses a wide safety factor on top of that.
template <class F>
struct ScaledTables {
  std::vector<F> y;
  std::vector<F> big_s;
  std::vector<std::vector<F>> divisor_weight;  // d y_d r^s, aligned with divisor_lists

  static F margin(std::size_t m) {
    const F mm = static_cast<F>(m + 1);
    return 256 * mm * mm * unit_roundoff<F>();
  }

  ScaledTables(std::size_t order, const std::vector<std::vector<std::uint32_t>>& divisors)
      : y(order + 1, F(0)), big_s(order + 1, F(0)), divisor_weight(order + 1) {
    // Close to the singularity, so y_k r^k ~ k^{-3/2} stays in range.
    const F r = static_cast<F>(0.33832185689920769L);
    std::vector<F> rp(order + 1);
    rp[0] = 1;
    for (std::size_t k = 1; k <= order; ++k) rp[k] = rp[k - 1] * r;
    auto fill_s = [&](std::size_t s) {
      F acc = 0;
      for (std::uint32_t d : divisors[s]) {
        const F w = static_cast<F>(d) * y[d] * rp[s - d];
        divisor_weight[s].push_back(w);
        acc += w;
      }
      big_s[s] = acc;
    };
    if (order >= 1) {
      y[1] = r;
      fill_s(1);
    }
    for (std::size_t n = 2; n <= order; ++n) {
      F acc = 0;
      for (std::size_t s = 1; s < n; ++s) acc += big_s[s] * y[n - s];
      y[n] = acc / static_cast<F>(n - 1);
      fill_s(n);
    }
  }

  // Index into the split scan of size m, or nullopt if U = u 2^-64 is too
  // close to a boundary to decide at this precision.
  std::optional<std::size_t> pick_split(std::size_t m, std::uint64_t u) const {
    const F total = static_cast<F>(m - 1) * y[m];
    return pick(total, margin(m), u, m - 1, [&](std::size_t i) {
      const std::size_t s = scan_s(m, i);
      return big_s[s] * y[m - s];
    });
  }

  std::optional<std::size_t> pick_divisor(std::size_t s, std::uint64_t u) const {
    const auto& w = divisor_weight[s];
    return pick(big_s[s], margin(s), u, w.size(), [&](std::size_t i) { return w[i]; });
  }

 private:
  template <class W>
  static std::optional<std::size_t> pick(F total, F rel_margin, std::uint64_t u, std::size_t count, W&& weight) {
    const F delta = rel_margin * total;
    const F target = static_cast<F>(u) * static_cast<F>(0x1p-64L) * total;
    F c = 0;
    for (std::size_t i = 0; i < count; ++i) {
      const F next = c + weight(i);
      if (next > target) {
        if (next - target > delta && target - c > delta) return i;
        return std::nullopt;
      }
      c = next;
    }
    return std::nullopt;
  }
};

// Bucket of U * total among cumulative weights, with U = 0.b_1 b_2 ... whose
// first 64 bits are `first`; further bits come from rng until decided.
inline std::size_t exact_pick(const std::vector<BigInt>& cum, std::uint64_t first, Rng& rng) {
  const BigInt& total = cum.back();
  BigInt a;
  mpz_import(a.get_mpz_t(), 1, 1, sizeof(first), 0, 0, &first);
  mp_bitcnt_t bits = 64;
  BigInt lo, hi, scaled_cum;
  for (;;) {
    lo = a * total;
    hi = lo + total;
    // first i with cum_i 2^bits > lo
    std::size_t left = 0, right = cum.size() - 1;
    while (left < right) {
      const std::size_t mid = (left + right) / 2;
      mpz_mul_2exp(scaled_cum.get_mpz_t(), cum[mid].get_mpz_t(), bits);
      if (scaled_cum > lo) {
        right = mid;
      } else {
        left = mid + 1;
      }
    }
    mpz_mul_2exp(scaled_cum.get_mpz_t(), cum[left].get_mpz_t(), bits);
    if (hi <= scaled_cum) return left;
    const std::uint64_t more = rng();
    BigInt extra;
    mpz_import(extra.get_mpz_t(), 1, 1, sizeof(more), 0, 0, &more);
    mpz_mul_2exp(a.get_mpz_t(), a.get_mpz_t(), 64);
    a += extra;
    bits += 64;
  }
}

struct ExactTables {
  TreeCountTable y;
  std::vector<BigInt> big_s;

  explicit ExactTables(std::size_t order, const std::vector<std::vector<std::uint32_t>>& divisors)
      : y(build_tree_counts(order)), big_s(order + 1) {
    for (std::size_t s = 1; s <= order; ++s)
      for (std::uint32_t d : divisors[s]) big_s[s] += BigInt(static_cast<unsigned long>(d)) * y[d];
  }
};

}  // namespace detail

class TreeSampler {
 public:
  explicit TreeSampler(std::size_t order, SamplerOptions options = {})
      : order_(order), options_(options), shared_(std::make_shared<Shared>(order)) {
    if (order < 1) throw std::invalid_argument("sampler order must be at least 1");
  }

  std::size_t order() const { return order_; }

  // Writes a uniform tree of size n into `arena` (cleared first); node 0 is
  // the root.
  void sample_into(std::size_t n, Rng& rng, TreeArena& arena) const {
    check_size(n);
    arena.clear();
    grow(n, rng, arena);
  }

  CanonicalTree sample(std::size_t n, Rng& rng) const {
    TreeArena arena;
    sample_into(n, rng, arena);
    return CanonicalTree::from_arena(arena);
  }

  ProfileVector sample_profile(std::size_t n, Rng& rng, TreeArena& scratch) const {
    sample_into(n, rng, scratch);
    return profile(scratch);
  }

  // Exact outcome weights of one split of a size-m tree, in the order the
  // sampler scans them (s in scan order, divisors largest first). They sum
  // to (m - 1) y_m.
  std::vector<SplitChoice> exact_split_weights(std::size_t m) const {
    check_size(m);
    const auto& ex = exact();
    std::vector<SplitChoice> out;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      const std::size_t s = detail::scan_s(m, i);
      for (std::uint32_t d : shared_->divisors[s])
        out.push_back({s, d, BigInt(static_cast<unsigned long>(d)) * ex.y[d] * ex.y[m - s]});
    }
    return out;
  }

  SamplerStats stats() const {
    return {shared_->draws.load(), shared_->quad_fallbacks.load(), shared_->exact_fallbacks.load()};
  }

 private:
  struct Shared {
    explicit Shared(std::size_t order) : divisors(detail::divisor_lists(order)), fast(order, divisors) {}
    std::vector<std::vector<std::uint32_t>> divisors;
    detail::ScaledTables<long double> fast;
    std::once_flag quad_once, exact_once;
    std::unique_ptr<detail::ScaledTables<detail::QuadFloat>> quad;
    std::unique_ptr<detail::ExactTables> exact;
    std::atomic<std::uint64_t> draws{0}, quad_fallbacks{0}, exact_fallbacks{0};
  };

  void check_size(std::size_t n) const {
    if (n < 1 || n > order_)
      throw std::out_of_range("tree size " + std::to_string(n) + " outside sampler table [1, " + std::to_string(order_) + "]");
  }

  const detail::ScaledTables<detail::QuadFloat>& quad() const {
    std::call_once(shared_->quad_once, [&] {
      shared_->quad = std::make_unique<detail::ScaledTables<detail::QuadFloat>>(order_, shared_->divisors);
    });
    return *shared_->quad;
  }

  const detail::ExactTables& exact() const {
    std::call_once(shared_->exact_once,
                   [&] { shared_->exact = std::make_unique<detail::ExactTables>(order_, shared_->divisors); });
    return *shared_->exact;
  }

  std::size_t pick_split(std::size_t m, Rng& rng) const {
    const std::uint64_t u = rng();
    shared_->draws.fetch_add(1, std::memory_order_relaxed);
    if (!options_.force_exact) {
      if (auto i = shared_->fast.pick_split(m, u)) return detail::scan_s(m, *i);
      shared_->quad_fallbacks.fetch_add(1, std::memory_order_relaxed);
      if (auto i = quad().pick_split(m, u)) return detail::scan_s(m, *i);
      shared_->exact_fallbacks.fetch_add(1, std::memory_order_relaxed);
    }
    const auto& ex = exact();
    std::vector<BigInt> cum(m - 1);
    BigInt acc;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      const std::size_t s = detail::scan_s(m, i);
      acc += ex.big_s[s] * ex.y[m - s];
      cum[i] = acc;
    }
    return detail::scan_s(m, detail::exact_pick(cum, u, rng));
  }

  std::size_t pick_divisor(std::size_t s, Rng& rng) const {
    const auto& divs = shared_->divisors[s];
    if (divs.size() == 1) return divs[0];
    const std::uint64_t u = rng();
    shared_->draws.fetch_add(1, std::memory_order_relaxed);
    if (!options_.force_exact) {
      if (auto i = shared_->fast.pick_divisor(s, u)) return divs[*i];
      shared_->quad_fallbacks.fetch_add(1, std::memory_order_relaxed);
      if (auto i = quad().pick_divisor(s, u)) return divs[*i];
      shared_->exact_fallbacks.fetch_add(1, std::memory_order_relaxed);
    }
    const auto& ex = exact();
    std::vector<BigInt> cum(divs.size());
    BigInt acc;
    for (std::size_t i = 0; i < divs.size(); ++i) {
      acc += BigInt(static_cast<unsigned long>(divs[i])) * ex.y[divs[i]];
      cum[i] = acc;
    }
    return divs[detail::exact_pick(cum, u, rng)];
  }

  // Loops over the shrinking remainder at this root; recursion only on the
  // split-off subtree.
  std::uint32_t grow(std::size_t n, Rng& rng, TreeArena& arena) const {
    const std::uint32_t node = arena.add_node();
    std::size_t m = n;
    while (m > 1) {
      std::size_t s = 1, d = 1;
      if (m > 2) {
        s = pick_split(m, rng);
        d = pick_divisor(s, rng);
      }
      const std::uint32_t child = d == 1 ? arena.add_node() : grow(d, rng, arena);
      arena.add_child(node, child, static_cast<std::uint32_t>(s / d));
      m -= s;
    }
    return node;
  }

  std::size_t order_;
  SamplerOptions options_;
  std::shared_ptr<Shared> shared_;
};

// Convenience for one-off draws; builds its own tables, so reuse a
// TreeSampler for repeated sampling.
inline CanonicalTree sample_tree(std::size_t n, Rng& rng) { return TreeSampler(std::max<std::size_t>(n, 1)).sample(n, rng); }

}  // namespace polya
