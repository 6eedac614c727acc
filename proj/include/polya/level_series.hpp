#pragma once

// Multivariate truncated series counting trees by size (x) and by the sizes
// of up to three marked levels (u_1, u_2, u_3).
//
// Storage is packed: the coefficient of x^n, a polynomial in the markers with
// nonnegative integer coefficients, is kept as the single big integer
// obtained by evaluating it at u_j = 2^(W * stride^(j-1)), W = slot width in
// bits and stride = order + 1. Marker degrees never exceed the x-degree, so
// no slot overflows into its neighbour as long as W bounds every coefficient,
// and
//   - multiplying two packed coefficients multiplies the polynomials,
//   - the substitution (x, u) -> (x^i, u^i) maps slot s to slot i*s.
// The slot width is chosen from the marker-free "mass" series before each
// multiset exponential, which bounds every intermediate coefficient.

#include "polya/bigint.hpp"
#include "polya/series.hpp"

#include <gmp.h>

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstring>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace polya {

inline constexpr std::size_t kMaxMarkedLevels = 3;

using Marks = std::vector<std::size_t>;

struct LevelTerm {
  std::size_t n = 0;
  Marks marks;
  BigInt value;
};

namespace detail {

constexpr std::size_t kLimbBits = sizeof(mp_limb_t) * 8;

inline std::size_t limbs_for_bits(std::size_t bits) { return std::max<std::size_t>(1, (bits + kLimbBits - 1) / kLimbBits); }

// Copies slot s of `src` (src_w limbs per slot) to slot s*factor + offset of
// `dst` (dst_w limbs per slot). Slot values must fit dst_w limbs.
inline void spread_slots(const BigInt& src, std::size_t src_w, std::size_t factor, std::size_t offset,
                         std::size_t dst_w, BigInt& dst) {
  const std::size_t used = mpz_size(src.get_mpz_t());
  if (used == 0) {
    dst = 0;
    return;
  }
  if (factor == 1 && offset == 0 && src_w == dst_w) {
    dst = src;
    return;
  }
  const mp_limb_t* in = mpz_limbs_read(src.get_mpz_t());
  const std::size_t slots = (used + src_w - 1) / src_w;
  const std::size_t total = ((slots - 1) * factor + offset + 1) * dst_w;
  BigInt out;
  mp_limb_t* o = mpz_limbs_write(out.get_mpz_t(), static_cast<mp_size_t>(total));
  std::memset(o, 0, total * sizeof(mp_limb_t));
  for (std::size_t s = 0; s < slots; ++s) {
    const std::size_t begin = s * src_w;
    const std::size_t len = std::min(src_w, used - begin);
    std::size_t copy = len;
    while (copy > 0 && in[begin + copy - 1] == 0) --copy;
    if (copy > dst_w) throw std::logic_error("spread_slots: slot value exceeds destination width");
    if (copy > 0) std::memcpy(o + (s * factor + offset) * dst_w, in + begin, copy * sizeof(mp_limb_t));
  }
  mpz_limbs_finish(out.get_mpz_t(), static_cast<mp_size_t>(total));
  dst = std::move(out);
}

inline BigInt slot_value(const BigInt& packed, std::size_t w, std::size_t slot) {
  const std::size_t used = mpz_size(packed.get_mpz_t());
  const std::size_t begin = slot * w;
  if (begin >= used) return 0;
  const std::size_t len = std::min(w, used - begin);
  BigInt v;
  mpz_import(v.get_mpz_t(), len, -1, sizeof(mp_limb_t), 0, 0, mpz_limbs_read(packed.get_mpz_t()) + begin);
  return v;
}

template <class Fn>
void for_each_slot(const BigInt& packed, std::size_t w, Fn&& fn) {
  const std::size_t used = mpz_size(packed.get_mpz_t());
  if (used == 0) return;
  const mp_limb_t* in = mpz_limbs_read(packed.get_mpz_t());
  const std::size_t slots = (used + w - 1) / w;
  BigInt v;
  for (std::size_t s = 0; s < slots; ++s) {
    const std::size_t begin = s * w;
    std::size_t len = std::min(w, used - begin);
    while (len > 0 && in[begin + len - 1] == 0) --len;
    if (len == 0) continue;
    mpz_import(v.get_mpz_t(), len, -1, sizeof(mp_limb_t), 0, 0, in + begin);
    fn(s, v);
  }
}

}  // namespace detail

class LevelSeries {
 public:
  // u * f(x): the root level of every tree counted by f is marked.
  static LevelSeries marked_root(const IntSeries& f) {
    for (std::size_t n = 0; n <= f.order(); ++n)
      if (f[n] < 0) throw std::domain_error("LevelSeries::marked_root: negative coefficient");
    if (f[0] != 0) throw std::domain_error("LevelSeries::marked_root: constant term must be zero");
    BigInt peak = 0;
    for (std::size_t n = 0; n <= f.order(); ++n) peak = std::max(peak, f[n]);
    LevelSeries s(f.order(), 1, detail::limbs_for_bits(bit_length(peak) + 1));
    for (std::size_t n = 1; n <= f.order(); ++n) {
      s.packed_[n] = f[n];
      mpz_mul_2exp(s.packed_[n].get_mpz_t(), s.packed_[n].get_mpz_t(), s.slot_limbs_ * detail::kLimbBits);
    }
    return s;
  }

  // u_1 * inner(x, u_2, ..., u_d): marks the root and shifts inner's markers by one.
  static LevelSeries marked_root(const LevelSeries& inner) {
    if (inner.arity_ + 1 > kMaxMarkedLevels)
      throw std::invalid_argument("LevelSeries: at most " + std::to_string(kMaxMarkedLevels) + " marked levels");
    LevelSeries s(inner.order_, inner.arity_ + 1, inner.slot_limbs_);
    for (std::size_t n = 0; n <= inner.order_; ++n)
      detail::spread_slots(inner.packed_[n], inner.slot_limbs_, s.stride(), 1, s.slot_limbs_, s.packed_[n]);
    return s;
  }

  static LevelSeries from_terms(std::size_t order, std::size_t arity, const std::vector<LevelTerm>& terms) {
    if (arity == 0 || arity > kMaxMarkedLevels) throw std::invalid_argument("LevelSeries: arity must be 1..3");
    BigInt peak = 0;
    for (const auto& t : terms) {
      if (t.value < 0) throw std::domain_error("LevelSeries: coefficients count trees and must be nonnegative");
      peak = std::max(peak, t.value);
    }
    LevelSeries s(order, arity, detail::limbs_for_bits(bit_length(peak) + 1));
    for (const auto& t : terms) {
      if (t.n > order) continue;
      s.check_arity(t.marks);
      for (auto m : t.marks)
        if (m > t.n) throw std::domain_error("LevelSeries: marked level larger than the tree");
      const std::size_t slot = s.slot_of(t.marks);
      BigInt v = t.value;
      mpz_mul_2exp(v.get_mpz_t(), v.get_mpz_t(), slot * s.slot_limbs_ * detail::kLimbBits);
      s.packed_[t.n] += v;
    }
    return s;
  }

  std::size_t order() const { return order_; }
  std::size_t arity() const { return arity_; }

  BigInt coefficient(std::size_t n, const Marks& marks) const {
    if (n > order_) throw std::out_of_range("LevelSeries::coefficient: size beyond order");
    check_arity(marks);
    // A level never holds more nodes than the tree.
    for (auto m : marks)
      if (m > n) return 0;
    return detail::slot_value(packed_[n], slot_limbs_, slot_of(marks));
  }

  // Visits the nonzero coefficients of x^n as (marks, value).
  void for_each_term(std::size_t n, const std::function<void(const Marks&, const BigInt&)>& fn) const {
    if (n > order_) throw std::out_of_range("LevelSeries::for_each_term: size beyond order");
    Marks marks(arity_);
    detail::for_each_slot(packed_[n], slot_limbs_, [&](std::size_t slot, const BigInt& v) {
      std::size_t rest = slot;
      for (std::size_t j = 0; j < arity_; ++j) {
        marks[j] = rest % stride();
        rest /= stride();
      }
      fn(marks, v);
    });
  }

  std::vector<LevelTerm> terms() const {
    std::vector<LevelTerm> out;
    for (std::size_t n = 0; n <= order_; ++n)
      for_each_term(n, [&](const Marks& m, const BigInt& v) { out.push_back({n, m, v}); });
    return out;
  }

  // All markers set to 1.
  IntSeries at_unit_markers() const {
    std::vector<BigInt> out(order_ + 1);
    for (std::size_t n = 0; n <= order_; ++n)
      detail::for_each_slot(packed_[n], slot_limbs_, [&](std::size_t, const BigInt& v) { out[n] += v; });
    return IntSeries(std::move(out));
  }

  // All markers set to 0.
  IntSeries at_zero_markers() const {
    std::vector<BigInt> out(order_ + 1);
    for (std::size_t n = 0; n <= order_; ++n) out[n] = detail::slot_value(packed_[n], slot_limbs_, 0);
    return IntSeries(std::move(out));
  }

  // (x, u_j) -> (x^i, u_j^i), truncated to the same order.
  LevelSeries substitute_power(std::size_t i) const {
    if (i == 0) throw std::invalid_argument("LevelSeries::substitute_power: exponent must be positive");
    LevelSeries s(order_, arity_, slot_limbs_);
    for (std::size_t n = 0; n * i <= order_; ++n)
      detail::spread_slots(packed_[n], slot_limbs_, i, 0, slot_limbs_, s.packed_[n * i]);
    return s;
  }

  // x * exp(sum_{i>=1} F(x^i, u^i)/i) for F = *this; one level deeper.
  LevelSeries polya_step() const {
    const std::size_t n = order_;
    if (packed_[0] != 0) throw std::domain_error("LevelSeries::polya_step: constant term must be zero");

    // Every intermediate coefficient is bounded by m * [x^m] polya_exp(mass).
    const IntSeries mass = at_unit_markers();
    const IntSeries mass_exp = polya_exp(mass);
    BigInt bound = 1;
    for (std::size_t m = 1; m <= n; ++m) bound = std::max(bound, BigInt(mass_exp[m] * static_cast<unsigned long>(m)));
    const std::size_t w = std::max(slot_limbs_, detail::limbs_for_bits(bit_length(bound) + 1));

    std::vector<BigInt> g(n + 1);
    BigInt spread;
    for (std::size_t d = 1; d < n; ++d) {
      if (packed_[d] == 0) continue;
      for (std::size_t j = d; j < n; j += d) {
        detail::spread_slots(packed_[d], slot_limbs_, j / d, 0, w, spread);
        mpz_addmul_ui(g[j].get_mpz_t(), spread.get_mpz_t(), static_cast<unsigned long>(d));
      }
    }
    std::vector<BigInt> a(n);
    if (n > 0) a[0] = 1;
    for (std::size_t m = 1; m < n; ++m) {
      BigInt acc = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (g[j] == 0 || a[m - j] == 0) continue;
        mpz_addmul(acc.get_mpz_t(), g[j].get_mpz_t(), a[m - j].get_mpz_t());
      }
      mpz_divexact_ui(a[m].get_mpz_t(), acc.get_mpz_t(), static_cast<unsigned long>(m));
    }
    LevelSeries s(n, arity_, w);
    for (std::size_t m = 1; m <= n; ++m) s.packed_[m] = std::move(a[m - 1]);
    return s;
  }

 private:
  LevelSeries(std::size_t order, std::size_t arity, std::size_t slot_limbs)
      : order_(order), arity_(arity), slot_limbs_(slot_limbs), packed_(order + 1) {}

  std::size_t stride() const { return order_ + 1; }

  void check_arity(const Marks& marks) const {
    if (marks.size() != arity_) throw std::invalid_argument("LevelSeries: expected " + std::to_string(arity_) + " marks");
  }

  std::size_t slot_of(const Marks& marks) const {
    std::size_t slot = 0;
    std::size_t scale = 1;
    for (std::size_t j = 0; j < arity_; ++j) {
      slot += marks[j] * scale;
      scale *= stride();
    }
    return slot;
  }

  std::size_t order_;
  std::size_t arity_;
  std::size_t slot_limbs_;
  std::vector<BigInt> packed_;
};

}  // namespace polya
