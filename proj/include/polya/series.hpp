#pragma once

// Truncated univariate power series with exact coefficients.
//
// A TruncSeries<C> of order N holds the coefficients of x^0 .. x^N; every
// retained coefficient is exact, higher powers are discarded. Binary
// operations on series of different orders truncate to the smaller order.

#include "polya/bigint.hpp"

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace polya {

template <class C>
class TruncSeries {
 public:
  using coeff_type = C;

  explicit TruncSeries(std::size_t order) : coeffs_(order + 1) {}

  explicit TruncSeries(std::vector<C> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) throw std::invalid_argument("TruncSeries: need at least one coefficient");
  }

  static TruncSeries constant(const C& c, std::size_t order) {
    TruncSeries s(order);
    s.coeffs_[0] = c;
    return s;
  }

  // x^k truncated at `order` (zero series when k > order).
  static TruncSeries monomial(std::size_t k, std::size_t order) {
    TruncSeries s(order);
    if (k <= order) s.coeffs_[k] = 1;
    return s;
  }

  std::size_t order() const { return coeffs_.size() - 1; }

  const C& operator[](std::size_t n) const {
    if (n > order()) throw std::out_of_range("TruncSeries: index " + std::to_string(n) + " beyond order");
    return coeffs_[n];
  }

  std::span<const C> coeffs() const { return coeffs_; }

  TruncSeries truncated(std::size_t order) const {
    if (order > this->order()) throw std::invalid_argument("TruncSeries::truncated: cannot extend order");
    return TruncSeries(std::vector<C>(coeffs_.begin(), coeffs_.begin() + static_cast<std::ptrdiff_t>(order) + 1));
  }

  bool is_zero() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](const C& c) { return c == 0; });
  }

  friend bool operator==(const TruncSeries& a, const TruncSeries& b) { return a.coeffs_ == b.coeffs_; }

  friend TruncSeries operator+(const TruncSeries& a, const TruncSeries& b) {
    const std::size_t n = std::min(a.order(), b.order());
    std::vector<C> out(n + 1);
    for (std::size_t i = 0; i <= n; ++i) out[i] = a.coeffs_[i] + b.coeffs_[i];
    return TruncSeries(std::move(out));
  }

  friend TruncSeries operator-(const TruncSeries& a, const TruncSeries& b) {
    const std::size_t n = std::min(a.order(), b.order());
    std::vector<C> out(n + 1);
    for (std::size_t i = 0; i <= n; ++i) out[i] = a.coeffs_[i] - b.coeffs_[i];
    return TruncSeries(std::move(out));
  }

  friend TruncSeries operator-(const TruncSeries& a) {
    std::vector<C> out(a.coeffs_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -a.coeffs_[i];
    return TruncSeries(std::move(out));
  }

  friend TruncSeries operator*(const TruncSeries& a, const TruncSeries& b) {
    const std::size_t n = std::min(a.order(), b.order());
    std::vector<C> out(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      if (a.coeffs_[i] == 0) continue;
      for (std::size_t j = 0; i + j <= n; ++j) out[i + j] += a.coeffs_[i] * b.coeffs_[j];
    }
    return TruncSeries(std::move(out));
  }

  friend TruncSeries operator*(const C& k, const TruncSeries& a) {
    std::vector<C> out(a.coeffs_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = k * a.coeffs_[i];
    return TruncSeries(std::move(out));
  }

 private:
  std::vector<C> coeffs_;
};

using IntSeries = TruncSeries<BigInt>;
using RatSeries = TruncSeries<Rational>;

inline RatSeries to_rational(const IntSeries& s) {
  std::vector<Rational> out(s.order() + 1);
  for (std::size_t i = 0; i <= s.order(); ++i) out[i] = Rational(s[i]);
  return RatSeries(std::move(out));
}

// Integer series from a rational one; throws if any coefficient is not integral.
inline IntSeries to_integer(const RatSeries& s) {
  std::vector<BigInt> out(s.order() + 1);
  for (std::size_t i = 0; i <= s.order(); ++i) {
    if (s[i].get_den() != 1) throw std::domain_error("to_integer: non-integral coefficient at index " + std::to_string(i));
    out[i] = s[i].get_num();
  }
  return IntSeries(std::move(out));
}

// f(x^i), truncated to the order of f.
template <class C>
TruncSeries<C> substitute_power(const TruncSeries<C>& f, std::size_t i) {
  if (i == 0) throw std::invalid_argument("substitute_power: exponent must be positive");
  const std::size_t n = f.order();
  std::vector<C> out(n + 1);
  for (std::size_t k = 0; k * i <= n; ++k) out[k * i] = f[k];
  return TruncSeries<C>(std::move(out));
}

// exp(f) for f(0) = 0, via n g_n = sum_k k f_k g_{n-k}.
inline RatSeries series_exp(const RatSeries& f) {
  if (f[0] != 0) throw std::domain_error("series_exp: constant term must be zero");
  const std::size_t n = f.order();
  std::vector<Rational> g(n + 1);
  g[0] = 1;
  for (std::size_t m = 1; m <= n; ++m) {
    Rational acc = 0;
    for (std::size_t k = 1; k <= m; ++k) {
      if (f[k] == 0) continue;
      acc += Rational(static_cast<long>(k)) * f[k] * g[m - k];
    }
    g[m] = acc / Rational(static_cast<long>(m));
  }
  return RatSeries(std::move(g));
}

// log(g) for g(0) = 1.
inline RatSeries series_log(const RatSeries& g) {
  if (g[0] != 1) throw std::domain_error("series_log: constant term must be one");
  const std::size_t n = g.order();
  std::vector<Rational> f(n + 1);
  for (std::size_t m = 1; m <= n; ++m) {
    Rational acc = Rational(static_cast<long>(m)) * g[m];
    for (std::size_t k = 1; k < m; ++k) acc -= Rational(static_cast<long>(k)) * f[k] * g[m - k];
    f[m] = acc / Rational(static_cast<long>(m));
  }
  return RatSeries(std::move(f));
}

// Multiset construction exp(sum_{i>=1} f(x^i)/i). With G_J = sum_{d|J} d f_d
// the coefficients satisfy N A_N = sum_{J=1}^N G_J A_{N-J}; every division is
// exact because the result has integer coefficients whenever f does.
template <class C>
TruncSeries<C> polya_exp(const TruncSeries<C>& f) {
  if (f[0] != 0) throw std::domain_error("polya_exp: constant term must be zero");
  const std::size_t n = f.order();
  std::vector<C> g(n + 1);
  for (std::size_t d = 1; d <= n; ++d) {
    if (f[d] == 0) continue;
    const C term = C(static_cast<long>(d)) * f[d];
    for (std::size_t j = d; j <= n; j += d) g[j] += term;
  }
  std::vector<C> a(n + 1);
  a[0] = 1;
  for (std::size_t m = 1; m <= n; ++m) {
    C acc = 0;
    for (std::size_t j = 1; j <= m; ++j) {
      if (g[j] == 0) continue;
      acc += g[j] * a[m - j];
    }
    a[m] = divexact(acc, static_cast<unsigned long>(m));
  }
  return TruncSeries<C>(std::move(a));
}

// 1/f; requires an invertible constant term (+-1 for integer series).
template <class C>
TruncSeries<C> reciprocal(const TruncSeries<C>& f) {
  if (f[0] == 0) throw std::domain_error("reciprocal: zero constant term");
  if constexpr (std::same_as<C, BigInt>) {
    if (f[0] != 1 && f[0] != -1) throw std::domain_error("reciprocal: integer series needs constant term +-1");
  }
  const std::size_t n = f.order();
  std::vector<C> g(n + 1);
  const C inv = C(1) / f[0];
  g[0] = inv;
  for (std::size_t m = 1; m <= n; ++m) {
    C acc = 0;
    for (std::size_t k = 1; k <= m; ++k) acc += f[k] * g[m - k];
    g[m] = -inv * acc;
  }
  return TruncSeries<C>(std::move(g));
}

// Compositional inverse g with f(g(x)) = x, for f = x + O(x^2).
// Lagrange inversion: n g_n = [x^{n-1}] (x/f(x))^n.
template <class C>
TruncSeries<C> functional_inverse(const TruncSeries<C>& f) {
  const std::size_t n = f.order();
  if (n < 1) throw std::invalid_argument("functional_inverse: order must be at least 1");
  if (f[0] != 0 || f[1] != 1) throw std::domain_error("functional_inverse: need f(0) = 0 and f'(0) = 1");
  std::vector<C> out(n + 1);
  if (n == 1) {
    out[1] = 1;
    return TruncSeries<C>(std::move(out));
  }
  std::vector<C> shifted(f.coeffs().begin() + 1, f.coeffs().end());
  const TruncSeries<C> h = reciprocal(TruncSeries<C>(std::move(shifted)));
  TruncSeries<C> power = h;
  for (std::size_t m = 1; m <= n; ++m) {
    out[m] = divexact(power[m - 1], static_cast<unsigned long>(m));
    if (m < n) power = power * h;
  }
  return TruncSeries<C>(std::move(out));
}

}  // namespace polya
