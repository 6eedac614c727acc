#pragma once

// Exact counting of Pólya trees and exact distributions of height and level
// sizes for uniformly random trees of a fixed size.

#include "polya/bigint.hpp"
#include "polya/level_series.hpp"
#include "polya/series.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace polya {

// ---------------------------------------------------------------------------
// Tree counts y_1 .. y_N

class TreeCountTable {
 public:
  explicit TreeCountTable(std::vector<BigInt> counts) : counts_(std::move(counts)) {
    if (counts_.size() < 2) throw std::invalid_argument("TreeCountTable: order must be at least 1");
  }

  std::size_t order() const { return counts_.size() - 1; }

  const BigInt& operator[](std::size_t n) const {
    if (n > order()) throw std::out_of_range("TreeCountTable: size " + std::to_string(n) + " beyond order " + std::to_string(order()));
    return counts_[n];
  }

  // y(x) = sum y_n x^n, constant term 0.
  IntSeries series() const { return IntSeries(counts_); }

 private:
  std::vector<BigInt> counts_;
};

// (n-1) y_n = sum_{j=1}^{n-1} S_j y_{n-j},  S_j = sum_{d|j} d y_d.
inline TreeCountTable build_tree_counts(std::size_t order) {
  if (order < 1) throw std::invalid_argument("build_tree_counts: order must be at least 1");
  std::vector<BigInt> y(order + 1), s(order + 1);
  y[1] = 1;
  for (std::size_t n = 1; n <= order; ++n) {
    if (n >= 2) {
      BigInt acc = 0;
      for (std::size_t j = 1; j < n; ++j) mpz_addmul(acc.get_mpz_t(), s[j].get_mpz_t(), y[n - j].get_mpz_t());
      mpz_divexact_ui(y[n].get_mpz_t(), acc.get_mpz_t(), static_cast<unsigned long>(n - 1));
    }
    const BigInt dy = y[n] * static_cast<unsigned long>(n);
    for (std::size_t m = n; m <= order; m += n) s[m] += dy;
  }
  return TreeCountTable(std::move(y));
}

// Fixed-point iteration y <- x * polya_exp(y); each round fixes one more
// coefficient. Slow, used to cross-check build_tree_counts.
inline IntSeries tree_series_by_fixed_point(std::size_t order) {
  IntSeries y(order);
  const IntSeries x = IntSeries::monomial(1, order);
  for (std::size_t round = 0; round < order; ++round) y = x * polya_exp(y);
  return y;
}

// ---------------------------------------------------------------------------
// Not-simply-generated witness: phi(x) = x / y^{-1}(x).

struct SimplyGeneratedWitness {
  IntSeries inverse;  // y^{-1}(x)
  IntSeries phi;
  std::optional<std::size_t> first_negative;
};

inline SimplyGeneratedWitness simply_generated_witness(std::size_t order) {
  if (order < 10) throw std::invalid_argument("simply_generated_witness: order must be at least 10");
  // phi to order N needs y^{-1} to order N + 1.
  const IntSeries y = build_tree_counts(order + 1).series();
  IntSeries inverse = functional_inverse(y);
  std::vector<BigInt> quotient(inverse.coeffs().begin() + 1, inverse.coeffs().end());
  IntSeries phi = reciprocal(IntSeries(std::move(quotient)));
  std::optional<std::size_t> first_negative;
  for (std::size_t n = 0; n <= phi.order(); ++n) {
    if (phi[n] < 0) {
      first_negative = n;
      break;
    }
  }
  return {std::move(inverse), std::move(phi), first_negative};
}

// ---------------------------------------------------------------------------
// Height

// y_k(x): trees of height < k. y_0 = 0, y_{k+1} = x polya_exp(y_k).
inline IntSeries height_restricted_series(std::size_t k, std::size_t order) {
  IntSeries y(order);
  const IntSeries x = IntSeries::monomial(1, order);
  // Once k exceeds the order nothing changes.
  const std::size_t rounds = std::min(k, order + 1);
  for (std::size_t round = 0; round < rounds; ++round) y = x * polya_exp(y);
  return y;
}

// [x^n] y_k for every k <= N and n <= N.
class HeightTable {
 public:
  explicit HeightTable(std::size_t order) : order_(order), counts_(build_tree_counts(std::max<std::size_t>(order, 1))) {
    below_.reserve(order + 2);
    IntSeries y(order);
    const IntSeries x = IntSeries::monomial(1, order);
    below_.emplace_back(y.coeffs().begin(), y.coeffs().end());
    for (std::size_t k = 1; k <= order + 1; ++k) {
      y = x * polya_exp(y);
      below_.emplace_back(y.coeffs().begin(), y.coeffs().end());
    }
  }

  std::size_t order() const { return order_; }
  const TreeCountTable& counts() const { return counts_; }

  // Number of size-n trees with height < k.
  const BigInt& below(std::size_t k, std::size_t n) const {
    if (n > order_) throw std::out_of_range("HeightTable: size beyond order");
    return below_[std::min(k, order_ + 1)][n];
  }

 private:
  std::size_t order_;
  TreeCountTable counts_;
  std::vector<std::vector<BigInt>> below_;
};

class HeightDistribution {
 public:
  HeightDistribution(std::size_t n, std::vector<Rational> pmf) : n_(n), pmf_(std::move(pmf)) {}

  std::size_t size() const { return n_; }
  // pmf[h] = P(H_n = h), h = 0 .. n-1.
  const std::vector<Rational>& pmf() const { return pmf_; }

  Rational probability(std::size_t h) const { return h < pmf_.size() ? pmf_[h] : Rational(0); }

  Rational moment(unsigned r) const {
    Rational acc = 0;
    for (std::size_t h = 0; h < pmf_.size(); ++h) {
      if (pmf_[h] == 0) continue;
      BigInt p;
      mpz_ui_pow_ui(p.get_mpz_t(), static_cast<unsigned long>(h), r);
      acc += pmf_[h] * Rational(p);
    }
    return acc;
  }

  Rational mean() const { return moment(1); }

 private:
  std::size_t n_;
  std::vector<Rational> pmf_;
};

inline HeightDistribution height_distribution(std::size_t n, const HeightTable& table) {
  if (n < 1 || n > table.order()) throw std::out_of_range("height_distribution: size outside table");
  const BigInt& total = table.counts()[n];
  std::vector<Rational> pmf(n);
  for (std::size_t h = 0; h < n; ++h) {
    pmf[h] = Rational(table.below(h + 1, n) - table.below(h, n), total);
    pmf[h].canonicalize();
  }
  return HeightDistribution(n, std::move(pmf));
}

inline HeightDistribution height_distribution(std::size_t n) {
  if (n < 1) throw std::invalid_argument("height_distribution: size must be positive");
  return height_distribution(n, HeightTable(n));
}

// ---------------------------------------------------------------------------
// Level profiles

// y_k(x, u): size-n trees with m nodes at depth k.
inline LevelSeries level_marked_series(std::size_t k, std::size_t order) {
  LevelSeries s = LevelSeries::marked_root(build_tree_counts(std::max<std::size_t>(order, 1)).series().truncated(order));
  for (std::size_t step = 0; step < k; ++step) s = s.polya_step();
  return s;
}

// y_{k_1..k_d}(x, u_1..u_d): joint marking of strictly increasing depths.
inline LevelSeries joint_level_series(const std::vector<std::size_t>& depths, std::size_t order) {
  if (depths.empty() || depths.size() > kMaxMarkedLevels)
    throw std::invalid_argument("joint_level_series: between 1 and " + std::to_string(kMaxMarkedLevels) + " depths");
  for (std::size_t j = 1; j < depths.size(); ++j)
    if (depths[j] <= depths[j - 1]) throw std::invalid_argument("joint_level_series: depths must be strictly increasing");
  const std::size_t d = depths.size();
  LevelSeries s = level_marked_series(d == 1 ? depths[0] : depths[d - 1] - depths[d - 2], order);
  for (std::size_t j = d - 1; j-- > 0;) {
    s = LevelSeries::marked_root(s);
    const std::size_t gap = j == 0 ? depths[0] : depths[j] - depths[j - 1];
    for (std::size_t step = 0; step < gap; ++step) s = s.polya_step();
  }
  return s;
}

class LevelDistribution {
 public:
  LevelDistribution(std::size_t n, std::vector<std::size_t> depths, std::map<Marks, Rational> pmf)
      : n_(n), depths_(std::move(depths)), pmf_(std::move(pmf)) {}

  std::size_t size() const { return n_; }
  const std::vector<std::size_t>& depths() const { return depths_; }
  const std::map<Marks, Rational>& pmf() const { return pmf_; }

  Rational probability(const Marks& m) const {
    auto it = pmf_.find(m);
    return it == pmf_.end() ? Rational(0) : it->second;
  }

  Rational total() const {
    Rational acc = 0;
    for (const auto& [m, p] : pmf_) acc += p;
    return acc;
  }

  // Law of the coordinates other than `drop`.
  LevelDistribution marginal_without(std::size_t drop) const {
    if (drop >= depths_.size() || depths_.size() == 1) throw std::invalid_argument("marginal_without: bad coordinate");
    std::vector<std::size_t> depths;
    for (std::size_t j = 0; j < depths_.size(); ++j)
      if (j != drop) depths.push_back(depths_[j]);
    std::map<Marks, Rational> out;
    for (const auto& [m, p] : pmf_) {
      Marks key;
      for (std::size_t j = 0; j < m.size(); ++j)
        if (j != drop) key.push_back(m[j]);
      out[key] += p;
    }
    return LevelDistribution(n_, std::move(depths), std::move(out));
  }

  // E exp(i sum_j t_j M_j * scale).
  std::complex<double> characteristic_function(const std::vector<double>& t, double scale = 1.0) const {
    if (t.size() != depths_.size()) throw std::invalid_argument("characteristic_function: one argument per level");
    std::complex<long double> acc = 0;
    for (const auto& [m, p] : pmf_) {
      long double phase = 0;
      for (std::size_t j = 0; j < m.size(); ++j) phase += static_cast<long double>(t[j]) * static_cast<long double>(m[j]);
      phase *= scale;
      acc += to_long_double(p) * std::complex<long double>(std::cos(phase), std::sin(phase));
    }
    return {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
  }

 private:
  std::size_t n_;
  std::vector<std::size_t> depths_;
  std::map<Marks, Rational> pmf_;
};

// Distribution of the marked level sizes at tree size n, read off a series
// built by level_marked_series / joint_level_series for the same depths.
inline LevelDistribution level_distribution_from(const LevelSeries& series, std::size_t n, std::vector<std::size_t> depths,
                                                 const BigInt& total) {
  if (series.arity() != depths.size()) throw std::invalid_argument("level_distribution_from: arity mismatch");
  std::map<Marks, Rational> pmf;
  series.for_each_term(n, [&](const Marks& m, const BigInt& v) {
    Rational p(v, total);
    p.canonicalize();
    pmf.emplace(m, p);
  });
  return LevelDistribution(n, std::move(depths), std::move(pmf));
}

inline LevelDistribution level_size_distribution(std::size_t n, std::size_t k) {
  if (n < 1) throw std::invalid_argument("level_size_distribution: size must be positive");
  const TreeCountTable counts = build_tree_counts(n);
  return level_distribution_from(level_marked_series(k, n), n, {k}, counts[n]);
}

inline LevelDistribution joint_level_distribution(std::size_t n, const std::vector<std::size_t>& depths) {
  if (n < 1) throw std::invalid_argument("joint_level_distribution: size must be positive");
  if (depths.size() > kMaxMarkedLevels) throw std::invalid_argument("joint_level_distribution: at most 3 levels");
  const TreeCountTable counts = build_tree_counts(n);
  return level_distribution_from(joint_level_series(depths, n), n, depths, counts[n]);
}

// ---------------------------------------------------------------------------
// Fourth moment of level differences, E (L_n(r) - L_n(r+h))^4.

inline Rational level_diff_fourth_moment(const LevelDistribution& joint) {
  if (joint.depths().size() != 2) throw std::invalid_argument("level_diff_fourth_moment: needs a two-level law");
  Rational acc = 0;
  for (const auto& [m, p] : joint.pmf()) {
    const long diff = static_cast<long>(m[0]) - static_cast<long>(m[1]);
    acc += p * Rational(diff * diff * diff * diff);
  }
  return acc;
}

inline Rational level_diff_fourth_moment(std::size_t n, std::size_t r, std::size_t h) {
  if (h < 1) throw std::invalid_argument("level_diff_fourth_moment: gap must be positive");
  return level_diff_fourth_moment(joint_level_distribution(n, {r, r + h}));
}

namespace detail {

// Truncated polynomials in eps modulo eps^5: the Taylor jet at u = 1 + eps.
using Jet = std::array<BigInt, 5>;

inline Jet jet_mul(const Jet& a, const Jet& b) {
  Jet out{};
  for (std::size_t i = 0; i < 5; ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; i + j < 5; ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

// The jet of u^e at u = 1, i.e. (1+eps)^e; generalized binomials cover e < 0.
inline Jet jet_of_power(long e) {
  Jet out{};
  out[0] = 1;
  BigInt binom = 1;
  for (long l = 1; l < 5; ++l) {
    binom *= BigInt(e - l + 1);
    mpz_divexact_ui(binom.get_mpz_t(), binom.get_mpz_t(), static_cast<unsigned long>(l));
    out[static_cast<std::size_t>(l)] = binom;
  }
  return out;
}

// c(u) -> c(u^i): substitute (1+eps)^i - 1 for eps.
inline Jet jet_power_substitute(const Jet& c, long i) {
  Jet shift = jet_of_power(i);
  shift[0] = 0;
  Jet out{};
  Jet power{};
  power[0] = 1;
  for (std::size_t k = 0; k < 5; ++k) {
    if (c[k] != 0)
      for (std::size_t j = 0; j < 5; ++j) out[j] += c[k] * power[j];
    power = jet_mul(power, shift);
  }
  return out;
}

inline Jet jet_scale(const Jet& a, const BigInt& k) {
  Jet out;
  for (std::size_t i = 0; i < 5; ++i) out[i] = a[i] * k;
  return out;
}

// One step F -> x exp(sum_i F(x^i, u^i)/i) on a series with jet coefficients.
inline std::vector<Jet> jet_polya_step(const std::vector<Jet>& f) {
  const std::size_t n = f.size() - 1;
  std::vector<Jet> g(n + 1);
  for (std::size_t d = 1; d < n; ++d) {
    bool zero = true;
    for (const auto& c : f[d]) zero = zero && c == 0;
    if (zero) continue;
    for (std::size_t j = d; j < n; j += d) {
      const Jet sub = jet_power_substitute(f[d], static_cast<long>(j / d));
      for (std::size_t e = 0; e < 5; ++e) g[j][e] += sub[e] * static_cast<unsigned long>(d);
    }
  }
  std::vector<Jet> a(n);
  if (n > 0) a[0][0] = 1;
  for (std::size_t m = 1; m < n; ++m) {
    Jet acc{};
    for (std::size_t j = 1; j <= m; ++j) {
      const Jet prod = jet_mul(g[j], a[m - j]);
      for (std::size_t e = 0; e < 5; ++e) acc[e] += prod[e];
    }
    for (std::size_t e = 0; e < 5; ++e) mpz_divexact_ui(a[m][e].get_mpz_t(), acc[e].get_mpz_t(), static_cast<unsigned long>(m));
  }
  std::vector<Jet> out(n + 1);
  for (std::size_t m = 1; m <= n; ++m) out[m] = std::move(a[m - 1]);
  return out;
}

}  // namespace detail

// Same moment through the generating function ytilde_{r,h}(x, u, 1/u):
// (d_u + 7 d_u^2 + 6 d_u^3 + d_u^4) at u = 1, divided by y_n. The u-jet at
// u = 1 + eps carries exactly the four derivatives needed.
//
// One chain serves every size up to `order` and every r up to r_max:
// table[r][n] = E (L_n(r) - L_n(r+h))^4, entry n = 0 unused.
inline std::vector<std::vector<Rational>> level_diff_fourth_moment_table(std::size_t order, std::size_t h, std::size_t r_max) {
  if (h < 1) throw std::invalid_argument("level_diff_fourth_moment_table: gap must be positive");
  if (order < 1) throw std::invalid_argument("level_diff_fourth_moment_table: order must be positive");
  const TreeCountTable counts = build_tree_counts(order);
  using detail::Jet;
  // y_0(x, v) with v = 1/u, then h steps, then multiply by u, then r steps.
  std::vector<Jet> f(order + 1);
  const Jet inv_u = detail::jet_of_power(-1);
  for (std::size_t m = 1; m <= order; ++m) f[m] = detail::jet_scale(inv_u, counts[m]);
  for (std::size_t step = 0; step < h; ++step) f = detail::jet_polya_step(f);
  const Jet u = detail::jet_of_power(1);
  for (std::size_t m = 1; m <= order; ++m) f[m] = detail::jet_mul(f[m], u);
  std::vector<std::vector<Rational>> table(r_max + 1, std::vector<Rational>(order + 1));
  for (std::size_t r = 0; r <= r_max; ++r) {
    if (r > 0) f = detail::jet_polya_step(f);
    for (std::size_t n = 1; n <= order; ++n) {
      // Taylor coefficient p_k = (d_u^k f)(1) / k!.
      const Jet& p = f[n];
      Rational v(p[1] + 14 * p[2] + 36 * p[3] + 24 * p[4], counts[n]);
      v.canonicalize();
      table[r][n] = std::move(v);
    }
  }
  return table;
}

inline Rational level_diff_fourth_moment_operator(std::size_t n, std::size_t r, std::size_t h) {
  if (n < 1) throw std::invalid_argument("level_diff_fourth_moment_operator: size must be positive");
  return level_diff_fourth_moment_table(n, h, r)[r][n];
}

}  // namespace polya
