#pragma once

// Dominant singularity rho of the tree series and the constants b, c of its
// square-root expansion y(x) = 1 - b (rho - x)^{1/2} + c (rho - x) + ...

#include "polya/bigint.hpp"
#include "polya/enumeration.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace polya {

struct SingularityData {
  double rho = 0.0;
  double b = 0.0;
  double c = 0.0;
  std::size_t series_order = 0;
  std::size_t tail_cutoff = 0;  // largest i kept in sum_{i>=2} y(x^i)/i
  double residual = 0.0;        // |rho e^{1 + D(rho)} - 1|, i.e. |y(rho) - 1|
  double tolerance = 0.0;
  std::size_t iterations = 0;
  // Least-squares cross-check of b and c near the singularity.
  double b_fit = 0.0;
  double c_fit = 0.0;
  double fit_rms = 0.0;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_iterate, double residual)
      : std::runtime_error(what), last_iterate_(last_iterate), residual_(residual) {}
  double last_iterate() const { return last_iterate_; }
  double residual() const { return residual_; }

 private:
  double last_iterate_;
  double residual_;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Evaluates y and the auxiliary sum D(x) = sum_{i>=2} y(x^i)/i from an exact
// coefficient table. Arguments of y inside D never exceed rho^2, where the
// truncated series is accurate to roughly rho^N.
class TreeSeriesEvaluator {
 public:
  TreeSeriesEvaluator(std::size_t order, double tail_tol)
      : tail_tol_(tail_tol), coeffs_(order + 1) {
    const TreeCountTable counts = build_tree_counts(order);
    for (std::size_t n = 0; n <= order; ++n) coeffs_[n] = to_long_double(counts[n]);
  }

  std::size_t order() const { return coeffs_.size() - 1; }

  // Truncated series; only meaningful well inside the disk.
  long double y(long double z) const {
    long double acc = 0;
    for (std::size_t n = coeffs_.size(); n-- > 0;) acc = acc * z + coeffs_[n];
    return acc;
  }

  long double y_prime(long double z) const {
    long double acc = 0;
    for (std::size_t n = coeffs_.size(); n-- > 1;) acc = acc * z + coeffs_[n] * static_cast<long double>(n);
    return acc;
  }

  long double d(long double x) const {
    long double acc = 0;
    long double power = x;
    for (std::size_t i = 2;; ++i) {
      power *= x;
      if (power < tail_cutoff_value()) break;
      acc += y(power) / static_cast<long double>(i);
    }
    return acc;
  }

  long double d_prime(long double x) const {
    long double acc = 0;
    long double power = x;  // x^{i-1}
    for (std::size_t i = 2;; ++i) {
      const long double xi = power * x;
      if (xi < tail_cutoff_value()) break;
      acc += power * y_prime(xi);
      power = xi;
    }
    return acc;
  }

  std::size_t tail_cutoff(long double x) const {
    std::size_t last = 1;
    long double power = x;
    for (std::size_t i = 2;; ++i) {
      power *= x;
      if (power < tail_cutoff_value()) break;
      last = i;
    }
    return last;
  }

  // y(x) for 0 < x <= rho from the functional equation y e^{-y} = x e^{D(x)}:
  // with w = 1 - y this is log(1 - w) + w = log x + 1 + D(x) =: q <= 0.
  long double y_from_equation(long double x) const {
    const long double q = std::log(x) + 1.0L + d(x);
    if (q > 0) throw std::domain_error("y_from_equation: x beyond the singularity");
    if (q == 0) return 1.0L;
    long double w = std::sqrt(-2.0L * q);
    if (w >= 1) w = 0.999L;
    for (int it = 0; it < 100; ++it) {
      const long double f = std::log1p(-w) + w - q;
      const long double fp = -w / (1 - w);
      long double step = f / fp;
      long double next = w - step;
      if (next >= 1) next = (w + 1) / 2;
      if (next <= 0) next = w / 2;
      if (std::fabs(next - w) <= 1e-19L * std::max(1.0L, w)) {
        w = next;
        break;
      }
      w = next;
    }
    return 1.0L - w;
  }

 private:
  long double tail_cutoff_value() const { return static_cast<long double>(tail_tol_) * 1e-2L; }

  double tail_tol_;
  std::vector<long double> coeffs_;
};

// Fixed point rho = exp(-1 - D(rho)), equivalent to y(rho) = 1.
inline SingularityData compute_rho(std::size_t order, double tol) {
  if (!(tol > 0)) throw std::invalid_argument("compute_rho: tolerance must be positive");
  if (std::pow(0.34, static_cast<double>(order)) > tol * 1e-2)
    throw std::invalid_argument("compute_rho: series order " + std::to_string(order) + " too small for tolerance");
  const TreeSeriesEvaluator eval(order, tol);
  constexpr std::size_t kMaxIterations = 500;
  long double x = 0.3L;
  long double prev = 0;
  for (std::size_t it = 1; it <= kMaxIterations; ++it) {
    prev = x;
    x = std::exp(-1.0L - eval.d(x));
    if (std::fabs(x - prev) < static_cast<long double>(tol) * 1e-3L) {
      SingularityData data;
      data.rho = static_cast<double>(x);
      data.series_order = order;
      data.tail_cutoff = eval.tail_cutoff(x);
      data.residual = static_cast<double>(std::fabs(x * std::exp(1.0L + eval.d(x)) - 1.0L));
      data.tolerance = tol;
      data.iterations = it;
      if (!(data.residual < tol))
        throw ConvergenceError("compute_rho: residual above tolerance", data.rho, data.residual);
      return data;
    }
  }
  throw ConvergenceError("compute_rho: no convergence within iteration cap", static_cast<double>(x),
                         static_cast<double>(std::fabs(x * std::exp(1.0L + eval.d(x)) - 1.0L)));
}

// b = sqrt(2/rho + 2 D'(rho)), c = b^2/3, cross-checked by a least-squares fit
// of 1 - y(x) on a mesh approaching rho.
inline SingularityData compute_b_c(SingularityData data) {
  if (!(data.rho > 0 && data.rho < 1)) throw std::invalid_argument("compute_b_c: rho not computed");
  const TreeSeriesEvaluator eval(data.series_order, data.tolerance);
  const long double rho = data.rho;
  const long double b = std::sqrt(2.0L / rho + 2.0L * eval.d_prime(rho));
  data.b = static_cast<double>(b);
  data.c = static_cast<double>(b * b / 3.0L);

  // 1 - y = b s - c s^2 + (higher) with s = sqrt(rho - x); the s^3 and s^4
  // columns absorb the next terms and are not reported.
  constexpr int kMesh = 64;
  constexpr int kBasis = 4;
  Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> a(kMesh, kBasis);
  Eigen::Matrix<long double, Eigen::Dynamic, 1> rhs(kMesh);
  const long double lo = std::log(1e-6L), hi = std::log(1e-3L);
  for (int k = 0; k < kMesh; ++k) {
    const long double delta = std::exp(lo + (hi - lo) * k / (kMesh - 1));
    const long double s = std::sqrt(delta);
    // Weight each row by 1/s so the small-delta end is not drowned out.
    for (int j = 0; j < kBasis; ++j) a(k, j) = std::pow(s, j + 1) / s;
    rhs(k) = (1.0L - eval.y_from_equation(rho - delta)) / s;
  }
  const Eigen::Matrix<long double, Eigen::Dynamic, 1> coef = a.colPivHouseholderQr().solve(rhs);
  data.b_fit = static_cast<double>(coef(0));
  data.c_fit = static_cast<double>(-coef(1));
  data.fit_rms = static_cast<double>(std::sqrt((a * coef - rhs).squaredNorm() / kMesh));
  if (std::fabs(data.b_fit - data.b) > 1e-4)
    throw NumericError("compute_b_c: fitted b " + std::to_string(data.b_fit) + " disagrees with formula b " +
                       std::to_string(data.b));
  return data;
}

inline SingularityData compute_constants(std::size_t order = 120, double tol = 1e-12) {
  return compute_b_c(compute_rho(order, tol));
}

// b sqrt(rho) / (2 sqrt(pi)).
inline double asymptotic_prefactor(const SingularityData& data) {
  return data.b * std::sqrt(data.rho) / (2.0 * std::sqrt(std::numbers::pi));
}

// y_n ~ b sqrt(rho) / (2 sqrt(pi)) n^{-3/2} rho^{-n}.
inline long double asymptotic_count(std::size_t n, const SingularityData& data) {
  const long double nn = static_cast<long double>(n);
  return static_cast<long double>(asymptotic_prefactor(data)) * std::pow(nn, -1.5L) *
         std::exp(-nn * std::log(static_cast<long double>(data.rho)));
}

inline double count_ratio(const BigInt& exact, std::size_t n, const SingularityData& data) {
  const ScaledValue v = scaled(exact);
  const long double log_exact = std::log(v.mantissa) + static_cast<long double>(v.exponent) * std::log(2.0L);
  const long double nn = static_cast<long double>(n);
  const long double log_asym = std::log(static_cast<long double>(asymptotic_prefactor(data))) - 1.5L * std::log(nn) -
                               nn * std::log(static_cast<long double>(data.rho));
  return static_cast<double>(std::exp(log_exact - log_asym));
}

}  // namespace polya
