#pragma once

// Closed-form facts about the standard Brownian excursion used as oracles.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace polya::testing {

// P(max <= x) = sum_{k in Z} (1 - 4 k^2 x^2) e^{-2 k^2 x^2}.
inline double excursion_max_cdf(double x) {
  double acc = 1;
  for (int k = 1; k < 200; ++k) {
    const double k2x2 = static_cast<double>(k) * k * x * x;
    acc += 2 * (1 - 4 * k2x2) * std::exp(-2 * k2x2);
  }
  return acc;
}

// E l(kappa) = 4 kappa e^{-2 kappa^2}.
inline double excursion_local_time_mean(double kappa) { return 4 * kappa * std::exp(-2 * kappa * kappa); }

// Nested CF integrand in the unscaled sinh form, inner values entering as
// t + Psi/i, integrated with the trapezoid rule on Re s = c.
inline std::complex<double> literal_joint_cf(const std::vector<double>& kappa, const std::vector<double>& t, double c,
                                             double half_length, double step) {
  using C = std::complex<double>;
  const C i(0, 1);
  auto psi = [&](double k, C x, C tt) {
    const C r = std::sqrt(-x);
    const C z = k * std::sqrt(-2.0 * x);
    return i * tt * r * std::exp(-z) / (r * std::exp(z) - i * tt * std::sqrt(2.0) * std::sinh(z));
  };
  C acc = 0;
  const long steps = static_cast<long>(std::round(half_length / step));
  for (long j = -steps; j <= steps; ++j) {
    const C x(c, j * step);
    C inner = 0;
    for (std::size_t l = kappa.size(); l-- > 0;) {
      const double gap = l == 0 ? kappa[0] : kappa[l] - kappa[l - 1];
      inner = psi(gap, x, t[l] + inner / i);
    }
    const double w = (j == -steps || j == steps) ? 0.5 : 1.0;
    acc += w * inner * std::exp(-x);
  }
  // sqrt2/(i sqrt pi) int ... dx with dx = i dy
  return 1.0 + std::sqrt(2 / std::numbers::pi) * acc * step;
}

}  // namespace polya::testing
