#pragma once

// Brownian-excursion local time: characteristic functions (single and
// joint levels) as contour integrals along Re s = c < 0, the law of l(kappa)
// by inversion, and the limit laws for Polya-tree profiles and heights.
//
// Every CF has the form 1 + sqrt(2/pi) * int f(s) e^{-s} dy, s = c + iy,
// where f is Psi (single level) or the nested Psi (joint levels).

#include "polya/constants.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/zeta.hpp>

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace polya {

using Complex = std::complex<double>;

struct LocalTimeQuery {
  std::vector<double> levels;  // kappa_1 < ... < kappa_d, d <= 3
  std::vector<double> args;    // t_1 .. t_d
  double contour_abscissa = -1.0;
  double truncation = 0.0;  // half-length T of the contour; 0 picks it from quad_tol
  double quad_tol = 1e-10;
  double panel_width = 1.0;  // Gauss-Legendre panel width along the contour
  // Feed inner Psi values into the next argument as printed, t + Psi,
  // instead of t + Psi/i. The printed form breaks the marginal collapse
  // (setting t_1 = 0 must give the CF at kappa_2); kept for comparison.
  bool literal_nesting = false;
};

struct ContourResult {
  Complex value;
  double truncation_error = 0.0;  // tail estimate beyond |Im s| = T
  double half_length = 0.0;
  std::size_t evaluations = 0;
};

namespace detail {

constexpr std::size_t kMaxJointLevels = 3;
constexpr double kMaxHalfLength = 1e8;

inline void check_contour(const LocalTimeQuery& q) {
  if (!(q.contour_abscissa < 0)) throw std::invalid_argument("contour abscissa must be negative");
  if (!(q.truncation >= 0)) throw std::invalid_argument("truncation must be nonnegative");
  if (!(q.quad_tol > 0)) throw std::invalid_argument("quad_tol must be positive");
  if (!(q.panel_width > 0)) throw std::invalid_argument("panel_width must be positive");
}

// Pieces of Psi that do not depend on t: sqrt(-s), E^2 = exp(-2 kappa
// sqrt(-2s)) and beta = (1 - E^2)/sqrt 2.
struct PsiParts {
  Complex root;  // sqrt(-s), principal branch
  Complex e2;
  Complex beta;
};

inline PsiParts psi_parts(double kappa, Complex s) {
  const Complex root = std::sqrt(-s);
  const Complex e2 = std::exp(-2.0 * kappa * std::numbers::sqrt2 * root);
  return {root, e2, (1.0 - e2) / std::numbers::sqrt2};
}

// Psi_kappa(s,t) divided through by exp(kappa sqrt(-2s)):
// i t sqrt(-s) E^2 / (sqrt(-s) - i t beta).
inline Complex psi_from_parts(const PsiParts& p, Complex t) {
  const Complex it = Complex(0, 1) * t;
  const Complex den = p.root - it * p.beta;
  if (!(std::abs(den) > 0) || !std::isfinite(std::abs(den))) throw NumericError("Psi: vanishing denominator");
  return it * p.root * p.e2 / den;
}

// int_T^inf y^p exp(-2 kappa sqrt y) dy = 2 Gamma(2p+2, 2 kappa sqrt T) / (2 kappa)^{2p+2}.
inline double tail_integral(double kappa, double p, double T) {
  const double a = 2 * p + 2;
  return 2 * boost::math::tgamma(a, 2 * kappa * std::sqrt(T)) / std::pow(2 * kappa, a);
}

// Integrand magnitude on the contour is bounded by M |y|^p exp(-2 kappa
// sqrt|y|) e^{-c} for large |y| (Re sqrt(-2s) >= sqrt|y| there).
inline double tail_bound(double kappa, double p, double M, double c, double T) {
  return 2 * std::sqrt(2 / std::numbers::pi) * std::exp(-c) * M * tail_integral(kappa, p, T);
}

// sqrt(2/pi) int_{-T}^{T} f(c+iy) e^{-(c+iy)} dy by composite 16-point
// Gauss-Legendre; T from the tail bound unless q fixes it.
template <class F>
ContourResult contour_integral(F&& f, const LocalTimeQuery& q, double decay_kappa, double p, double M) {
  check_contour(q);
  const double c = q.contour_abscissa;
  const double w = q.panel_width;
  double T = q.truncation;
  if (T == 0) {
    T = w;
    while (tail_bound(decay_kappa, p, M, c, T) > q.quad_tol / 10) {
      T *= 1.25;
      if (T > kMaxHalfLength) throw NumericError("contour truncation exceeds limit; kappa too small for quad_tol");
    }
  }
  const auto panels = static_cast<std::size_t>(std::ceil(2 * T / w));
  T = panels * w / 2;
  ContourResult out;
  out.half_length = T;
  out.truncation_error = tail_bound(decay_kappa, p, M, c, T);
  if (q.truncation != 0 && out.truncation_error > q.quad_tol)
    throw NumericError("estimated truncation error " + std::to_string(out.truncation_error) +
                       " exceeds quad_tol; increase the truncation T");
  using Rule = boost::math::quadrature::gauss<double, 16>;
  Complex acc = 0;
  for (std::size_t k = 0; k < panels; ++k) {
    const double a = -T + k * w;
    const double mid = a + w / 2;
    const auto& x = Rule::abscissa();
    const auto& wt = Rule::weights();
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (int sign : {-1, 1}) {
        const double y = mid + sign * x[i] * w / 2;
        const Complex s(c, y);
        acc += wt[i] * f(s) * std::exp(-s);
        ++out.evaluations;
        if (x[i] == 0) break;
      }
    }
  }
  out.value = std::sqrt(2 / std::numbers::pi) * acc * (w / 2);
  return out;
}

}  // namespace detail

// Psi_kappa(s,t) = i t sqrt(-s) e^{-kappa sqrt(-2s)} /
//                  (sqrt(-s) e^{kappa sqrt(-2s)} - i t sqrt2 sinh(kappa sqrt(-2s))),
// evaluated in the overflow-free form with E = e^{-kappa sqrt(-2s)}.
inline Complex psi(double kappa, Complex s, Complex t) {
  return detail::psi_from_parts(detail::psi_parts(kappa, s), t);
}

inline ContourResult local_time_cf_detailed(double kappa, double t, const LocalTimeQuery& q) {
  if (!(kappa > 0)) throw std::invalid_argument("kappa must be positive");
  if (t == 0) return {Complex(1, 0), 0.0, 0.0, 0};
  ContourResult r =
      detail::contour_integral([&](Complex s) { return psi(kappa, s, t); }, q, kappa, 0.0, 2 * std::abs(t) + 1);
  r.value += 1.0;
  return r;
}

// CF of the total local time at level kappa of the standard excursion.
inline Complex local_time_cf(double kappa, double t, const LocalTimeQuery& q = {}) {
  return local_time_cf_detailed(kappa, t, q).value;
}

// Joint CF at q.levels / q.args with the nested integrand
// Psi_{k1}(s, t1 + Psi_{k2-k1}(s, t2 + Psi_{k3-k2}(s, t3)) / i) ... .
// In u = i t, Psi is the Moebius map g_k(u) = u R E_k^2 / (R - u beta_k), and
// g_a(g_b(u)) = g_{a+b}(u); the 1/i keeps the nesting in that variable, so
// any t_j = 0 removes level j exactly.
inline ContourResult joint_local_time_cf_detailed(const LocalTimeQuery& q) {
  const std::size_t d = q.levels.size();
  if (d == 0 || d > detail::kMaxJointLevels) throw std::invalid_argument("joint CF supports 1 to 3 levels");
  if (q.args.size() != d) throw std::invalid_argument("levels and args differ in length");
  if (!(q.levels[0] > 0)) throw std::invalid_argument("levels must be positive");
  for (std::size_t j = 1; j < d; ++j)
    if (!(q.levels[j] > q.levels[j - 1])) throw std::invalid_argument("levels must be strictly increasing");
  double t_abs = 0;
  for (double t : q.args) t_abs += std::abs(t);
  if (t_abs == 0) return {Complex(1, 0), 0.0, 0.0, 0};
  auto f = [&](Complex s) {
    Complex inner = 0;
    for (std::size_t j = d; j-- > 0;) {
      const double gap = j == 0 ? q.levels[0] : q.levels[j] - q.levels[j - 1];
      inner = psi(gap, s, q.args[j] + (q.literal_nesting ? inner : inner / Complex(0, 1)));
    }
    return inner;
  };
  ContourResult r = detail::contour_integral(f, q, q.levels[0], 0.0, 4 * t_abs + 1);
  r.value += 1.0;
  return r;
}

inline Complex joint_local_time_cf(const LocalTimeQuery& q) { return joint_local_time_cf_detailed(q).value; }

// P(l(kappa) = 0) = P(excursion max < kappa), the t -> infinity limit of
// the CF: Psi(s, inf) = -sqrt(-s) E^2 / beta.
inline ContourResult local_time_atom_detailed(double kappa, const LocalTimeQuery& q = {}) {
  if (!(kappa > 0)) throw std::invalid_argument("kappa must be positive");
  ContourResult r = detail::contour_integral(
      [&](Complex s) {
        const auto p = detail::psi_parts(kappa, s);
        return -p.root * p.e2 / p.beta;
      },
      q, kappa, 0.5, 2.0);
  r.value += 1.0;
  return r;
}

struct LocalTimeDensity {
  double atom = 0;
  std::vector<double> grid;
  std::vector<double> density;
  double grid_mass = 0;  // trapezoid integral of the density over the grid
  double tail_mass = 0;  // exact mass beyond the last grid point
  double total_mass() const { return atom + grid_mass + tail_mass; }
};

namespace detail {

// For fixed s, Psi(s,t) - Psi(s,inf) = (-s) E^2 / beta^2 * 1/(lambda - i t)
// with lambda = sqrt(-s)/beta, whose inverse Fourier transform is
// e^{-lambda x} on x > 0 when Re lambda > 0. Integrating over the contour
// gives the density, and (with an extra 1/lambda) the mass beyond x.
inline Complex density_kernel(double kappa, Complex s, double x, bool tail) {
  const auto p = psi_parts(kappa, s);
  const Complex lambda = p.root / p.beta;
  if (!(lambda.real() > 0)) throw NumericError("density inversion: Re lambda <= 0 on the contour");
  Complex v = -s * p.e2 / (p.beta * p.beta) * std::exp(-lambda * x);
  if (tail) v /= lambda;
  return v;
}

}  // namespace detail

// Density of l(kappa) at a single x > 0, without the mass-closure check.
inline double local_time_density_at(double kappa, double x, const LocalTimeQuery& q = {}) {
  if (!(kappa > 0)) throw std::invalid_argument("kappa must be positive");
  if (!(x >= 0)) throw std::invalid_argument("density point must be x >= 0");
  return detail::contour_integral([&](Complex s) { return detail::density_kernel(kappa, s, x, false); }, q, kappa, 1.0,
                                  4.0)
      .value.real();
}

// Law of l(kappa): the atom at 0 and the density on `grid` (nondecreasing,
// starting at or above 0). Fails if atom + mass on the grid + exact tail
// mass misses 1 by more than mass_tol (grid too coarse).
inline LocalTimeDensity local_time_density(double kappa, const std::vector<double>& grid, const LocalTimeQuery& q = {},
                                           double mass_tol = 1e-3) {
  if (!(kappa > 0)) throw std::invalid_argument("kappa must be positive");
  if (grid.empty() || !(grid.front() >= 0)) throw std::invalid_argument("density grid must start at x >= 0");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] >= grid[i - 1])) throw std::invalid_argument("density grid must be nondecreasing");
  LocalTimeDensity out;
  out.grid = grid;
  out.atom = local_time_atom_detailed(kappa, q).value.real();
  for (double x : grid) {
    const auto r = detail::contour_integral([&](Complex s) { return detail::density_kernel(kappa, s, x, false); }, q,
                                            kappa, 1.0, 4.0);
    out.density.push_back(r.value.real());
  }
  for (std::size_t i = 1; i < grid.size(); ++i)
    out.grid_mass += 0.5 * (grid[i] - grid[i - 1]) * (out.density[i] + out.density[i - 1]);
  const double head = grid.front();
  const auto mass_beyond = [&](double x) {
    return detail::contour_integral([&](Complex s) { return detail::density_kernel(kappa, s, x, true); }, q, kappa, 0.5,
                                    4.0)
        .value.real();
  };
  out.tail_mass = mass_beyond(grid.back()) + (head > 0 ? 1 - out.atom - mass_beyond(head) : 0.0);
  if (std::abs(out.total_mass() - 1) > mass_tol)
    throw NumericError("local_time_density: mass " + std::to_string(out.total_mass()) +
                       " misses 1 beyond tolerance; refine the grid");
  return out;
}

// Scalings between tree profiles/heights and the excursion.
struct ScalingConstants {
  double amp_scale = 0;     // b sqrt(rho) / (2 sqrt 2)
  double time_scale = 0;    // same value
  double height_scale = 0;  // 2 sqrt(pi) / (b sqrt(rho))
  double b_sqrt_rho = 0;
};

inline ScalingConstants scaling_constants(const SingularityData& data) {
  if (!(data.rho > 0 && data.b > 0)) throw std::invalid_argument("scaling_constants: constants not computed");
  ScalingConstants sc;
  sc.b_sqrt_rho = data.b * std::sqrt(data.rho);
  sc.amp_scale = sc.b_sqrt_rho / (2 * std::numbers::sqrt2);
  sc.time_scale = sc.amp_scale;
  sc.height_scale = 2 * std::sqrt(std::numbers::pi) / sc.b_sqrt_rho;
  return sc;
}

// Limit CF of l_n(kappa) = L_n(kappa sqrt n)/sqrt n.
inline Complex limit_profile_cf(double kappa, double t, const ScalingConstants& sc, const LocalTimeQuery& q = {}) {
  return local_time_cf(sc.time_scale * kappa, sc.amp_scale * t, q);
}

// E l(kappa) = 4 kappa e^{-2 kappa^2}.
inline double local_time_mean(double kappa) { return 4 * kappa * std::exp(-2 * kappa * kappa); }

// E l(kappa)^2 = -phi''(0), from the CF by a Richardson-extrapolated
// central difference. Step 0.05 keeps both the O(h^4) term and the
// quadrature noise (quad_tol / h^2) near 1e-7.
inline double local_time_second_moment(double kappa, const LocalTimeQuery& q = {}) {
  const auto d2 = [&](double h) { return 2 * (1 - local_time_cf(kappa, h, q).real()) / (h * h); };
  constexpr double h = 0.05;
  return (4 * d2(h / 2) - d2(h)) / 3;
}

// Limit mean and second moment of l_n(kappa), i.e. of a l(a kappa).
inline double limit_profile_mean(double kappa, const ScalingConstants& sc) {
  return sc.amp_scale * local_time_mean(sc.time_scale * kappa);
}

inline double limit_profile_second_moment(double kappa, const ScalingConstants& sc, const LocalTimeQuery& q = {}) {
  return sc.amp_scale * sc.amp_scale * local_time_second_moment(sc.time_scale * kappa, q);
}

// Leading-order E H_n^r.
inline double height_moment_asym(unsigned r, std::size_t n, const ScalingConstants& sc) {
  if (r < 1) throw std::invalid_argument("height moment order must be >= 1");
  const double rn = std::sqrt(static_cast<double>(n));
  if (r == 1) return sc.height_scale * rn;
  const double rr = r;
  return std::pow(2 / sc.b_sqrt_rho, rr) * rr * (rr - 1) * std::tgamma(rr / 2) * boost::math::zeta(rr) *
         std::pow(rn, rr);
}

// Theta-sum approximation of P(H_n = h):
// 2 b sqrt(rho pi^5 / n) beta^4 sum_m m^2 (2 m^2 pi^2 beta^2 - 3) e^{-m^2 pi^2 beta^2},
// beta = 2 sqrt n / (h b sqrt rho). This is the density of a max/amp_scale,
// a the excursion maximum, at h/sqrt n. The form printed with prefactor 4b
// has total mass 2; height_llt_printed returns it.
inline double height_llt(std::size_t n, std::size_t h, const ScalingConstants& sc) {
  if (h < 1) throw std::invalid_argument("height_llt needs h >= 1");
  const double rn = std::sqrt(static_cast<double>(n));
  const double beta = 2 * rn / (static_cast<double>(h) * sc.b_sqrt_rho);
  const double pb2 = std::numbers::pi * std::numbers::pi * beta * beta;
  double sum = 0;
  for (int m = 1;; ++m) {
    const double m2 = static_cast<double>(m) * m;
    const double term = m2 * (2 * m2 * pb2 - 3) * std::exp(-m2 * pb2);
    sum += term;
    if (std::abs(term) < 1e-16 && m2 * pb2 > 3) break;
  }
  const double pi5 = std::pow(std::numbers::pi, 5);
  // b sqrt(rho pi^5 / n) = (b sqrt rho) sqrt(pi^5) / sqrt n
  return 2 * sc.b_sqrt_rho * std::sqrt(pi5) / rn * std::pow(beta, 4) * sum;
}

inline double height_llt_printed(std::size_t n, std::size_t h, const ScalingConstants& sc) {
  return 2 * height_llt(n, h, sc);
}

}  // namespace polya
