#pragma once

// Experiment harness behind the polya_lab CLI: one run_* function per
// command, each returning a Report. Monte Carlo work is split into fixed
// blocks with their own sub-streams and merged in block order, so results
// do not depend on the worker count.

#include "polya/constants.hpp"
#include "polya/enumeration.hpp"
#include "polya/local_time.hpp"
#include "polya/random.hpp"
#include "polya/report.hpp"
#include "polya/sampler.hpp"
#include "polya/tree.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace polya {

enum class Command { count, witness, constants, height_dist, profile_dist, joint_dist, tightness, sample, montecarlo, loctime };

inline const std::vector<std::pair<Command, std::string>>& command_names() {
  static const std::vector<std::pair<Command, std::string>> names = {
      {Command::count, "count"},           {Command::witness, "witness"},       {Command::constants, "constants"},
      {Command::height_dist, "height-dist"}, {Command::profile_dist, "profile-dist"}, {Command::joint_dist, "joint-dist"},
      {Command::tightness, "tightness"},   {Command::sample, "sample"},         {Command::montecarlo, "montecarlo"},
      {Command::loctime, "loctime"}};
  return names;
}

inline std::string command_name(Command c) {
  for (const auto& [k, v] : command_names())
    if (k == c) return v;
  throw std::logic_error("unknown command");
}

inline Command parse_command(const std::string& s) {
  for (const auto& [k, v] : command_names())
    if (v == s) return k;
  throw std::invalid_argument("unknown command '" + s + "'");
}

inline std::string format_name(Format f) { return f == Format::csv ? "csv" : "json"; }

inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw std::invalid_argument("unknown format '" + s + "' (csv or json)");
}

// Caps on exact enumeration sizes.
struct Budgets {
  static constexpr std::size_t count = 2000;
  static constexpr std::size_t height = 500;
  static constexpr std::size_t level = 200;
  static constexpr std::size_t joint = 60;
};

struct ExperimentConfig {
  Command command = Command::count;
  std::vector<std::size_t> n;       // size, or size grid for height-dist / tightness
  std::optional<std::size_t> k;     // level: profile-dist; montecarlo pmf check
  std::vector<std::size_t> depths;  // joint-dist
  std::vector<std::size_t> r, h;    // tightness grid
  std::vector<double> kappa, t, x;  // montecarlo, loctime, profile-dist CF
  bool density = false;             // loctime: law of l(kappa) on the x grid
  bool joint = false;               // loctime: joint CF, levels = kappa, args = t
  bool tree_scale = false;          // loctime: kappa, t in tree units (limit of l_n)
  std::size_t order = 0;            // witness / constants series order, 0 = default
  double tol = 1e-12;               // constants
  double quad_tol = 1e-10;
  double contour_abscissa = -1;
  double truncation = 0;
  double panel_width = 1;
  std::size_t bins = 30;  // montecarlo histogram on [0, hist_max)
  double hist_max = 3.0;
  bool stats = false;  // sample: summary statistics instead of trees
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::size_t threads = 1;
  std::string out;
  std::string svg;
  Format format = Format::csv;
  bool allow_large = false;  // exceed enumeration budgets (with a warning)

  LocalTimeQuery query() const {
    LocalTimeQuery q;
    q.quad_tol = quad_tol;
    q.contour_abscissa = contour_abscissa;
    q.truncation = truncation;
    q.panel_width = panel_width;
    return q;
  }
};

inline Json to_json(const ExperimentConfig& c) {
  Json j;
  j["command"] = command_name(c.command);
  j["n"] = c.n;
  j["k"] = c.k ? Json(*c.k) : Json(nullptr);
  j["depths"] = c.depths;
  j["r"] = c.r;
  j["h"] = c.h;
  j["kappa"] = c.kappa;
  j["t"] = c.t;
  j["x"] = c.x;
  j["density"] = c.density;
  j["joint"] = c.joint;
  j["tree_scale"] = c.tree_scale;
  j["order"] = c.order;
  j["tol"] = c.tol;
  j["quad_tol"] = c.quad_tol;
  j["contour_abscissa"] = c.contour_abscissa;
  j["truncation"] = c.truncation;
  j["panel_width"] = c.panel_width;
  j["bins"] = c.bins;
  j["hist_max"] = c.hist_max;
  j["stats"] = c.stats;
  j["seed"] = c.seed;
  j["trials"] = c.trials;
  j["threads"] = c.threads;
  j["out"] = c.out;
  j["svg"] = c.svg;
  j["format"] = format_name(c.format);
  j["allow_large"] = c.allow_large;
  return j;
}

// Inverse of to_json; missing keys keep their defaults.
inline ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig c;
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  c.command = parse_command(j.at("command").get<std::string>());
  const auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("n", c.n);
  if (j.contains("k") && !j.at("k").is_null()) c.k = j.at("k").get<std::size_t>();
  get("depths", c.depths);
  get("r", c.r);
  get("h", c.h);
  get("kappa", c.kappa);
  get("t", c.t);
  get("x", c.x);
  get("density", c.density);
  get("joint", c.joint);
  get("tree_scale", c.tree_scale);
  get("order", c.order);
  get("tol", c.tol);
  get("quad_tol", c.quad_tol);
  get("contour_abscissa", c.contour_abscissa);
  get("truncation", c.truncation);
  get("panel_width", c.panel_width);
  get("bins", c.bins);
  get("hist_max", c.hist_max);
  get("stats", c.stats);
  get("seed", c.seed);
  get("trials", c.trials);
  get("threads", c.threads);
  get("out", c.out);
  get("svg", c.svg);
  get("allow_large", c.allow_large);
  if (j.contains("format")) c.format = parse_format(j.at("format").get<std::string>());
  return c;
}

class BudgetError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline Json exact(const BigInt& v) { return to_decimal(v); }
inline Json exact(const Rational& v) { return to_decimal(v); }

inline void check_budget(std::size_t value, std::size_t cap, const std::string& what, const ExperimentConfig& cfg,
                         std::vector<std::string>& warnings) {
  if (value <= cap) return;
  if (!cfg.allow_large)
    throw BudgetError(what + " n=" + std::to_string(value) + " exceeds the budget " + std::to_string(cap) +
                      "; pass --allow-large to override");
  warnings.push_back(what + " n=" + std::to_string(value) + " exceeds the budget " + std::to_string(cap) +
                     "; running anyway");
}

inline std::size_t single_n(const ExperimentConfig& cfg, const char* cmd) {
  if (cfg.n.size() != 1) throw std::invalid_argument(std::string(cmd) + ": exactly one size n required");
  if (cfg.n[0] < 1) throw std::invalid_argument(std::string(cmd) + ": n must be positive");
  return cfg.n[0];
}

inline const ScalingConstants& default_scaling() {
  static const ScalingConstants sc = scaling_constants(compute_constants());
  return sc;
}

// Runs fn(b) for b = 0..blocks-1 on up to `threads` workers; results come
// back indexed by block, so merge order never depends on scheduling.
template <class Block, class Fn>
std::vector<Block> run_blocks(std::size_t blocks, std::size_t threads, Fn&& fn) {
  std::vector<Block> out(blocks);
  threads = std::max<std::size_t>(1, std::min(threads, blocks));
  if (threads == 1) {
    for (std::size_t b = 0; b < blocks; ++b) out[b] = fn(b);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t b = next.fetch_add(1);
        if (b >= blocks) return;
        try {
          out[b] = fn(b);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(blocks);
          return;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

inline constexpr std::size_t kBlockSize = 1000;

inline double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
  double acc = 0;
  const std::size_t m = std::max(p.size(), q.size());
  for (std::size_t i = 0; i < m; ++i) acc += std::abs((i < p.size() ? p[i] : 0.0) - (i < q.size() ? q[i] : 0.0));
  return acc / 2;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// count, witness, constants

inline Report run_count(const ExperimentConfig& cfg) {
  Report rep;
  const std::size_t n = detail::single_n(cfg, "count");
  detail::check_budget(n, Budgets::count, "count", cfg, rep.warnings);
  const TreeCountTable counts = build_tree_counts(n);
  const SingularityData data = compute_constants();
  Table t{"counts", {"n", "trees", "asymptotic_ratio"}, {}};
  for (std::size_t m = 1; m <= n; ++m) t.add({m, detail::exact(counts[m]), count_ratio(counts[m], m, data)});
  rep.tables.push_back(std::move(t));
  rep.summary = {{"n", n}, {"trees", detail::exact(counts[n])}, {"digits", to_decimal(counts[n]).size()}};
  return rep;
}

inline Report run_witness(const ExperimentConfig& cfg) {
  Report rep;
  const std::size_t order = cfg.order ? cfg.order : 10;
  const auto w = simply_generated_witness(order);
  Table t{"phi", {"k", "coefficient"}, {}};
  for (std::size_t k = 0; k <= w.phi.order(); ++k) t.add({k, detail::exact(w.phi[k])});
  rep.tables.push_back(std::move(t));
  rep.summary = {{"order", order}, {"first_negative", w.first_negative ? Json(*w.first_negative) : Json(nullptr)}};
  return rep;
}

inline Report run_constants(const ExperimentConfig& cfg) {
  Report rep;
  const std::size_t order = cfg.order ? cfg.order : 120;
  const SingularityData d = compute_constants(order, cfg.tol);
  rep.summary = {{"rho", d.rho},           {"b", d.b},
                 {"c", d.c},               {"residual", d.residual},
                 {"N", d.series_order},    {"b_fit", d.b_fit},
                 {"c_fit", d.c_fit},       {"fit_rms", d.fit_rms},
                 {"iterations", d.iterations}, {"tail_cutoff", d.tail_cutoff},
                 {"prefactor", asymptotic_prefactor(d)}};
  Table t{"constants", {"name", "value"}, {}};
  for (const auto& [key, value] : rep.summary.items()) t.add({key, value});
  rep.tables.push_back(std::move(t));
  return rep;
}

// ---------------------------------------------------------------------------
// Height

struct HeightLltComparison {
  double tv = 0;    // total variation between exact pmf and the theta sum
  double mass = 0;  // total mass of the theta sum
};

inline HeightLltComparison compare_height_llt(const HeightDistribution& dist, const ScalingConstants& sc) {
  const std::size_t n = dist.size();
  const double peak = sc.height_scale * std::sqrt(static_cast<double>(n));
  HeightLltComparison out;
  double diff = 0;
  for (std::size_t h = 0;; ++h) {
    const double q = h == 0 ? 0.0 : height_llt(n, h, sc);
    const double p = h < n ? to_double(dist.probability(h)) : 0.0;
    diff += std::abs(p - q);
    out.mass += q;
    if (h + 1 >= n && h > 3 * peak && q < 1e-17) break;
  }
  out.tv = diff / 2;
  return out;
}

// Exact E H_n, E H_n^2 against the leading-order asymptotics, plus the
// exact pmf against the theta sum, for every n in the grid.
inline Report run_height_experiment(const ExperimentConfig& cfg) {
  Report rep;
  if (cfg.n.empty()) throw std::invalid_argument("height-dist: at least one size n required");
  std::size_t max_n = 0;
  for (auto v : cfg.n) {
    if (v < 1) throw std::invalid_argument("height-dist: n must be positive");
    max_n = std::max(max_n, v);
  }
  detail::check_budget(max_n, Budgets::height, "height-dist", cfg, rep.warnings);
  const HeightTable table(max_n);
  const ScalingConstants& sc = detail::default_scaling();
  Table t{"height",
          {"n", "mean_exact", "mean", "mean_over_sqrt_n", "mean_asymptotic", "ratio", "second_moment_exact",
           "second_moment", "second_moment_asymptotic", "second_ratio", "tv_llt", "llt_mass", "llt_printed_mass"},
          {}};
  PlotSeries exact_pts{"E H_n / sqrt n", {}, {}, true, "#1f77b4"};
  for (std::size_t n : cfg.n) {
    const HeightDistribution dist = height_distribution(n, table);
    const Rational m1 = dist.mean(), m2 = dist.moment(2);
    const double a1 = height_moment_asym(1, n, sc), a2 = height_moment_asym(2, n, sc);
    const auto llt = compare_height_llt(dist, sc);
    const double rn = std::sqrt(static_cast<double>(n));
    t.add({n, detail::exact(m1), to_double(m1), to_double(m1) / rn, a1, to_double(m1) / a1, detail::exact(m2),
           to_double(m2), a2, to_double(m2) / a2, llt.tv, llt.mass, 2 * llt.mass});
    exact_pts.x.push_back(static_cast<double>(n));
    exact_pts.y.push_back(to_double(m1) / rn);
  }
  rep.tables.push_back(std::move(t));
  if (cfg.n.size() == 1) {
    const std::size_t n = cfg.n[0];
    const HeightDistribution dist = height_distribution(n, table);
    Table p{"pmf", {"h", "numerator", "denominator", "probability", "llt"}, {}};
    for (std::size_t h = 0; h < n; ++h) {
      const Rational& q = dist.pmf()[h];
      p.add({h, detail::exact(BigInt(q.get_num())), detail::exact(BigInt(q.get_den())), to_double(q),
             h == 0 ? 0.0 : height_llt(n, h, sc)});
    }
    rep.tables.push_back(std::move(p));
  }
  rep.summary = {{"height_scale", sc.height_scale}};
  if (!cfg.svg.empty()) {
    PlotSeries limit{"limit 2 sqrt(pi)/(b sqrt(rho))", {}, {}, false, "#d62728"};
    if (!exact_pts.x.empty()) {
      limit.x = {exact_pts.x.front(), exact_pts.x.back()};
      limit.y = {sc.height_scale, sc.height_scale};
    }
    write_text_file(cfg.svg, svg_plot("Mean height", "n", "E H_n / sqrt n", {exact_pts, limit}));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Level distributions

namespace detail {

inline Table pmf_table(const LevelDistribution& dist) {
  Table t{"pmf", {}, {}};
  const std::size_t d = dist.depths().size();
  for (std::size_t j = 0; j < d; ++j) t.columns.push_back(d == 1 ? "m" : "m" + std::to_string(j + 1));
  for (const char* c : {"numerator", "denominator", "probability"}) t.columns.push_back(c);
  for (const auto& [m, p] : dist.pmf()) {
    std::vector<Json> row(m.begin(), m.end());
    row.push_back(exact(BigInt(p.get_num())));
    row.push_back(exact(BigInt(p.get_den())));
    row.push_back(to_double(p));
    t.add(std::move(row));
  }
  return t;
}

}  // namespace detail

inline Report run_profile_distribution(const ExperimentConfig& cfg) {
  Report rep;
  const std::size_t n = detail::single_n(cfg, "profile-dist");
  if (!cfg.k) throw std::invalid_argument("profile-dist: level k required");
  detail::check_budget(n, Budgets::level, "profile-dist", cfg, rep.warnings);
  const LevelDistribution dist = level_size_distribution(n, *cfg.k);
  rep.tables.push_back(detail::pmf_table(dist));
  Rational mean = 0, second = 0;
  for (const auto& [m, p] : dist.pmf()) {
    const Rational v(static_cast<long>(m[0]));
    mean += p * v;
    second += p * v * v;
  }
  const Rational var = second - mean * mean;
  rep.summary = {{"n", n},
                 {"k", *cfg.k},
                 {"mean_exact", detail::exact(mean)},
                 {"mean", to_double(mean)},
                 {"variance_exact", detail::exact(var)},
                 {"variance", to_double(var)}};
  if (!cfg.t.empty()) {
    // CF of l_n = L_n(k)/sqrt n next to the limit at kappa = k/sqrt n.
    const ScalingConstants& sc = detail::default_scaling();
    const double rn = std::sqrt(static_cast<double>(n));
    const double kappa = static_cast<double>(*cfg.k) / rn;
    Table t{"cf", {"t", "re", "im", "limit_re", "limit_im", "abs_diff"}, {}};
    for (double tv : cfg.t) {
      const Complex e = dist.characteristic_function({tv}, 1 / rn);
      const Complex l = limit_profile_cf(kappa, tv, sc, cfg.query());
      t.add({tv, e.real(), e.imag(), l.real(), l.imag(), std::abs(e - l)});
    }
    rep.tables.push_back(std::move(t));
    rep.summary["kappa"] = kappa;
  }
  return rep;
}

inline Report run_joint_distribution(const ExperimentConfig& cfg) {
  Report rep;
  const std::size_t n = detail::single_n(cfg, "joint-dist");
  if (cfg.depths.empty()) throw std::invalid_argument("joint-dist: depths required");
  detail::check_budget(n, Budgets::joint, "joint-dist", cfg, rep.warnings);
  const LevelDistribution dist = joint_level_distribution(n, cfg.depths);
  rep.tables.push_back(detail::pmf_table(dist));
  rep.summary = {{"n", n}, {"depths", cfg.depths}, {"support", dist.pmf().size()}};
  return rep;
}

// ---------------------------------------------------------------------------
// Tightness: E (L_n(r) - L_n(r+h))^4 / (h^2 n) over a grid.

inline Report run_tightness_scan(const ExperimentConfig& cfg) {
  Report rep;
  auto range = [](std::size_t lo, std::size_t hi) {
    std::vector<std::size_t> v;
    for (std::size_t i = lo; i <= hi; ++i) v.push_back(i);
    return v;
  };
  const std::vector<std::size_t> ns = cfg.n.empty() ? range(20, 60) : cfg.n;
  const std::vector<std::size_t> rs = cfg.r.empty() ? range(0, 10) : cfg.r;
  const std::vector<std::size_t> hs = cfg.h.empty() ? range(1, 10) : cfg.h;
  std::size_t max_n = 0, max_r = 0;
  for (auto v : ns) {
    if (v < 1) throw std::invalid_argument("tightness: n must be positive");
    max_n = std::max(max_n, v);
  }
  for (auto v : rs) max_r = std::max(max_r, v);
  for (auto v : hs)
    if (v < 1) throw std::invalid_argument("tightness: h must be positive");
  detail::check_budget(max_n, Budgets::joint, "tightness", cfg, rep.warnings);

  const TreeCountTable counts = build_tree_counts(max_n);
  // moment[h index][r index][n index]
  std::vector<std::vector<std::vector<Rational>>> moment(hs.size(), std::vector<std::vector<Rational>>(rs.size()));
  std::size_t checked = 0;
  for (std::size_t hi = 0; hi < hs.size(); ++hi) {
    const auto op = level_diff_fourth_moment_table(max_n, hs[hi], max_r);
    for (std::size_t ri = 0; ri < rs.size(); ++ri) {
      // Primary route: the joint pmf of (L(r), L(r+h)), one series for all n.
      const LevelSeries series = joint_level_series({rs[ri], rs[ri] + hs[hi]}, max_n);
      for (std::size_t n : ns) {
        BigInt acc = 0;
        series.for_each_term(n, [&](const Marks& m, const BigInt& v) {
          const long diff = static_cast<long>(m[0]) - static_cast<long>(m[1]);
          acc += v * BigInt(diff * diff * diff * diff);
        });
        Rational value(acc, counts[n]);
        value.canonicalize();
        if (value != op[rs[ri]][n])
          throw NumericError("tightness: pmf and operator routes disagree at n=" + std::to_string(n) +
                             " r=" + std::to_string(rs[ri]) + " h=" + std::to_string(hs[hi]));
        ++checked;
        moment[hi][ri].push_back(std::move(value));
      }
    }
  }

  Table t{"moments", {"n", "r", "h", "moment_exact", "moment", "ratio"}, {}};
  Table g{"grid_max", {"n", "max_ratio", "argmax_r", "argmax_h"}, {}};
  double lo = INFINITY, hi_max = 0;
  for (std::size_t ni = 0; ni < ns.size(); ++ni) {
    const std::size_t n = ns[ni];
    double best = -1;
    std::size_t br = 0, bh = 0;
    for (std::size_t ri = 0; ri < rs.size(); ++ri)
      for (std::size_t hi = 0; hi < hs.size(); ++hi) {
        const Rational& m = moment[hi][ri][ni];
        const double ratio = to_double(m) / (static_cast<double>(hs[hi] * hs[hi]) * static_cast<double>(n));
        t.add({n, rs[ri], hs[hi], detail::exact(m), to_double(m), ratio});
        if (ratio > best) {
          best = ratio;
          br = rs[ri];
          bh = hs[hi];
        }
      }
    g.add({n, best, br, bh});
    lo = std::min(lo, best);
    hi_max = std::max(hi_max, best);
  }
  rep.tables.push_back(std::move(t));
  rep.tables.push_back(std::move(g));
  rep.summary = {{"max_ratio", hi_max},
                 {"min_grid_max", lo},
                 {"grid_max_spread", lo > 0 ? hi_max / lo : INFINITY},
                 {"operator_crosscheck_points", checked}};
  return rep;
}

// ---------------------------------------------------------------------------
// Sampling

inline Report run_sample(const ExperimentConfig& cfg) {
  Report rep;
  const std::size_t n = detail::single_n(cfg, "sample");
  if (cfg.trials < 1) throw std::invalid_argument("sample: count must be at least 1");
  const TreeSampler sampler(n);
  const std::size_t blocks = (cfg.trials + detail::kBlockSize - 1) / detail::kBlockSize;
  const auto block_len = [&](std::size_t b) { return std::min(detail::kBlockSize, cfg.trials - b * detail::kBlockSize); };

  if (!cfg.stats) {
    const auto trees = detail::run_blocks<std::vector<std::string>>(blocks, cfg.threads, [&](std::size_t b) {
      Rng rng = substream(cfg.seed, b);
      std::vector<std::string> out;
      for (std::size_t i = 0; i < block_len(b); ++i) out.push_back(sampler.sample(n, rng).encoding());
      return out;
    });
    Table t{"trees", {"tree"}, {}};
    for (const auto& blk : trees)
      for (const auto& s : blk) t.add({s});
    rep.tables.push_back(std::move(t));
  } else {
    // height, root degree, leaves, width
    constexpr std::size_t kStats = 4;
    struct Acc {
      std::array<double, kStats> sum{}, sum2{}, lo{}, hi{};
    };
    const auto acc = detail::run_blocks<Acc>(blocks, cfg.threads, [&](std::size_t b) {
      Rng rng = substream(cfg.seed, b);
      Acc a;
      a.lo.fill(INFINITY);
      a.hi.fill(-INFINITY);
      for (std::size_t i = 0; i < block_len(b); ++i) {
        const CanonicalTree tree = sampler.sample(n, rng);
        const auto& seq = tree.level_sequence();
        const ProfileVector p = profile(tree);
        std::size_t leaves = 0;
        for (std::size_t j = 0; j < seq.size(); ++j) leaves += (j + 1 == seq.size() || seq[j + 1] <= seq[j]);
        const std::array<double, kStats> v{static_cast<double>(p.height()), static_cast<double>(p.level(1)),
                                           static_cast<double>(leaves),
                                           static_cast<double>(*std::max_element(p.levels.begin(), p.levels.end()))};
        for (std::size_t s = 0; s < kStats; ++s) {
          a.sum[s] += v[s];
          a.sum2[s] += v[s] * v[s];
          a.lo[s] = std::min(a.lo[s], v[s]);
          a.hi[s] = std::max(a.hi[s], v[s]);
        }
      }
      return a;
    });
    Acc total;
    total.lo.fill(INFINITY);
    total.hi.fill(-INFINITY);
    for (const auto& a : acc)
      for (std::size_t s = 0; s < kStats; ++s) {
        total.sum[s] += a.sum[s];
        total.sum2[s] += a.sum2[s];
        total.lo[s] = std::min(total.lo[s], a.lo[s]);
        total.hi[s] = std::max(total.hi[s], a.hi[s]);
      }
    const double N = static_cast<double>(cfg.trials);
    const char* names[kStats] = {"height", "root_degree", "leaves", "width"};
    Table t{"stats", {"statistic", "mean", "variance", "std_error", "min", "max"}, {}};
    for (std::size_t s = 0; s < kStats; ++s) {
      const double mean = total.sum[s] / N;
      const double var = N > 1 ? (total.sum2[s] - N * mean * mean) / (N - 1) : 0.0;
      t.add({names[s], mean, var, std::sqrt(std::max(var, 0.0) / N), total.lo[s], total.hi[s]});
    }
    rep.tables.push_back(std::move(t));
  }
  const SamplerStats st = sampler.stats();
  rep.summary = {{"n", n},
                 {"count", cfg.trials},
                 {"draws", st.draws},
                 {"quad_fallbacks", st.quad_fallbacks},
                 {"exact_fallbacks", st.exact_fallbacks}};
  return rep;
}

// ---------------------------------------------------------------------------
// Monte Carlo profile against the limit law

inline Report run_montecarlo_profile(const ExperimentConfig& cfg) {
  Report rep;
  const std::size_t n = detail::single_n(cfg, "montecarlo");
  if (cfg.trials < 1) throw std::invalid_argument("montecarlo: trials must be at least 1");
  if (cfg.bins < 1 || !(cfg.hist_max > 0)) throw std::invalid_argument("montecarlo: histogram needs bins >= 1 and hist_max > 0");
  const std::vector<double> kappas = cfg.kappa.empty() ? std::vector<double>{0.7} : cfg.kappa;
  const std::vector<double> ts = cfg.t.empty() ? std::vector<double>{1.0} : cfg.t;
  for (double k : kappas)
    if (!(k > 0)) throw std::invalid_argument("montecarlo: kappa must be positive");
  const std::size_t K = kappas.size(), T = ts.size(), B = cfg.bins;
  const double rn = std::sqrt(static_cast<double>(n));
  const TreeSampler sampler(n);

  struct Acc {
    std::vector<double> sum, sum2;         // per kappa
    std::vector<std::uint64_t> zeros, below;  // l_n(kappa) = 0; H < kappa sqrt n
    std::vector<std::uint64_t> hist;       // per kappa, B + 1 bins (last = overflow)
    std::vector<double> c, s, c2, s2;      // per (kappa, t)
    double hsum = 0, hsum2 = 0;
    std::vector<std::uint64_t> level;      // pmf of L_n(k)
  };
  const std::size_t blocks = (cfg.trials + detail::kBlockSize - 1) / detail::kBlockSize;
  const auto blocks_acc = detail::run_blocks<Acc>(blocks, cfg.threads, [&](std::size_t b) {
    Acc a;
    a.sum.assign(K, 0);
    a.sum2.assign(K, 0);
    a.zeros.assign(K, 0);
    a.below.assign(K, 0);
    a.hist.assign(K * (B + 1), 0);
    a.c.assign(K * T, 0);
    a.s.assign(K * T, 0);
    a.c2.assign(K * T, 0);
    a.s2.assign(K * T, 0);
    if (cfg.k) a.level.assign(n + 1, 0);
    Rng rng = substream(cfg.seed, b);
    TreeArena scratch;
    const std::size_t len = std::min(detail::kBlockSize, cfg.trials - b * detail::kBlockSize);
    for (std::size_t i = 0; i < len; ++i) {
      const ProfileVector p = sampler.sample_profile(n, rng, scratch);
      const double hgt = static_cast<double>(p.height());
      a.hsum += hgt / rn;
      a.hsum2 += hgt * hgt / static_cast<double>(n);
      if (cfg.k) a.level[p.level(*cfg.k)]++;
      for (std::size_t ki = 0; ki < K; ++ki) {
        const double l = scaled_profile(p, kappas[ki]);
        a.sum[ki] += l;
        a.sum2[ki] += l * l;
        a.zeros[ki] += l == 0;
        a.below[ki] += hgt < kappas[ki] * rn;
        const auto bin = static_cast<std::size_t>(std::min(l / cfg.hist_max * static_cast<double>(B), static_cast<double>(B)));
        a.hist[ki * (B + 1) + bin]++;
        for (std::size_t ti = 0; ti < T; ++ti) {
          const double cs = std::cos(ts[ti] * l), sn = std::sin(ts[ti] * l);
          const std::size_t j = ki * T + ti;
          a.c[j] += cs;
          a.s[j] += sn;
          a.c2[j] += cs * cs;
          a.s2[j] += sn * sn;
        }
      }
    }
    return a;
  });

  Acc tot = blocks_acc.front();
  for (std::size_t b = 1; b < blocks_acc.size(); ++b) {
    const Acc& a = blocks_acc[b];
    auto addv = [](auto& x, const auto& y) {
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += y[i];
    };
    addv(tot.sum, a.sum);
    addv(tot.sum2, a.sum2);
    addv(tot.zeros, a.zeros);
    addv(tot.below, a.below);
    addv(tot.hist, a.hist);
    addv(tot.c, a.c);
    addv(tot.s, a.s);
    addv(tot.c2, a.c2);
    addv(tot.s2, a.s2);
    addv(tot.level, a.level);
    tot.hsum += a.hsum;
    tot.hsum2 += a.hsum2;
  }

  const double N = static_cast<double>(cfg.trials);
  const auto sample_var = [&](double s, double s2) { return N > 1 ? std::max(0.0, (s2 - s * s / N) / (N - 1)) : 0.0; };
  const ScalingConstants& sc = detail::default_scaling();
  const LocalTimeQuery q = cfg.query();

  Table prof{"profile",
             {"kappa", "t", "mean", "variance", "se_mean", "limit_mean", "limit_variance", "cf_re", "cf_im", "se_re",
              "se_im", "limit_re", "limit_im", "z_re", "z_im", "zero_fraction", "height_below_fraction", "limit_atom"},
             {}};
  Table hist{"histogram", {"kappa", "bin_lo", "bin_hi", "count", "empirical_density", "limit_density"}, {}};
  bool within_3se = true;
  std::vector<PlotSeries> plot;
  for (std::size_t ki = 0; ki < K; ++ki) {
    const double kappa = kappas[ki];
    const double mean = tot.sum[ki] / N;
    const double var = sample_var(tot.sum[ki], tot.sum2[ki]);
    const double lmean = limit_profile_mean(kappa, sc);
    const double lvar = limit_profile_second_moment(kappa, sc, q) - lmean * lmean;
    const double atom = local_time_atom_detailed(sc.time_scale * kappa, q).value.real();
    for (std::size_t ti = 0; ti < T; ++ti) {
      const std::size_t j = ki * T + ti;
      const double re = tot.c[j] / N, im = tot.s[j] / N;
      const double se_re = std::sqrt(sample_var(tot.c[j], tot.c2[j]) / N);
      const double se_im = std::sqrt(sample_var(tot.s[j], tot.s2[j]) / N);
      const Complex lim = limit_profile_cf(kappa, ts[ti], sc, q);
      const double z_re = se_re > 0 ? (re - lim.real()) / se_re : 0.0;
      const double z_im = se_im > 0 ? (im - lim.imag()) / se_im : 0.0;
      within_3se = within_3se && std::abs(z_re) <= 3 && std::abs(z_im) <= 3;
      prof.add({kappa, ts[ti], mean, var, std::sqrt(var / N), lmean, lvar, re, im, se_re, se_im, lim.real(), lim.imag(),
                z_re, z_im, static_cast<double>(tot.zeros[ki]) / N, static_cast<double>(tot.below[ki]) / N, atom});
    }
    // Histogram of the continuous part against the density of a l(a kappa).
    const double w = cfg.hist_max / static_cast<double>(B);
    PlotSeries emp{"empirical, kappa=" + Json(kappa).dump(), {}, {}, true, "#1f77b4"};
    PlotSeries lim{"limit density", {}, {}, false, "#d62728"};
    for (std::size_t bi = 0; bi <= B; ++bi) {
      std::uint64_t count = tot.hist[ki * (B + 1) + bi];
      const bool overflow = bi == B;
      const double lo = w * static_cast<double>(bi);
      const double hi = overflow ? INFINITY : w * static_cast<double>(bi + 1);
      if (bi == 0) count -= tot.zeros[ki];  // the atom is reported separately
      const double dens = overflow ? 0.0 : static_cast<double>(count) / (N * w);
      const double mid = lo + w / 2;
      const double ldens =
          overflow ? 0.0 : local_time_density_at(sc.time_scale * kappa, mid / sc.amp_scale, q) / sc.amp_scale;
      hist.add({kappa, lo, overflow ? Json("inf") : Json(hi), count, dens, ldens});
      if (!overflow && ki == 0) {
        emp.x.push_back(mid);
        emp.y.push_back(dens);
        lim.x.push_back(mid);
        lim.y.push_back(ldens);
      }
    }
    if (ki == 0) plot = {emp, lim};
  }
  rep.tables.push_back(std::move(prof));
  rep.tables.push_back(std::move(hist));

  const double hmean = tot.hsum / N;
  rep.summary = {{"n", n},
                 {"trials", cfg.trials},
                 {"height_mean_over_sqrt_n", hmean},
                 {"height_se", std::sqrt(sample_var(tot.hsum, tot.hsum2) / N)},
                 {"height_limit", sc.height_scale},
                 {"cf_within_3se", within_3se}};
  if (cfg.k) {
    Table lv{"level_pmf", {"m", "count", "empirical", "exact"}, {}};
    std::vector<double> emp(n + 1), ex(n + 1, 0.0);
    for (std::size_t m = 0; m <= n; ++m) emp[m] = static_cast<double>(tot.level[m]) / N;
    const bool have_exact = n <= Budgets::level;
    if (have_exact) {
      const LevelDistribution exact = level_size_distribution(n, *cfg.k);
      for (const auto& [m, p] : exact.pmf()) ex[m[0]] = to_double(p);
    }
    for (std::size_t m = 0; m <= n; ++m)
      if (tot.level[m] > 0 || ex[m] > 0)
        lv.add({m, tot.level[m], emp[m], have_exact ? Json(ex[m]) : Json(nullptr)});
    rep.tables.push_back(std::move(lv));
    rep.summary["k"] = *cfg.k;
    rep.summary["level_tv_exact"] = have_exact ? Json(detail::tv_distance(emp, ex)) : Json(nullptr);
  }
  const SamplerStats st = sampler.stats();
  rep.summary["quad_fallbacks"] = st.quad_fallbacks;
  rep.summary["exact_fallbacks"] = st.exact_fallbacks;
  if (!cfg.svg.empty())
    write_text_file(cfg.svg, svg_plot("l_n(kappa): histogram vs limit density", "x", "density", plot));
  return rep;
}

// ---------------------------------------------------------------------------
// Local time of the excursion

inline Report run_loctime(const ExperimentConfig& cfg) {
  Report rep;
  if (cfg.kappa.empty()) throw std::invalid_argument("loctime: at least one kappa required");
  const LocalTimeQuery base = cfg.query();
  if (cfg.joint) {
    if (cfg.t.size() != cfg.kappa.size()) throw std::invalid_argument("loctime --joint: one t per kappa");
    LocalTimeQuery q = base;
    q.levels = cfg.kappa;
    q.args = cfg.t;
    const ContourResult r = joint_local_time_cf_detailed(q);
    Table t{"joint", {"levels", "args", "re", "im", "truncation_error", "half_length"}, {}};
    t.add({Json(cfg.kappa).dump(), Json(cfg.t).dump(), r.value.real(), r.value.imag(), r.truncation_error, r.half_length});
    rep.tables.push_back(std::move(t));
    return rep;
  }
  if (cfg.density) {
    std::vector<double> grid = cfg.x;
    if (grid.empty())
      for (int i = 0; i <= 600; ++i) grid.push_back(0.01 * i);
    Table d{"density", {"kappa", "x", "density"}, {}};
    Table a{"atoms", {"kappa", "atom", "grid_mass", "tail_mass", "total_mass"}, {}};
    for (double kappa : cfg.kappa) {
      const LocalTimeDensity dens = local_time_density(kappa, grid, base);
      for (std::size_t i = 0; i < grid.size(); ++i) d.add({kappa, grid[i], dens.density[i]});
      a.add({kappa, dens.atom, dens.grid_mass, dens.tail_mass, dens.total_mass()});
    }
    rep.tables.push_back(std::move(d));
    rep.tables.push_back(std::move(a));
    return rep;
  }
  if (cfg.t.empty()) throw std::invalid_argument("loctime: t grid required");
  const ScalingConstants& sc = detail::default_scaling();
  Table t{"cf", {"kappa", "t", "re", "im", "truncation_error", "half_length"}, {}};
  for (double kappa : cfg.kappa)
    for (double tv : cfg.t) {
      const ContourResult r = cfg.tree_scale
                                  ? local_time_cf_detailed(sc.time_scale * kappa, sc.amp_scale * tv, base)
                                  : local_time_cf_detailed(kappa, tv, base);
      t.add({kappa, tv, r.value.real(), r.value.imag(), r.truncation_error, r.half_length});
    }
  rep.tables.push_back(std::move(t));
  rep.summary = {{"tree_scale", cfg.tree_scale}};
  return rep;
}

// ---------------------------------------------------------------------------

// Dispatches on cfg.command and fills the report header.
inline Report run_experiment(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  Report rep;
  switch (cfg.command) {
    case Command::count: rep = run_count(cfg); break;
    case Command::witness: rep = run_witness(cfg); break;
    case Command::constants: rep = run_constants(cfg); break;
    case Command::height_dist: rep = run_height_experiment(cfg); break;
    case Command::profile_dist: rep = run_profile_distribution(cfg); break;
    case Command::joint_dist: rep = run_joint_distribution(cfg); break;
    case Command::tightness: rep = run_tightness_scan(cfg); break;
    case Command::sample: rep = run_sample(cfg); break;
    case Command::montecarlo: rep = run_montecarlo_profile(cfg); break;
    case Command::loctime: rep = run_loctime(cfg); break;
  }
  rep.command = command_name(cfg.command);
  rep.config = to_json(cfg);
  rep.seed = cfg.seed;
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace polya
