// polya_lab: command-line front end for the exact enumeration, sampling and
// local-time experiments. Every report goes to --out (or stdout) as CSV or
// JSON; failures print one JSON object on stderr and exit nonzero.

#include "polya/polya.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using polya::ExperimentConfig;

enum Exit { kOk = 0, kInternal = 1, kUsage = 2, kInvalid = 3, kIo = 4, kNumeric = 5 };

int fail(const std::string& type, const std::string& message, int code) {
  polya::Json j;
  j["error"] = {{"type", type}, {"message", message}, {"exit_code", code}};
  std::cerr << j.dump() << '\n';
  return code;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double to_num(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

std::size_t to_size(const std::string& s) {
  if (s.empty() || s[0] == '-') throw std::invalid_argument("not a nonnegative integer: '" + s + "'");
  std::size_t used = 0;
  const unsigned long long v = std::stoull(s, &used);
  if (used != s.size()) throw std::invalid_argument("not a nonnegative integer: '" + s + "'");
  return static_cast<std::size_t>(v);
}

// "a,b,c" or "lo:hi" (inclusive, step 1) or "lo:hi:step".
std::vector<std::size_t> size_grid(const std::string& s) {
  std::vector<std::size_t> out;
  if (s.empty()) return out;
  const auto parts = split(s, ':');
  if (parts.size() == 1) {
    for (const auto& p : split(s, ',')) out.push_back(to_size(p));
    return out;
  }
  if (parts.size() > 3) throw std::invalid_argument("bad range '" + s + "'");
  const std::size_t lo = to_size(parts[0]), hi = to_size(parts[1]);
  const std::size_t step = parts.size() == 3 ? to_size(parts[2]) : 1;
  if (step == 0) throw std::invalid_argument("range step must be positive");
  for (std::size_t v = lo; v <= hi; v += step) out.push_back(v);
  return out;
}

std::vector<double> real_grid(const std::string& s) {
  std::vector<double> out;
  if (s.empty()) return out;
  const auto parts = split(s, ':');
  if (parts.size() == 1) {
    for (const auto& p : split(s, ',')) out.push_back(to_num(p));
    return out;
  }
  if (parts.size() != 3) throw std::invalid_argument("real range must be lo:hi:step, got '" + s + "'");
  const double lo = to_num(parts[0]), hi = to_num(parts[1]), step = to_num(parts[2]);
  if (!(step > 0)) throw std::invalid_argument("range step must be positive");
  // Index-based so the grid does not drift.
  for (std::size_t i = 0;; ++i) {
    const double v = lo + static_cast<double>(i) * step;
    if (v > hi + 1e-12 * std::max(1.0, std::abs(hi))) break;
    out.push_back(v);
  }
  return out;
}

std::size_t default_threads() {
  if (const char* env = std::getenv("POLYA_THREADS")) {
    try {
      const std::size_t v = to_size(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
    std::cerr << "polya_lab: warning: ignoring invalid POLYA_THREADS='" << env << "'\n";
  }
  return 1;
}

polya::Json read_embedded_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw polya::IoError("cannot open '" + path + "' for reading");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  // CSV reports carry the config on a "# config:" line.
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line))
    if (line.rfind("# config: ", 0) == 0) return polya::Json::parse(line.substr(10));
  const auto j = polya::Json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.contains("config")) throw std::invalid_argument("'" + path + "' holds no embedded config");
  return j.at("config");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact and Monte Carlo experiments on random unlabelled rooted trees"};
  // -h stays free for the gap parameter of tightness.
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_version_flag("--version", std::string("polya_lab ") + polya::kToolVersion);
  app.require_subcommand(0, 1);
  // Global flags may follow the subcommand.
  app.fallthrough();

  ExperimentConfig cfg;
  cfg.threads = default_threads();
  std::string format = "csv", replay;
  std::string n_arg, k_arg, depths_arg, r_arg, h_arg, kappa_arg, t_arg, x_arg;
  std::size_t d_arg = 0;

  auto* seed_opt = app.add_option("--seed", cfg.seed, "Master seed (64-bit)");
  auto* threads_opt = app.add_option("--threads", cfg.threads, "Worker threads for Monte Carlo commands (default $POLYA_THREADS or 1)")
                          ->check(CLI::PositiveNumber);
  auto* out_opt = app.add_option("--out", cfg.out, "Report path (default stdout)");
  auto* format_opt = app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--allow-large", cfg.allow_large, "Exceed the exact-enumeration budgets (warns)");
  app.add_option("--replay", replay, "Rerun the config embedded in an earlier report");

  auto sub = [&](const char* name, const char* help) { return app.add_subcommand(name, help); };
  auto* c_count = sub("count", "Tree counts y_1..y_n with the asymptotic ratio");
  c_count->add_option("-n,--n", n_arg, "Largest size")->required();

  auto* c_witness = sub("witness", "Coefficients of x / y^{-1}(x) and the first negative one");
  c_witness->add_option("--order", cfg.order, "Series order (default 10)");

  auto* c_const = sub("constants", "rho, b, c of the square-root singularity (JSON by default)");
  c_const->add_option("--order", cfg.order, "Series order N (default 120)");
  c_const->add_option("--tol", cfg.tol, "Newton tolerance");

  auto* c_height = sub("height-dist", "Exact height law vs asymptotics; one n adds the pmf table");
  c_height->add_option("-n,--n", n_arg, "Size or grid, e.g. 400 or 100,200,400")->required();
  c_height->add_option("--svg", cfg.svg, "Also plot E H_n/sqrt n against n");

  auto* c_profile = sub("profile-dist", "Exact law of the level size L_n(k)");
  c_profile->add_option("-n,--n", n_arg, "Size")->required();
  c_profile->add_option("-k,--k", k_arg, "Level")->required();
  c_profile->add_option("--t", t_arg, "CF arguments for l_n = L_n(k)/sqrt n, with the limit CF");

  auto* c_joint = sub("joint-dist", "Exact joint law of up to three level sizes");
  c_joint->add_option("-n,--n", n_arg, "Size")->required();
  c_joint->add_option("--depths", depths_arg, "Strictly increasing levels, e.g. 2,5,7")->required();

  auto* c_tight = sub("tightness", "Exact E(L_n(r)-L_n(r+h))^4/(h^2 n) over a grid");
  c_tight->add_option("-n,--n", n_arg, "Sizes (default 20:60)");
  c_tight->add_option("-r,--r", r_arg, "Levels r (default 0:10)");
  c_tight->add_option("--h", h_arg, "Gaps h (default 1:10)");

  auto* c_sample = sub("sample", "Uniform random trees, one canonical encoding per line");
  c_sample->add_option("-n,--n", n_arg, "Size")->required();
  c_sample->add_option("--count", cfg.trials, "Number of trees")->required();
  c_sample->add_flag("--stats", cfg.stats, "Summary statistics instead of trees");

  auto* c_mc = sub("montecarlo", "Sampled profiles l_n(kappa) against the limit law");
  c_mc->add_option("-n,--n", n_arg, "Size")->required();
  c_mc->add_option("--trials", cfg.trials, "Number of trees")->required();
  c_mc->add_option("--kappa", kappa_arg, "Scaled levels (default 0.7)");
  c_mc->add_option("--t", t_arg, "CF arguments (default 1)");
  c_mc->add_option("-k,--k", k_arg, "Also tabulate the law of L_n(k), against the exact one when n <= 200");
  c_mc->add_option("--bins", cfg.bins, "Histogram bins on [0, hist-max)");
  c_mc->add_option("--hist-max", cfg.hist_max, "Histogram range");
  c_mc->add_option("--svg", cfg.svg, "Also plot the histogram against the limit density");

  auto* c_lt = sub("loctime", "Local time of the standard excursion: CF, density, joint CF");
  c_lt->add_option("--kappa", kappa_arg, "Level(s)")->required();
  c_lt->add_option("--t", t_arg, "CF arguments: list or lo:hi:step");
  c_lt->add_option("--x", x_arg, "Density grid (default 0:6:0.01)");
  c_lt->add_flag("--density", cfg.density, "Atom and density of l(kappa)");
  c_lt->add_flag("--joint", cfg.joint, "Joint CF at levels kappa with arguments t");
  c_lt->add_option("--d", d_arg, "Number of joint levels (checked against kappa and t)");
  c_lt->add_flag("--tree-scale", cfg.tree_scale, "Read kappa, t in tree units (limit of l_n)");
  c_lt->add_option("--quad-tol", cfg.quad_tol, "Quadrature tolerance");
  c_lt->add_option("--abscissa", cfg.contour_abscissa, "Contour Re s = c < 0");
  c_lt->add_option("--truncation", cfg.truncation, "Contour half-length T (0 = automatic)");
  c_lt->add_option("--panel-width", cfg.panel_width, "Gauss-Legendre panel width");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), kUsage);
  }

  try {
    if (!replay.empty()) {
      const ExperimentConfig original = polya::config_from_json(read_embedded_config(replay));
      ExperimentConfig next = original;
      // Destination and worker count may change; results do not depend on them.
      if (*out_opt) next.out = cfg.out;
      if (*threads_opt) next.threads = cfg.threads;
      if (*format_opt) next.format = polya::parse_format(format);
      if (*seed_opt && cfg.seed != original.seed) return fail("usage", "--seed cannot change a replayed config", kUsage);
      cfg = next;
    } else {
      const auto subs = app.get_subcommands();
      if (subs.empty()) return fail("usage", "a subcommand or --replay is required; see --help", kUsage);
      cfg.command = polya::parse_command(subs.front()->get_name());
      cfg.n = size_grid(n_arg);
      if (!k_arg.empty()) cfg.k = to_size(k_arg);
      cfg.depths = size_grid(depths_arg);
      cfg.r = size_grid(r_arg);
      cfg.h = size_grid(h_arg);
      cfg.kappa = real_grid(kappa_arg);
      cfg.t = real_grid(t_arg);
      cfg.x = real_grid(x_arg);
      if (d_arg > 0) {
        if (!cfg.joint) return fail("usage", "--d applies to --joint", kUsage);
        if (cfg.kappa.size() != d_arg || cfg.t.size() != d_arg)
          return fail("usage", "--d " + std::to_string(d_arg) + " needs that many kappa and t values", kUsage);
      }
      // constants prints JSON unless told otherwise.
      cfg.format = *format_opt ? polya::parse_format(format)
                               : (cfg.command == polya::Command::constants ? polya::Format::json : polya::Format::csv);
    }

    const polya::Report rep = polya::run_experiment(cfg);
    for (const auto& w : rep.warnings) std::cerr << "polya_lab: warning: " << w << '\n';
    if (cfg.out.empty()) {
      polya::write_report(rep, cfg.format, std::cout);
      std::cout.flush();
      if (!std::cout) throw polya::IoError("write to stdout failed");
    } else {
      polya::write_report(rep, cfg.format, cfg.out);
    }
    return kOk;
  } catch (const polya::IoError& e) {
    return fail("io", e.what(), kIo);
  } catch (const polya::BudgetError& e) {
    return fail("budget", e.what(), kInvalid);
  } catch (const polya::NumericError& e) {
    return fail("numeric", e.what(), kNumeric);
  } catch (const polya::ConvergenceError& e) {
    return fail("convergence", e.what(), kNumeric);
  } catch (const polya::Json::exception& e) {
    return fail("invalid_argument", e.what(), kInvalid);
  } catch (const std::invalid_argument& e) {
    return fail("invalid_argument", e.what(), kInvalid);
  } catch (const std::out_of_range& e) {
    return fail("invalid_argument", e.what(), kInvalid);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), kInternal);
  }
}
