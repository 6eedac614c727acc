#pragma once

// Experiment reports: named tables plus a metadata header, written as CSV
// or JSON. Exact integers and rationals travel as decimal strings.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace polya {

#ifdef POLYA_VERSION
inline constexpr const char* kToolVersion = POLYA_VERSION;
#else
inline constexpr const char* kToolVersion = "0.1.0";
#endif

using Json = nlohmann::ordered_json;

enum class Format { csv, json };

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;

  void add(std::vector<Json> row) {
    if (row.size() != columns.size()) throw std::logic_error("table '" + name + "': row width differs from header");
    rows.push_back(std::move(row));
  }
};

struct Report {
  std::string command;
  Json config;  // full ExperimentConfig
  std::uint64_t seed = 0;
  double wall_time_s = 0;
  Json summary = Json::object();
  std::vector<std::string> warnings;
  std::vector<Table> tables;

  const Table& table(const std::string& name) const {
    for (const auto& t : tables)
      if (t.name == name) return t;
    throw std::out_of_range("report has no table '" + name + "'");
  }
  Table& table(const std::string& name) {
    return const_cast<Table&>(static_cast<const Report&>(*this).table(name));
  }
};

namespace detail {

// Strings are written bare (they never hold commas or quotes here);
// numbers use the json round-trip formatting.
inline std::string csv_cell(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

}  // namespace detail

// CSV layout: '#' header lines (version, command, config, seed, wall time,
// summary, warnings), then per table a "# table: <name>" line, a column
// header and the rows; tables are separated by a blank line.
inline void write_csv(const Report& r, std::ostream& os) {
  os << "# polya_lab " << kToolVersion << '\n';
  os << "# command: " << r.command << '\n';
  os << "# config: " << r.config.dump() << '\n';
  os << "# seed: " << r.seed << '\n';
  os << "# wall_time_s: " << Json(r.wall_time_s).dump() << '\n';
  os << "# summary: " << r.summary.dump() << '\n';
  for (const auto& w : r.warnings) os << "# warning: " << w << '\n';
  bool first = true;
  for (const auto& t : r.tables) {
    if (!first) os << '\n';
    first = false;
    os << "# table: " << t.name << '\n';
    for (std::size_t j = 0; j < t.columns.size(); ++j) os << (j ? "," : "") << t.columns[j];
    os << '\n';
    for (const auto& row : t.rows) {
      for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << detail::csv_cell(row[j]);
      os << '\n';
    }
  }
}

inline Json to_json(const Report& r) {
  Json j;
  j["version"] = kToolVersion;
  j["command"] = r.command;
  j["config"] = r.config;
  j["seed"] = r.seed;
  j["wall_time_s"] = r.wall_time_s;
  j["summary"] = r.summary;
  j["warnings"] = r.warnings;
  Json tables = Json::object();
  for (const auto& t : r.tables) tables[t.name] = Json{{"columns", t.columns}, {"rows", t.rows}};
  j["tables"] = std::move(tables);
  return j;
}

inline void write_json(const Report& r, std::ostream& os) { os << to_json(r).dump(2) << '\n'; }

inline void write_report(const Report& r, Format f, std::ostream& os) {
  if (f == Format::csv)
    write_csv(r, os);
  else
    write_json(r, os);
}

inline void write_report(const Report& r, Format f, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_report(r, f, os);
  os.flush();
  if (!os) throw IoError("write to '" + path + "' failed");
}

inline std::string render(const Report& r, Format f) {
  std::ostringstream os;
  write_report(r, f, os);
  return os.str();
}

// ---------------------------------------------------------------------------
// Minimal static SVG line/step plot.

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
  bool markers = false;  // points instead of a polyline
  std::string colour = "#1f77b4";
};

inline std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                            const std::vector<PlotSeries>& series) {
  constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!(x1 > x0)) x1 = x0 + 1;
  if (!(y1 > y0)) y1 = y0 + 1;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  const auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  const auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  char buf[256];
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  std::snprintf(buf, sizeof buf, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n", L, T,
                W - L - R, H - T - B);
  os << buf;
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4, yv = y0 + (y1 - y0) * k / 4;
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">%.4g</text>\n", px(xv), H - B + 16, xv);
    os << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"end\">%.4g</text>\n", L - 6, py(yv) + 4, yv);
    os << buf;
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  os << "<text transform=\"translate(16," << (T + H - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">" << ylabel
     << "</text>\n";
  double ly = T + 16;
  for (const auto& s : series) {
    if (s.markers) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.y[i])) continue;
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\"/>\n", px(s.x[i]), py(s.y[i]),
                      s.colour.c_str());
        os << buf;
      }
    } else {
      os << "<polyline fill=\"none\" stroke=\"" << s.colour << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.y[i])) continue;
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(s.x[i]), py(s.y[i]));
        os << buf;
      }
      os << "\"/>\n";
    }
    os << "<text x=\"" << W - R - 8 << "\" y=\"" << ly << "\" text-anchor=\"end\" fill=\"" << s.colour << "\">" << s.label
       << "</text>\n";
    ly += 16;
  }
  os << "</svg>\n";
  return os.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << text;
  if (!os) throw IoError("write to '" + path + "' failed");
}

}  // namespace polya
