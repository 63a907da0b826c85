#ifndef PAPRL_SVG_PLOT_HPP
#define PAPRL_SVG_PLOT_HPP

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "paprl/errors.hpp"
#include "paprl/harness.hpp"
#include "paprl/numfmt.hpp"

namespace paprl {

struct PlotOptions {
  int width = 900;
  int height = 520;
  int smoothing_window = 100;  // trailing moving average
  std::string title = "reward";
};

namespace detail {

struct CsvSeries {
  std::string agent;
  std::uint64_t seed = 0;
  std::vector<double> rewards;  // indexed by episode
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

// Reads one per-seed run CSV; validates the version line and the fixed
// header prefix.
inline std::vector<CsvSeries> read_run_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaMismatch("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kCsvVersionLine)
    throw SchemaMismatch(path + ": missing version line");
  if (!std::getline(in, line))
    throw SchemaMismatch(path + ": missing header");
  const auto header = split_csv_line(line);
  const std::vector<std::string> expected{"episode", "seed",   "agent",
                                          "reward",  "outcome", "n_active"};
  if (header.size() < expected.size())
    throw SchemaMismatch(path + ": short header");
  for (std::size_t i = 0; i < expected.size(); ++i)
    if (header[i] != expected[i])
      throw SchemaMismatch(path + ": unexpected column '" + header[i] + "'");

  std::map<std::pair<std::string, std::uint64_t>, CsvSeries> series;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < expected.size())
      throw SchemaMismatch(path + ": short row");
    const std::string agent = fields[2];
    const std::uint64_t seed = std::stoull(fields[1]);
    auto& s = series[{agent, seed}];
    s.agent = agent;
    s.seed = seed;
    s.rewards.push_back(parse_double(fields[3]));
  }
  if (series.empty()) throw SchemaMismatch(path + ": no data rows");
  std::vector<CsvSeries> out;
  for (auto& [key, s] : series) out.push_back(std::move(s));
  return out;
}

inline std::vector<double> moving_average(const std::vector<double>& x,
                                          int window) {
  std::vector<double> out(x.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sum += x[i];
    if (i >= static_cast<std::size_t>(window)) sum -= x[i - window];
    const double n = std::min<double>(window, static_cast<double>(i + 1));
    out[i] = sum / n;
  }
  return out;
}

inline const char* agent_color(std::size_t index) {
  static const char* palette[] = {"#c0392b", "#2471a3", "#229954",
                                  "#8e44ad", "#d68910", "#17a589"};
  return palette[index % 6];
}

}  // namespace detail

// Moving-average reward curves per agent with shaded 95% CI bands across
// seeds; output is self-contained SVG 1.1.
inline void emit_plot(const std::vector<std::string>& csv_paths,
                      const std::string& out_path,
                      const PlotOptions& options = {}) {
  if (csv_paths.empty()) throw SchemaMismatch("no input csv files");
  std::map<std::string, std::vector<detail::CsvSeries>> by_agent;
  for (const auto& path : csv_paths)
    for (auto& s : detail::read_run_csv(path))
      by_agent[s.agent].push_back(std::move(s));

  struct Curve {
    std::string agent;
    std::vector<double> mean, lo, hi;
  };
  std::vector<Curve> curves;
  std::size_t max_len = 0;
  for (auto& [agent, seeds] : by_agent) {
    std::vector<std::vector<double>> smoothed;
    std::size_t len = 0;
    for (const auto& s : seeds) {
      smoothed.push_back(
          detail::moving_average(s.rewards, options.smoothing_window));
      len = std::max(len, smoothed.back().size());
    }
    Curve curve;
    curve.agent = agent;
    for (std::size_t e = 0; e < len; ++e) {
      double sum = 0.0, sum2 = 0.0;
      int n = 0;
      for (const auto& s : smoothed) {
        if (e >= s.size()) continue;
        sum += s[e];
        sum2 += s[e] * s[e];
        ++n;
      }
      const double mean = sum / n;
      double ci = 0.0;
      if (n > 1) {
        const double var = std::max(0.0, (sum2 - n * mean * mean) / (n - 1));
        ci = 1.96 * std::sqrt(var / n);
      }
      curve.mean.push_back(mean);
      curve.lo.push_back(mean - ci);
      curve.hi.push_back(mean + ci);
    }
    max_len = std::max(max_len, len);
    curves.push_back(std::move(curve));
  }

  const double margin_l = 60.0, margin_r = 20.0, margin_t = 30.0,
               margin_b = 45.0;
  const double plot_w = options.width - margin_l - margin_r;
  const double plot_h = options.height - margin_t - margin_b;
  const double y_lo = 0.0, y_hi = 1.0;
  auto sx = [&](double e) {
    return margin_l + plot_w * (max_len > 1 ? e / (max_len - 1.0) : 0.0);
  };
  auto sy = [&](double v) {
    const double c = std::clamp(v, y_lo, y_hi);
    return margin_t + plot_h * (1.0 - (c - y_lo) / (y_hi - y_lo));
  };

  std::ofstream out(out_path);
  if (!out) throw Error("cannot open output file " + out_path);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
      << options.width << "\" height=\"" << options.height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // axes and ticks
  out << "<g stroke=\"#444\" stroke-width=\"1\">"
      << "<line x1=\"" << margin_l << "\" y1=\"" << margin_t + plot_h
      << "\" x2=\"" << margin_l + plot_w << "\" y2=\"" << margin_t + plot_h
      << "\"/>"
      << "<line x1=\"" << margin_l << "\" y1=\"" << margin_t << "\" x2=\""
      << margin_l << "\" y2=\"" << margin_t + plot_h << "\"/></g>\n";
  for (int i = 0; i <= 5; ++i) {
    const double v = y_lo + (y_hi - y_lo) * i / 5.0;
    out << "<text x=\"" << margin_l - 8 << "\" y=\"" << sy(v) + 4
        << "\" font-size=\"12\" text-anchor=\"end\" fill=\"#333\">"
        << format_double(v) << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double e = max_len > 0 ? (max_len - 1.0) * i / 4.0 : 0.0;
    out << "<text x=\"" << sx(e) << "\" y=\"" << margin_t + plot_h + 18
        << "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#333\">"
        << static_cast<long>(e) << "</text>\n";
  }
  out << "<text x=\"" << margin_l + plot_w / 2 << "\" y=\""
      << options.height - 8
      << "\" font-size=\"13\" text-anchor=\"middle\" fill=\"#333\">"
      << "episode</text>\n";
  out << "<text x=\"" << margin_l + plot_w / 2 << "\" y=\"" << margin_t - 10
      << "\" font-size=\"14\" text-anchor=\"middle\" fill=\"#111\">"
      << options.title << "</text>\n";

  std::size_t ci = 0;
  for (const auto& curve : curves) {
    const char* color = detail::agent_color(ci);
    // CI band
    out << "<path fill=\"" << color << "\" fill-opacity=\"0.15\" "
        << "stroke=\"none\" d=\"M";
    for (std::size_t e = 0; e < curve.hi.size(); ++e)
      out << (e ? " L" : "") << sx(static_cast<double>(e)) << " "
          << sy(curve.hi[e]);
    for (std::size_t e = curve.lo.size(); e-- > 0;)
      out << " L" << sx(static_cast<double>(e)) << " " << sy(curve.lo[e]);
    out << " Z\"/>\n";
    // mean line
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.8\" points=\"";
    for (std::size_t e = 0; e < curve.mean.size(); ++e)
      out << sx(static_cast<double>(e)) << "," << sy(curve.mean[e]) << " ";
    out << "\"/>\n";
    // legend entry
    const double ly = margin_t + 16.0 + 18.0 * ci;
    out << "<rect x=\"" << margin_l + 10 << "\" y=\"" << ly - 9
        << "\" width=\"14\" height=\"10\" fill=\"" << color << "\"/>"
        << "<text x=\"" << margin_l + 30 << "\" y=\"" << ly
        << "\" font-size=\"12\" fill=\"#111\">" << curve.agent
        << "</text>\n";
    ++ci;
  }
  out << "</svg>\n";
}

}  // namespace paprl

#endif  // PAPRL_SVG_PLOT_HPP
