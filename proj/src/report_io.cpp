#include "report_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

#include "error.hpp"
#include "format.hpp"

namespace shiftlab {

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

bool numeric(const Cell& c, double& out) {
  if (auto d = std::get_if<double>(&c)) {
    out = *d;
  } else if (auto i = std::get_if<std::int64_t>(&c)) {
    out = static_cast<double>(*i);
  } else if (auto u = std::get_if<std::uint64_t>(&c)) {
    out = static_cast<double>(*u);
  } else {
    return false;
  }
  return std::isfinite(out);
}

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> pts;
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f"};

}  // namespace

std::string format_cell(const Cell& c) {
  if (auto d = std::get_if<double>(&c)) return format_double(*d);
  if (auto i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (auto u = std::get_if<std::uint64_t>(&c)) return std::to_string(*u);
  return std::get<std::string>(c);
}

void write_csv(const ExperimentReport& report, std::ostream& out) {
  out << "# shiftlab " << kToolVersion << '\n';
  out << "# experiment: " << report.name << '\n';
  out << "# seed: " << report.seed << '\n';
  for (const auto& [k, v] : report.parameters) out << "# " << k << " = " << v << '\n';
  for (std::size_t i = 0; i < report.columns.size(); ++i) {
    out << (i ? "," : "") << csv_escape(report.columns[i]);
  }
  out << '\n';
  for (const auto& row : report.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_escape(format_cell(row[i]));
    out << '\n';
  }
  require(static_cast<bool>(out), ErrorCode::kIo, "CSV write failed");
}

std::string to_csv(const ExperimentReport& report) {
  std::ostringstream ss;
  write_csv(report, ss);
  return ss.str();
}

void write_svg(const ExperimentReport& report, std::ostream& out) {
  const PlotSpec& p = report.plot;
  require(!p.x.empty() && !p.y.empty(), ErrorCode::kUnsupported,
          "experiment '" + report.name + "' has no plot");
  const std::size_t xi = report.column(p.x);
  const std::size_t fi = p.filter_column.empty() ? 0 : report.column(p.filter_column);
  const std::size_t si = p.series.empty() ? 0 : report.column(p.series);

  std::vector<Series> series;
  std::map<std::string, std::size_t> index;
  for (const std::string& yc : p.y) {
    const std::size_t yi = report.column(yc);
    for (const auto& row : report.rows) {
      if (!p.filter_column.empty() && format_cell(row[fi]) != p.filter_value) continue;
      double x, y;
      if (!numeric(row[xi], x) || !numeric(row[yi], y)) continue;
      std::string label = yc;
      if (!p.series.empty()) label += " " + p.series + "=" + format_cell(row[si]);
      auto [it, fresh] = index.emplace(label, series.size());
      if (fresh) series.push_back({label, {}});
      series[it->second].pts.emplace_back(x, y);
    }
  }
  for (auto& s : series) std::stable_sort(s.pts.begin(), s.pts.end());

  bool log_scale = !series.empty();
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (auto [x, y] : s.pts) {
      log_scale = log_scale && x > 0.0 && y > 0.0;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  auto tx = [&](double v) { return log_scale ? std::log10(v) : v; };
  double ax0 = tx(x0), ax1 = tx(x1), ay0 = tx(y0), ay1 = tx(y1);
  if (ax1 - ax0 <= 0.0) ax0 -= 0.5, ax1 += 0.5;
  if (ay1 - ay0 <= 0.0) ay0 -= 0.5, ay1 += 0.5;
  const double pad = 0.05 * (ay1 - ay0);
  ay0 -= pad;
  ay1 += pad;

  const double w = 720, h = 440, left = 80, right = 230, top = 40, bottom = 60;
  const double pw = w - left - right, ph = h - top - bottom;
  auto px = [&](double v) { return left + (tx(v) - ax0) / (ax1 - ax0) * pw; };
  auto py = [&](double v) { return top + ph - (tx(v) - ay0) / (ay1 - ay0) * ph; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << left << "\" y=\"24\" font-size=\"15\">" << xml_escape(report.name)
      << (log_scale ? " (log-log)" : "") << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  const int ticks = 5;
  for (int k = 0; k <= ticks; ++k) {
    const double fx = ax0 + (ax1 - ax0) * k / ticks, fy = ay0 + (ay1 - ay0) * k / ticks;
    const double vx = log_scale ? std::pow(10.0, fx) : fx, vy = log_scale ? std::pow(10.0, fy) : fy;
    const double sx = left + pw * k / ticks, sy = top + ph - ph * k / ticks;
    out << "<line x1=\"" << sx << "\" y1=\"" << top + ph << "\" x2=\"" << sx << "\" y2=\""
        << top + ph + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << sx << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
        << short_num(vx) << "</text>\n";
    out << "<line x1=\"" << left - 5 << "\" y1=\"" << sy << "\" x2=\"" << left << "\" y2=\"" << sy
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << left - 8 << "\" y=\"" << sy + 4 << "\" text-anchor=\"end\">"
        << short_num(vy) << "</text>\n";
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 15 << "\" text-anchor=\"middle\">"
      << xml_escape(p.x) << "</text>\n";
  out << "<text transform=\"translate(18," << top + ph / 2
      << ") rotate(-90)\" text-anchor=\"middle\">"
      << xml_escape(p.y_label.empty() ? p.y.front() : p.y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* colour = kPalette[k % (sizeof kPalette / sizeof *kPalette)];
    out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
    for (auto [x, y] : series[k].pts) out << short_num(px(x)) << ',' << short_num(py(y)) << ' ';
    out << "\"/>\n";
    for (auto [x, y] : series[k].pts) {
      out << "<circle cx=\"" << short_num(px(x)) << "\" cy=\"" << short_num(py(y))
          << "\" r=\"3\" fill=\"" << colour << "\"/>\n";
    }
    const double ly = top + 16 + 18.0 * static_cast<double>(k);
    out << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << left + pw + 32
        << "\" y2=\"" << ly - 4 << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << left + pw + 38 << "\" y=\"" << ly << "\">"
        << xml_escape(series[k].label) << "</text>\n";
  }
  out << "</svg>\n";
  require(static_cast<bool>(out), ErrorCode::kIo, "SVG write failed");
}

}  // namespace shiftlab
