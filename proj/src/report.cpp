#include "jcci/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "jcci/error.hpp"

namespace jcci::report {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string csv_cell(const std::string& s) {
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
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Two decimals, with -0.00 printed as 0.00.
std::string px(double v) {
  auto s = fmt::format("{:.2f}", v);
  return s == "-0.00" ? "0.00" : s;
}

std::string tick_label(double v, double step) {
  if (v == 0.0) return "0";
  const int decimals = std::max(0, -static_cast<int>(std::floor(std::log10(step) + 1e-9)));
  if (std::fabs(v) >= 1e5 || std::fabs(v) < 1e-3) return fmt::format("{:.2g}", v);
  return fmt::format("{:.{}f}", v, decimals);
}

}  // namespace

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw InputError("table needs at least one column");
}

void Table::add_row(std::vector<std::string> cells) {
  if (cells.size() != columns_.size())
    throw InputError(fmt::format("table row has {} cells, expected {}", cells.size(), columns_.size()));
  rows_.push_back(std::move(cells));
}

std::string Table::to_csv() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_cell(cells[i]);
    }
    out += '\n';
  };
  line(columns_);
  for (const auto& r : rows_) line(r);
  return out;
}

std::string num(double v) { return fmt::format("{}", v); }

std::string sig(double v, int digits) { return fmt::format("{:.{}g}", v, digits); }

std::vector<double> nice_ticks(double lo, double hi, int target) {
  if (!(hi > lo)) return {lo};
  const double raw = (hi - lo) / std::max(1, target);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> out;
  const double first = std::ceil(lo / step - 1e-9) * step;
  for (int i = 0;; ++i) {
    const double t = first + i * step;
    if (t > hi + step * 1e-9) break;
    out.push_back(std::fabs(t) < step * 1e-9 ? 0.0 : t);
  }
  return out;
}

std::string emit_chart(const Dataset& data, const ChartSpec& spec) {
  bool any_point = false;
  for (const auto& s : data.series) {
    if (s.x.size() != s.y.size())
      throw InputError(fmt::format("series '{}' has {} x values and {} y values", s.label, s.x.size(), s.y.size()));
    any_point = any_point || !s.x.empty();
  }
  if (!any_point) throw InputError("cannot chart an empty dataset");

  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const auto& s : data.series) {
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
        throw InputError(fmt::format("series '{}' has a non-finite point", s.label));
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, s.y[i]);
      y_hi = std::max(y_hi, s.y[i]);
    }
  }
  for (const auto& sh : data.shades) {
    x_lo = std::min(x_lo, sh.x0);
    x_hi = std::max(x_hi, sh.x1);
  }
  if (spec.y_min) y_lo = *spec.y_min;
  if (spec.y_max) y_hi = *spec.y_max;
  if (!spec.y_min && y_lo > 0.0 && y_lo < 0.5 * y_hi) y_lo = 0.0;
  if (x_hi == x_lo) {
    x_lo -= 1.0;
    x_hi += 1.0;
  }
  if (y_hi == y_lo) {
    const double pad = y_lo == 0.0 ? 1.0 : std::fabs(y_lo) * 0.1;
    y_lo -= pad;
    y_hi += pad;
  }
  const auto y_ticks = nice_ticks(y_lo, y_hi);
  const auto x_ticks = nice_ticks(x_lo, x_hi);

  const double left = 70, right = 170, top = 40, bottom = 55;
  const double w = spec.width, h = spec.height;
  const double pw = w - left - right, ph = h - top - bottom;
  auto sx = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto sy = [&](double y) { return top + (1.0 - (y - y_lo) / (y_hi - y_lo)) * ph; };

  std::string out;
  out += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      spec.width, spec.height, spec.width, spec.height);
  out += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n", spec.width, spec.height);
  if (!spec.title.empty())
    out += fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n", px(left + pw / 2),
                       xml_escape(spec.title));

  for (const auto& sh : data.shades) {
    const double a = std::max(sx(sh.x0), left), b = std::min(sx(sh.x1), left + pw);
    out += fmt::format(
        "<rect class=\"shade\" data-x0=\"{}\" data-x1=\"{}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" "
        "fill=\"#9ecae1\" fill-opacity=\"0.35\"/>\n",
        num(sh.x0), num(sh.x1), px(a), px(top), px(std::max(0.0, b - a)), px(ph));
  }

  // Grid and ticks.
  const double y_step = y_ticks.size() > 1 ? y_ticks[1] - y_ticks[0] : 1.0;
  for (double t : y_ticks) {
    if (t < y_lo || t > y_hi) continue;
    out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#dddddd\"/>\n", px(left), px(sy(t)),
                       px(left + pw), px(sy(t)));
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", px(left - 6), px(sy(t) + 4),
                       tick_label(t, y_step));
  }
  const double x_step = x_ticks.size() > 1 ? x_ticks[1] - x_ticks[0] : 1.0;
  for (double t : x_ticks) {
    out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333333\"/>\n", px(sx(t)), px(top + ph),
                       px(sx(t)), px(top + ph + 5));
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", px(sx(t)), px(top + ph + 19),
                       tick_label(t, x_step));
  }
  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333333\"/>\n", px(left),
                     px(top), px(pw), px(ph));
  if (!spec.x_label.empty())
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", px(left + pw / 2), px(h - 12),
                       xml_escape(spec.x_label));
  if (!spec.y_label.empty())
    out += fmt::format("<text transform=\"translate(16 {}) rotate(-90)\" text-anchor=\"middle\">{}</text>\n",
                       px(top + ph / 2), xml_escape(spec.y_label));

  size_t legend_row = 0;
  for (size_t k = 0; k < data.series.size(); ++k) {
    const auto& s = data.series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    const char* dash = s.dashed ? " stroke-dasharray=\"6 4\"" : "";
    if (!s.x.empty()) {
      out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.8\"{} points=\"", color, dash);
      for (size_t i = 0; i < s.x.size(); ++i) {
        if (i) out += ' ';
        out += px(sx(s.x[i])) + "," + px(sy(std::clamp(s.y[i], y_lo, y_hi)));
      }
      out += "\"/>\n";
    }
    const double ly = top + 10 + 18.0 * static_cast<double>(legend_row++);
    out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"1.8\"{}/>\n",
                       px(left + pw + 12), px(ly), px(left + pw + 34), px(ly), color, dash);
    out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", px(left + pw + 40), px(ly + 4), xml_escape(s.label));
  }
  if (!data.shades.empty()) {
    const double ly = top + 10 + 18.0 * static_cast<double>(legend_row);
    out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"22\" height=\"10\" fill=\"#9ecae1\" fill-opacity=\"0.35\"/>\n",
                       px(left + pw + 12), px(ly - 5));
    const auto& label = data.shades.front().label;
    out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", px(left + pw + 40), px(ly + 4),
                       xml_escape(label.empty() ? "shaded" : label));
  }
  out += "</svg>\n";
  return out;
}

}  // namespace jcci::report
