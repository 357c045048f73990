#include "jcci/grid.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "jcci/error.hpp"
#include "jcci/textconf.hpp"

namespace jcci::grid {

namespace {

constexpr std::int64_t kDay = 86400;
constexpr int kMaxFilledGap = 3;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::string trim(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  size_t i = 0;
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  return s.substr(i);
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool in_q = false;
  for (char c : line) {
    if (c == '"') {
      in_q = !in_q;
    } else if (c == ',' && !in_q) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

bool parse_double(const std::string& s, double& out) {
  auto t = trim(s);
  if (t.empty()) return false;
  const char* b = t.data();
  if (*b == '+') ++b;
  auto [p, ec] = std::from_chars(b, t.data() + t.size(), out);
  return ec == std::errc() && p == t.data() + t.size();
}

bool parse_int(const std::string& s, std::int64_t& out) {
  auto t = trim(s);
  if (t.empty()) return false;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  return ec == std::errc() && p == t.data() + t.size();
}

// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

// Accepts epoch seconds, "YYYY-MM-DD[ T]HH:MM[:SS][Z]" and "MM/DD/YYYY HH:MM[:SS]".
bool parse_datetime(const std::string& raw, std::int64_t& out) {
  std::string s = trim(raw);
  if (parse_int(s, out)) return true;
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  for (auto& c : s) {
    if (c == 'T' || c == 'Z') c = ' ';
  }
  if (std::sscanf(s.c_str(), "%d-%d-%d %d:%d:%d", &y, &mo, &d, &h, &mi, &sec) >= 5 ||
      std::sscanf(s.c_str(), "%d/%d/%d %d:%d:%d", &mo, &d, &y, &h, &mi, &sec) >= 5) {
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 24 || mi < 0 || mi > 59) return false;
    out = days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * kDay + h * 3600 + mi * 60 + sec;
    return true;
  }
  return false;
}

}  // namespace

GridTrace::GridTrace(std::vector<Sample> samples, std::int64_t interval_s, std::int64_t tz_offset_s)
    : samples_(std::move(samples)), interval_(interval_s), tz_offset_(tz_offset_s) {
  if (interval_ <= 0) throw InputError("trace interval must be positive");
  for (size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (!(s.intensity >= 0.0) || !std::isfinite(s.intensity)) {
      throw InvariantError("GridTrace", "intensity >= 0 (sample " + std::to_string(i) + ")");
    }
    if (i > 0) {
      std::int64_t d = s.timestamp - samples_[i - 1].timestamp;
      if (d <= 0) throw InvariantError("GridTrace", "timestamps strictly increasing (sample " + std::to_string(i) + ")");
      if (std::llabs(d - interval_) > 1) {
        throw InvariantError("GridTrace", "uniform spacing equal to interval (sample " + std::to_string(i) + ")");
      }
    }
  }
}

std::int64_t GridTrace::day_of(std::int64_t timestamp) const { return floor_div(timestamp + tz_offset_, kDay); }

size_t GridTrace::samples_per_day() const {
  if (kDay % interval_ != 0) throw InputError("trace interval does not divide a day");
  return static_cast<size_t>(kDay / interval_);
}

std::pair<size_t, size_t> GridTrace::day_range(std::int64_t day) const {
  auto first = std::lower_bound(samples_.begin(), samples_.end(), day,
                                [&](const Sample& s, std::int64_t d) { return day_of(s.timestamp) < d; });
  auto last = std::lower_bound(first, samples_.end(), day + 1,
                               [&](const Sample& s, std::int64_t d) { return day_of(s.timestamp) < d; });
  return {static_cast<size_t>(first - samples_.begin()), static_cast<size_t>(last - samples_.begin())};
}

std::vector<std::int64_t> GridTrace::full_days() const {
  std::vector<std::int64_t> out;
  if (samples_.empty()) return out;
  const size_t per_day = samples_per_day();
  for (std::int64_t d = day_of(samples_.front().timestamp); d <= day_of(samples_.back().timestamp); ++d) {
    auto [a, b] = day_range(d);
    if (b - a == per_day) out.push_back(d);
  }
  return out;
}

GridTrace parse_trace(const std::string& text, std::int64_t interval_s, const std::string& source,
                      std::int64_t tz_offset_s) {
  if (interval_s <= 0) throw InputError("trace interval must be positive");
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool header = false;
  std::vector<Sample> samples;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (!header) {
      if (line != "timestamp,intensity_gco2e_kwh") {
        throw ParseError(source, line_no, "", "expected header 'timestamp,intensity_gco2e_kwh'");
      }
      header = true;
      continue;
    }
    auto cols = split_csv(line);
    Sample s;
    if (cols.size() != 2) throw ParseError(source, line_no, "", "malformed row: expected 2 columns");
    if (!parse_int(cols[0], s.timestamp)) throw ParseError(source, line_no, "timestamp", "malformed row: bad timestamp");
    if (!parse_double(cols[1], s.intensity) || !(s.intensity >= 0.0)) {
      throw ParseError(source, line_no, "intensity_gco2e_kwh", "malformed row: bad intensity");
    }
    if (!samples.empty()) {
      const Sample prev = samples.back();
      std::int64_t d = s.timestamp - prev.timestamp;
      if (d <= 0) throw ParseError(source, line_no, "timestamp", "non-monotone at line " + std::to_string(line_no));
      std::int64_t steps = (d + interval_s / 2) / interval_s;
      if (steps < 1 || std::llabs(d - steps * interval_s) > 1) {
        throw ParseError(source, line_no, "timestamp", "spacing does not match interval");
      }
      if (steps - 1 > kMaxFilledGap) {
        throw ParseError(source, line_no, "timestamp", "gap too large (" + std::to_string(steps - 1) + " missing samples)");
      }
      for (std::int64_t k = 1; k < steps; ++k) {
        double t = static_cast<double>(k) / static_cast<double>(steps);
        samples.push_back({prev.timestamp + k * interval_s, prev.intensity + t * (s.intensity - prev.intensity)});
      }
    }
    samples.push_back(s);
  }
  if (!header) throw ParseError(source, line_no, "", "empty trace file");
  return GridTrace(std::move(samples), interval_s, tz_offset_s);
}

GridTrace load_trace(const std::string& path, std::int64_t interval_s, std::int64_t tz_offset_s) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open trace '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_trace(ss.str(), interval_s, path, tz_offset_s);
}

std::string write_trace(const GridTrace& trace) {
  std::string out = "timestamp,intensity_gco2e_kwh\n";
  for (const auto& s : trace.samples()) {
    out += std::to_string(s.timestamp) + "," + textconf::format_number(s.intensity) + "\n";
  }
  return out;
}

std::string import_caiso(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::vector<std::string> head;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      head = split_csv(line);
      break;
    }
  }
  if (head.empty()) throw ParseError(source, line_no, "", "empty CAISO file");

  int time_col = -1, date_col = -1, clock_col = -1, rate_col = -1, co2_col = -1, demand_col = -1;
  double rate_scale = 1.0;
  for (size_t i = 0; i < head.size(); ++i) {
    const std::string h = lower(head[i]);
    const int c = static_cast<int>(i);
    if (h == "date") {
      date_col = c;
    } else if (h == "time" || h == "hour") {
      clock_col = c;
    } else if (time_col < 0 && (h == "timestamp" || h.find("interval") != std::string::npos ||
                                h.find("datetime") != std::string::npos || h.find("time") != std::string::npos)) {
      time_col = c;
    } else if (rate_col < 0 && (h.find("intensity") != std::string::npos || h.find("g/kwh") != std::string::npos)) {
      rate_col = c;
      rate_scale = 1.0;
    } else if (rate_col < 0 && (h.find("/mwh") != std::string::npos) && h.find("co2") != std::string::npos) {
      rate_col = c;
      rate_scale = 1000.0;  // t/MWh -> g/kWh
    } else if (co2_col < 0 && h.find("co2") != std::string::npos) {
      co2_col = c;
    } else if (demand_col < 0 && (h.find("demand") != std::string::npos || h.find("load") != std::string::npos)) {
      demand_col = c;
    }
  }
  if (time_col < 0 && !(date_col >= 0 && clock_col >= 0)) {
    throw ParseError(source, line_no, "", "no time column in CAISO header");
  }
  if (rate_col < 0 && !(co2_col >= 0 && demand_col >= 0)) {
    throw ParseError(source, line_no, "", "need an intensity column or CO2 (t/h) and demand (MW) columns");
  }

  std::vector<Sample> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cols = split_csv(line);
    auto col = [&](int c) -> const std::string& {
      if (c < 0 || static_cast<size_t>(c) >= cols.size()) throw ParseError(source, line_no, "", "malformed row: too few columns");
      return cols[static_cast<size_t>(c)];
    };
    Sample s;
    std::string when = time_col >= 0 ? col(time_col) : col(date_col) + " " + col(clock_col);
    if (!parse_datetime(when, s.timestamp)) throw ParseError(source, line_no, "", "malformed row: bad date/time '" + when + "'");
    if (rate_col >= 0) {
      if (!parse_double(col(rate_col), s.intensity)) throw ParseError(source, line_no, head[rate_col], "malformed row");
      s.intensity *= rate_scale;
    } else {
      double co2 = 0.0, mw = 0.0;
      if (!parse_double(col(co2_col), co2) || !parse_double(col(demand_col), mw) || !(mw > 0.0)) {
        throw ParseError(source, line_no, "", "malformed row: bad CO2/demand values");
      }
      s.intensity = co2 / mw * 1000.0;  // t/h over MW = t/MWh
    }
    rows.push_back(s);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Sample& a, const Sample& b) { return a.timestamp < b.timestamp; });
  std::string out = "timestamp,intensity_gco2e_kwh\n";
  for (size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].timestamp == rows[i - 1].timestamp) continue;
    out += std::to_string(rows[i].timestamp) + "," + textconf::format_number(rows[i].intensity) + "\n";
  }
  return out;
}

void validate(const EnergyMix& mix) {
  if (mix.sources.empty()) throw InvariantError("mix." + mix.name, "at least one source");
  double sum = 0.0;
  for (const auto& [name, s] : mix.sources) {
    if (!(s.fraction >= 0.0 && s.fraction <= 1.0)) throw InvariantError("mix." + mix.name, name + " fraction in [0,1]");
    if (!(s.intensity >= 0.0)) throw InvariantError("mix." + mix.name, name + " intensity >= 0");
    sum += s.fraction;
  }
  if (std::fabs(sum - 1.0) > 1e-9) throw InvariantError("mix." + mix.name, "fractions sum to 1");
}

double mix_intensity(const EnergyMix& mix) {
  validate(mix);
  double total = 0.0;
  for (const auto& [name, s] : mix.sources) total += s.fraction * s.intensity;
  return total;
}

EnergyMix named_mix(const std::string& name) {
  if (name == "california" || name == "ca") return {"california", {{"california_grid", {1.0, 257.0}}}};
  if (name == "solar") return {"solar", {{"solar", {1.0, 48.0}}}};
  if (name == "gas") return {"gas", {{"gas", {1.0, 602.0}}}};
  if (name == "carbon_free" || name == "zero") return {"carbon_free", {{"carbon_free", {1.0, 0.0}}}};
  throw InputError("unknown energy mix '" + name + "'");
}

std::vector<std::string> named_mixes() { return {"california", "solar", "gas", "carbon_free"}; }

double nearest_rank(std::vector<double> values, double p) {
  if (values.empty()) throw InputError("percentile of an empty sample set");
  if (!(p >= 0.0 && p <= 100.0)) throw InputError("percentile outside [0,100]");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  auto rank = static_cast<size_t>(std::ceil(p / 100.0 * n));
  rank = std::clamp<size_t>(rank, 1, values.size());
  return values[rank - 1];
}

double percentile_threshold(const GridTrace& trace, std::int64_t day, double p) {
  auto [a, b] = trace.day_range(day);
  if (b - a != trace.samples_per_day()) {
    throw InputError("day " + std::to_string(day) + " not fully covered by trace (" + std::to_string(b - a) + " of " +
                     std::to_string(trace.samples_per_day()) + " samples)");
  }
  std::vector<double> v;
  v.reserve(b - a);
  for (size_t i = a; i < b; ++i) v.push_back(trace.samples()[i].intensity);
  return nearest_rank(std::move(v), p);
}

double mean_intensity(const GridTrace& trace, std::int64_t begin, std::int64_t end) {
  if (trace.empty()) throw InputError("empty trace");
  const auto& s = trace.samples();
  if (begin < s.front().timestamp || end > s.back().timestamp + trace.interval()) {
    throw InputError("window outside trace span");
  }
  double sum = 0.0;
  size_t n = 0;
  for (const auto& x : s) {
    if (x.timestamp >= begin && x.timestamp < end) {
      sum += x.intensity;
      ++n;
    }
  }
  if (n == 0) throw InputError("empty window");
  return sum / static_cast<double>(n);
}

GridTrace synthetic_trace(const SyntheticSpec& spec) {
  if (spec.days < 1 || spec.interval_s <= 0) throw InputError("synthetic trace needs days >= 1 and interval > 0");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, spec.noise_sd > 0.0 ? spec.noise_sd : 1.0);
  std::vector<Sample> out;
  const std::int64_t n = spec.days * kDay / spec.interval_s;
  out.reserve(static_cast<size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    std::int64_t t = spec.start + i * spec.interval_s;
    double h = static_cast<double>((t % kDay + kDay) % kDay) / 3600.0;
    double z = (h - spec.dip_center_h) / spec.dip_width_h;
    double v = spec.base - spec.dip_depth * std::exp(-0.5 * z * z);
    if (spec.noise_sd > 0.0) v += noise(rng);
    out.push_back({t, std::max(0.0, v)});
  }
  return GridTrace(std::move(out), spec.interval_s);
}

GridTrace two_level_trace(int days, std::int64_t interval_s, double low, double high, double low_begin_h,
                          double low_end_h, std::int64_t start) {
  std::vector<Sample> out;
  const std::int64_t n = days * kDay / interval_s;
  for (std::int64_t i = 0; i < n; ++i) {
    std::int64_t t = start + i * interval_s;
    double h = static_cast<double>((t % kDay + kDay) % kDay) / 3600.0;
    out.push_back({t, (h >= low_begin_h && h < low_end_h) ? low : high});
  }
  return GridTrace(std::move(out), interval_s);
}

}  // namespace jcci::grid
