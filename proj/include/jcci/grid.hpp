#pragma once

// Grid carbon-intensity series, energy mixes, and the per-day percentile
// thresholds smart charging keys off.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace jcci::grid {

struct Sample {
  std::int64_t timestamp = 0;  // UTC seconds
  double intensity = 0.0;      // gCO2e/kWh
  bool operator==(const Sample&) const = default;
};

class GridTrace {
 public:
  GridTrace() = default;
  // Validates: strictly increasing, uniform spacing (interval +/- 1 s), intensities >= 0.
  GridTrace(std::vector<Sample> samples, std::int64_t interval_s, std::int64_t tz_offset_s = 0);

  const std::vector<Sample>& samples() const { return samples_; }
  std::int64_t interval() const { return interval_; }
  // Offset added to UTC timestamps before splitting into calendar days.
  std::int64_t tz_offset() const { return tz_offset_; }
  size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }

  // Calendar day index (days since epoch in the trace timezone) of a timestamp.
  std::int64_t day_of(std::int64_t timestamp) const;
  // Days whose every sample slot is present, ascending.
  std::vector<std::int64_t> full_days() const;
  // Half-open sample index range [first, last) falling on day.
  std::pair<size_t, size_t> day_range(std::int64_t day) const;
  size_t samples_per_day() const;

  bool operator==(const GridTrace&) const = default;

 private:
  std::vector<Sample> samples_;
  std::int64_t interval_ = 300;
  std::int64_t tz_offset_ = 0;
};

// Canonical CSV with header "timestamp,intensity_gco2e_kwh". Gaps of up to
// three missing samples are filled by linear interpolation.
GridTrace parse_trace(const std::string& text, std::int64_t interval_s, const std::string& source = "<string>",
                      std::int64_t tz_offset_s = 0);
GridTrace load_trace(const std::string& path, std::int64_t interval_s, std::int64_t tz_offset_s = 0);
std::string write_trace(const GridTrace& trace);

// Converts a CAISO-style export to the canonical CSV. Accepts a header with a
// date-time column ("Interval Start", "INTERVALSTARTTIME_GMT", "Date"/"Time" pair,
// or "timestamp") and an emissions-rate column (name containing "co2" or
// "intensity"); rates in metric tons CO2 per MWh ("mtco2/mwh", "tco2") are
// converted to g/kWh. The derivation only approximates the published series.
std::string import_caiso(const std::string& text, const std::string& source = "<string>");

struct MixSource {
  double fraction = 0.0;
  double intensity = 0.0;  // gCO2e/kWh
};

struct EnergyMix {
  std::string name;
  std::map<std::string, MixSource> sources;
};

void validate(const EnergyMix& mix);
double mix_intensity(const EnergyMix& mix);

// Built-in mixes: california (257), solar (48), gas (602), carbon_free (0).
EnergyMix named_mix(const std::string& name);
std::vector<std::string> named_mixes();

// Nearest-rank p-th percentile of one calendar day's samples; p = 0 returns the minimum.
double percentile_threshold(const GridTrace& trace, std::int64_t day, double p);
// Nearest-rank percentile of an arbitrary sample set (shared with smart charging).
double nearest_rank(std::vector<double> values, double p);

// Mean over samples with begin <= timestamp < end.
double mean_intensity(const GridTrace& trace, std::int64_t begin, std::int64_t end);

// Deterministic synthetic day shape: a base level with a Gaussian midday dip
// plus seeded noise, clamped at zero.
struct SyntheticSpec {
  std::int64_t start = 0;  // must sit on a day boundary for whole-day traces
  int days = 2;
  std::int64_t interval_s = 300;
  double base = 300.0;
  double dip_depth = 150.0;
  double dip_center_h = 13.0;
  double dip_width_h = 2.5;
  double noise_sd = 0.0;
  std::uint64_t seed = 1;
};
GridTrace synthetic_trace(const SyntheticSpec& spec);

// Two-level day: `low` between low_begin_h and low_end_h, `high` otherwise.
GridTrace two_level_trace(int days, std::int64_t interval_s, double low, double high, double low_begin_h,
                          double low_end_h, std::int64_t start = 0);

}  // namespace jcci::grid
