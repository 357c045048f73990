#pragma once

namespace jcci::units {

inline constexpr double kSecondsPerHour = 3600.0;
inline constexpr double kSecondsPerDay = 86400.0;
inline constexpr double kDaysPerYear = 365.0;
inline constexpr double kSecondsPerYear = kDaysPerYear * kSecondsPerDay;
// A month is a twelfth of a 365-day year (730 h).
inline constexpr double kSecondsPerMonth = kSecondsPerYear / 12.0;
inline constexpr double kJoulesPerKwh = 3.6e6;

constexpr double months(double m) { return m * kSecondsPerMonth; }
constexpr double years(double y) { return y * kSecondsPerYear; }
constexpr double hours(double h) { return h * kSecondsPerHour; }
constexpr double to_years(double seconds) { return seconds / kSecondsPerYear; }
constexpr double to_hours(double seconds) { return seconds / kSecondsPerHour; }

// grams CO2e per kWh times joules -> kilograms CO2e.
constexpr double carbon_kg(double intensity_g_per_kwh, double energy_j) {
  return intensity_g_per_kwh * (energy_j / kJoulesPerKwh) / 1000.0;
}

}  // namespace jcci::units
