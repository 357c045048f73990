#pragma once

// Threshold-based smart charging over a grid carbon-intensity trace.
//
// The device always runs from its battery; the wall only charges the battery.
// Each trace step the battery charges when it is below min_soc (forced) or when
// the step's intensity is at or below the P-th percentile of the previous
// calendar day's samples (the first day uses itself).

#include <cstdint>
#include <optional>
#include <vector>

#include "jcci/grid.hpp"
#include "jcci/registry.hpp"

namespace jcci::charging {

struct ChargePolicy {
  std::optional<double> percentile;  // defaults to required_duty()
  double min_soc = 0.25;
  double charge_efficiency = 1.0;
  double initial_soc = 1.0;
};

void validate(const ChargePolicy& p);

struct BatteryState {
  double soc = 1.0;
  double cumulative_charge_energy = 0.0;  // joules drawn from the wall
  double equivalent_cycles = 0.0;
};

struct StepRecord {
  std::int64_t timestamp = 0;
  double intensity = 0.0;
  double threshold = 0.0;
  double soc = 0.0;  // at the end of the step
  bool charging = false;
  bool forced = false;
  double wall_energy = 0.0;  // joules
};

// Consecutive charging steps of the same kind; end is exclusive.
struct ChargeWindow {
  std::int64_t start = 0;
  std::int64_t end = 0;
  bool forced = false;
};

struct DaySavings {
  std::int64_t day = 0;
  double smart_intensity = 0.0;     // wall-energy-weighted gCO2e/kWh of charging
  double baseline_intensity = 0.0;  // mean gCO2e/kWh of continuous draw
  double savings = 0.0;
};

struct ChargeSimResult {
  // Wall carbon rescaled to the energy actually consumed, so a run that ends
  // with a different state of charge than it started with is not credited
  // or charged for the difference.
  double smart_carbon = 0.0;
  double smart_carbon_raw = 0.0;  // kgCO2e actually drawn from the wall
  double baseline_carbon = 0.0;   // kgCO2e of continuous wall draw at avg power
  double savings_fraction = 0.0;
  double percentile = 0.0;
  double wall_energy = 0.0;      // J
  double consumed_energy = 0.0;  // J
  double unmet_energy = 0.0;     // J the empty battery could not supply
  double initial_soc = 1.0;
  std::vector<ChargeWindow> schedule;
  std::vector<StepRecord> steps;
  BatteryState final_state;
  int forced_charge_steps = 0;
  std::vector<DaySavings> daily;  // every full day after the bootstrap day
  double median_daily_savings = 0.0;
};

// Percent of the time the device must spend charging to cover its draw.
double required_duty(const DeviceProfile& device, const LoadProfile& load);

// Seconds a battery at `soc` keeps the device running.
double backup_runtime(const DeviceProfile& device, const LoadProfile& load, double soc);

ChargeSimResult simulate(const DeviceProfile& device, const LoadProfile& load, const grid::GridTrace& trace,
                         const ChargePolicy& policy);

}  // namespace jcci::charging
