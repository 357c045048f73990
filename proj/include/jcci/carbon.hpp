#pragma once

// Computational carbon intensity: lifetime CO2e (embodied + compute +
// network) per lifetime operation, plus the battery-replacement and
// reuse-factor terms that feed the embodied part.

#include <optional>
#include <set>
#include <string>

#include "jcci/registry.hpp"

namespace jcci {

// Lifetime carbon terms in kgCO2e.
struct CarbonBreakdown {
  double c_m = 0.0;  // manufacturing (embodied)
  double c_c = 0.0;  // compute energy
  double c_n = 0.0;  // network energy

  double total() const { return c_m + c_c + c_n; }
  bool operator==(const CarbonBreakdown&) const = default;
};

struct CCIResult {
  CarbonBreakdown breakdown;
  double lifetime = 0.0;   // seconds
  double total_ops = 0.0;  // in the benchmark's unit
  double cci = 0.0;        // kgCO2e per op
  std::string unit;

  double cci_mg() const { return cci * 1e6; }
};

struct NetworkLoadSpec {
  double f_net = 0.0;   // bytes/s
  double ei_net = 0.0;  // J/byte

  double power() const { return f_net * ei_net; }
};

inline constexpr double kWifiJoulesPerByte = 5e-6;
inline constexpr double kLteJoulesPerByte = 11e-6;

enum class Mode { kNew, kReused };
Mode mode_from_string(const std::string& s);
const char* to_string(Mode m);

// ci in gCO2e/kWh, power in W, lifetime in s; results in kgCO2e.
double compute_carbon(double avg_power, double lifetime, double ci);
double network_carbon(const NetworkLoadSpec& load, double lifetime, double ci);

// Days until the battery reaches its cycle limit when it alone powers the device.
double battery_lifetime_days(const BatterySpec& battery, double avg_power);
// Battery embodied carbon times ceil(lifetime / battery lifetime); at least one battery.
double battery_replacement_carbon(const BatterySpec& battery, double avg_power, double lifetime);
int battery_replacements(const BatterySpec& battery, double avg_power, double lifetime);

// Embodied-carbon-weighted fraction of reused components.
double reuse_factor(const ComponentBreakdown& breakdown, const std::set<Component>& reused);

struct BatteryPolicy {
  double avg_power = 0.0;
  double lifetime = 0.0;
};

struct EmbodiedCarbon {
  double kg = 0.0;
  double reuse_factor = 1.0;  // informational
};

// New devices carry their full embodied total. Reused devices count as already
// paid for, except for the batteries they will burn through.
EmbodiedCarbon embodied_carbon(const DeviceProfile& device, Mode mode, const std::set<Component>& reused_components,
                               const std::optional<BatteryPolicy>& battery_policy);

struct SingleOptions {
  Mode mode = Mode::kReused;
  std::optional<NetworkLoadSpec> net;
  // Charge battery replacements over the lifetime (reused devices with batteries).
  bool replace_batteries = false;
};

CCIResult cci_single(const DeviceProfile& device, const LoadProfile& load, const BenchmarkSpec& bench, double lifetime,
                     double ci, const SingleOptions& opts);

// Packs a breakdown and op count into a result; throws ModelError when ops is not positive.
CCIResult make_cci(const CarbonBreakdown& b, double lifetime, double total_ops, const std::string& unit);

struct FirstLife {
  double c_m = 0.0;
  double c_c = 0.0;
  double c_n = 0.0;
  double ops = 0.0;
};

struct SecondLife {
  double c_c = 0.0;
  double c_n = 0.0;
  double ops = 0.0;
};

// Embodied carbon amortized over the work of both lives.
double cci_two_life(const FirstLife& first, const SecondLife& second);

}  // namespace jcci
