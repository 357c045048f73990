#pragma once

// Device, peripheral, and workload data plus the load-weighted power and
// throughput averages every carbon computation starts from.

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace jcci {

// Power draw at 100/50/10 % CPU and idle, in watts.
struct PowerProfile {
  double p100 = 0.0;
  double p50 = 0.0;
  double p10 = 0.0;
  double p_idle = 0.0;

  // Linear interpolation between the four measured load points.
  double at(double load_fraction) const;
  bool operator==(const PowerProfile&) const = default;
};

struct BenchmarkSpec {
  std::string name;
  std::string unit;  // the "op" of ops-per-second, e.g. Gflops
  double single = 0.0;
  double multi = 0.0;
  // Device count the source table lists for baseline parity, when given.
  std::optional<int> listed_n;
  bool operator==(const BenchmarkSpec&) const = default;
};

struct BatterySpec {
  double capacity_ah = 0.0;
  double nominal_voltage = 0.0;
  std::optional<double> usable_energy_override;  // joules
  double charge_power = 0.0;                     // watts
  double cycle_limit = 0.0;
  double embodied_carbon = 0.0;  // kgCO2e

  double usable_energy() const;
  bool operator==(const BatterySpec&) const = default;
};

enum class Component { kCompute, kNetwork, kBattery, kDisplay, kStorage, kSensors, kOther };

const char* to_string(Component c);
Component component_from_string(const std::string& s);
const std::vector<Component>& all_components();

// Fraction of embodied carbon per component category; fractions sum to 1.
struct ComponentBreakdown {
  std::map<Component, double> fractions;
  // Informational kg column from the source table; not used in any computation.
  std::map<Component, double> listed_kg;
  bool operator==(const ComponentBreakdown&) const = default;
};

struct DeviceProfile {
  std::string key;  // registry identifier, e.g. "pixel_3a"
  std::string name;
  int release_year = 0;
  PowerProfile power;
  std::vector<BenchmarkSpec> benchmarks;
  double embodied_carbon_total = 0.0;  // kgCO2e
  ComponentBreakdown breakdown;
  std::optional<BatterySpec> battery;
  std::optional<double> thermal_power;  // sustained heat per device, watts; defaults to p100
  bool reused_default = true;
  std::string citation;

  const BenchmarkSpec& benchmark(const std::string& name) const;
  const BenchmarkSpec* find_benchmark(const std::string& name) const;
  double heat_watts() const { return thermal_power.value_or(power.p100); }
  bool operator==(const DeviceProfile&) const = default;
};

struct Peripheral {
  std::string key;
  std::string name;
  double embodied_carbon = 0.0;  // kgCO2e
  double active_power = 0.0;     // watts
  std::optional<double> rating;  // watts of heat it can remove, for fans
  std::string citation;
  bool operator==(const Peripheral&) const = default;
};

struct LoadLevel {
  double load_fraction = 0.0;
  double time_fraction = 0.0;
  bool operator==(const LoadLevel&) const = default;
};

struct LoadProfile {
  std::string key;
  std::vector<LoadLevel> levels;
  std::string citation;
  bool operator==(const LoadProfile&) const = default;

  // The 10/35/30/25 % split over 100/50/10/0 % load.
  static LoadProfile light_medium();
  static LoadProfile constant(double load_fraction);
};

// Throw InvariantError naming the record and the rule.
void validate(const PowerProfile& p, const std::string& record);
void validate(const BenchmarkSpec& b, const std::string& record);
void validate(const BatterySpec& b, const std::string& record);
void validate(const ComponentBreakdown& b, const std::string& record);
void validate(const DeviceProfile& d);
void validate(const Peripheral& p);
void validate(const LoadProfile& l);

// Time-weighted average power in watts.
double avg_power(const PowerProfile& power, const LoadProfile& load);
// Average throughput assuming it scales linearly with CPU load; idle contributes nothing.
double avg_ops_rate(const BenchmarkSpec& bench, const LoadProfile& load);

// Immutable after construction; safe for concurrent readers.
class Registry {
 public:
  Registry() = default;
  Registry(std::vector<DeviceProfile> devices, std::vector<Peripheral> peripherals, std::vector<LoadProfile> loads);

  const std::vector<DeviceProfile>& devices() const { return devices_; }
  const std::vector<Peripheral>& peripherals() const { return peripherals_; }
  const std::vector<LoadProfile>& load_profiles() const { return loads_; }

  const DeviceProfile& device(const std::string& key) const;
  const Peripheral& peripheral(const std::string& key) const;
  const LoadProfile& load_profile(const std::string& key) const;
  const DeviceProfile* find_device(const std::string& key) const;
  const Peripheral* find_peripheral(const std::string& key) const;
  const LoadProfile* find_load_profile(const std::string& key) const;

  bool operator==(const Registry&) const = default;

 private:
  std::vector<DeviceProfile> devices_;
  std::vector<Peripheral> peripherals_;
  std::vector<LoadProfile> loads_;
};

Registry load_registry(const std::string& path);
Registry parse_registry(const std::string& text, const std::string& source = "<string>");
std::string serialize(const Registry& registry);

// Registry path precedence: explicit flag, JCCI_REGISTRY, the bundled default.
std::string default_registry_path();

}  // namespace jcci
