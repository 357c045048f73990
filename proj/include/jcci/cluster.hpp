#pragma once

// Cloudlet and datacenter designs built from a device type: sizing against a
// baseline, peripherals, topology, cluster/datacenter CCI, PUE, per-query
// carbon, and deployment cost.

#include <optional>
#include <string>
#include <vector>

#include "jcci/carbon.hpp"
#include "jcci/registry.hpp"
#include "jcci/textconf.hpp"

namespace jcci {

// ceil(baseline.multi / device.multi).
int size_cluster(const BenchmarkSpec& baseline_bench, const BenchmarkSpec& device_bench);

enum class Topology { kWired, kTree };
const char* to_string(Topology t);

struct TopologySpec {
  Topology kind = Topology::kWired;
  int group_size = 5;  // tree only
};

// Per-device share of a WiFi access point's bandwidth in a tree of hotspots.
inline constexpr double kDefaultSharingFactor = 150.0 / 18.5;
double tree_bandwidth(double wifi_bw, double sharing_factor = kDefaultSharingFactor);

enum class PeripheralRule {
  kFixed,      // count = value
  kPerDevice,  // count = ceil(N * value)
  kThermal,    // count = provision_fans(N * heat per device)
};

struct PeripheralSpec {
  Peripheral peripheral;
  PeripheralRule rule = PeripheralRule::kFixed;
  double value = 0.0;
  // Only needed to run smart charging; dropped when batteries are not in use.
  bool charging_only = false;
};

enum class SizingRule {
  kListed,  // table-listed N when present, ceil otherwise
  kCeil,
};

struct ClusterDesign {
  std::string key;
  std::string name;
  DeviceProfile device;
  Mode mode = Mode::kReused;
  std::optional<int> n_devices;  // fixed size; otherwise sized per benchmark
  SizingRule sizing = SizingRule::kListed;
  double mgmt_fraction = 0.0;
  std::vector<PeripheralSpec> peripherals;
  TopologySpec topology;
  double smart_charging_savings = 0.0;
  double f_net = 0.0;  // bytes/s for the whole cluster
  std::optional<double> ei_net;  // J/byte; WiFi for wired, LTE for tree when unset
  std::optional<DeviceProfile> baseline;
};

void validate(const ClusterDesign& d);

// Power regime: grid intensity and whether batteries (and charging gear) are in play.
struct Regime {
  std::string name;
  double ci = 0.0;  // gCO2e/kWh
  bool charging = true;
};
Regime regime_from_string(const std::string& name);

struct SizedCluster {
  int n = 0;
  int computed_n = 0;             // ceil rule, 0 without a baseline
  std::optional<int> listed_n;     // table value when it was used
  bool overridden = false;        // listed_n differs from computed_n
  std::vector<int> peripheral_counts;  // parallel to design.peripherals
};

// Number of devices and peripherals for one benchmark. Charging-only
// peripherals get count 0 when charging is false.
SizedCluster resolve(const ClusterDesign& design, const std::string& bench, bool charging = true);
SizedCluster resolve_fixed(const ClusterDesign& design, int n, bool charging = true);

double network_ei(const ClusterDesign& design);

// Wall power: devices (after smart-charging savings when applied) plus peripherals; excludes networking.
double cluster_power(const ClusterDesign& design, const SizedCluster& sized, const LoadProfile& load,
                     bool apply_savings = true);

// Batteries per device over the lifetime plus peripheral embodied for reused
// designs; N device totals plus peripherals for new designs.
double cluster_embodied(const ClusterDesign& design, const SizedCluster& sized, const LoadProfile& load, double lifetime,
                        bool charging = true);

double cluster_compute_carbon(const ClusterDesign& design, const SizedCluster& sized, const LoadProfile& load,
                              double lifetime, double ci, bool apply_savings = true);

CarbonBreakdown cluster_breakdown(const ClusterDesign& design, const SizedCluster& sized, const LoadProfile& load,
                                  double lifetime, const Regime& regime);

// Ops count compute devices only: (1 - mgmt_fraction) * N * avg rate * lifetime.
double cluster_ops(const ClusterDesign& design, const SizedCluster& sized, const LoadProfile& load,
                   const BenchmarkSpec& bench, double lifetime);

std::vector<CCIResult> cluster_cci(const ClusterDesign& design, const LoadProfile& load, const std::string& bench,
                                   const std::vector<double>& lifetimes, const Regime& regime);

// ---- datacenter scale ----

struct DatacenterDesign {
  std::string key;
  ClusterDesign unit;  // must have a fixed n_devices
  long unit_count = 1;
  double rack_units = 1.0;
  double floor_area_per_unit = 0.0;     // m^2
  double lighting_power_density = 0.0;  // W/m^2
  double cooling_overhead = 0.0;        // fraction of IT power
  double space_overhead_cooling = 0.0;  // W/m^2
};

void validate(const DatacenterDesign& dc);

// Physical IT draw of one unit (no smart-charging credit).
double unit_it_power(const DatacenterDesign& dc, const LoadProfile& load);
double pue(const DatacenterDesign& dc, const LoadProfile& load);

struct PueCalibration {
  double cooling_overhead = 0.0;
  double area_per_rack_unit = 0.0;  // m^2
};

// Solves for the cooling fraction and floor area per rack unit that put two
// designs at their target PUEs, given fixed lighting and space-cooling densities.
PueCalibration calibrate_pue(double it_power_a, double rack_units_a, double target_a, double it_power_b,
                             double rack_units_b, double target_b, double lighting_density, double space_cooling_density);

// (C_M + PUE * (C_C + C_N)) / ops, all terms over unit_count units.
CCIResult datacenter_cci(const DatacenterDesign& dc, const LoadProfile& load, const std::string& bench, double lifetime,
                         const Regime& regime);

// ---- per-query comparison and cost ----

struct QueryScenario {
  std::string key;
  std::string name;
  double cluster_throughput = 0.0;  // queries/s
  double rival_throughput = 0.0;
  double cluster_power = 0.0;  // W, whole cluster excluding fans
  double rival_power = 0.0;
  double rival_embodied = 0.0;  // kgCO2e
  double lifetime = 0.0;        // s
  double ci = 0.0;              // gCO2e/kWh
  std::optional<double> reference_ratio;
};

void validate(const QueryScenario& q);

struct QueryComparison {
  double cluster_carbon = 0.0;  // kgCO2e over the lifetime
  double rival_carbon = 0.0;
  double cluster_per_query = 0.0;
  double rival_per_query = 0.0;
  double ratio = 0.0;  // rival / cluster
  bool savings_applied = false;
};

// Cluster: device embodied per design mode (battery replacements for reused),
// peripherals, and operational carbon at the stated power plus peripheral draw.
QueryComparison query_carbon_comparison(const QueryScenario& scenario, const ClusterDesign& cluster,
                                        bool apply_savings);

struct CostBreakdown {
  double hardware = 0.0;
  double energy_kwh = 0.0;
  double energy = 0.0;
  double total() const { return hardware + energy; }
};

CostBreakdown deployment_cost(int n_devices, double unit_price, double wall_power, double energy_price,
                              double lifetime);
double hourly_cost(double hourly_rate, double lifetime);

// ---- files ----

struct DesignFile {
  std::vector<ClusterDesign> designs;
  std::vector<DatacenterDesign> datacenters;
  std::vector<QueryScenario> queries;
  std::vector<std::string> query_designs;  // design key per query
};

// [design.<key>], [design.<key>.peripheral.<peripheral>], [datacenter.<key>], [query.<key>].
DesignFile parse_design_file(const std::string& text, const Registry& registry, const std::string& source = "<string>");
DesignFile load_design_file(const std::string& path, const Registry& registry);

const ClusterDesign& find_design(const DesignFile& file, const std::string& key);

}  // namespace jcci
