#include "jcci/cluster.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "jcci/error.hpp"
#include "jcci/grid.hpp"
#include "jcci/thermal.hpp"
#include "jcci/units.hpp"

namespace jcci {

int size_cluster(const BenchmarkSpec& baseline_bench, const BenchmarkSpec& device_bench) {
  if (!(device_bench.multi > 0.0))
    throw InputError(fmt::format("size_cluster: zero throughput for benchmark '{}'", device_bench.name));
  if (!(baseline_bench.multi > 0.0)) throw InputError("size_cluster: zero baseline throughput");
  return static_cast<int>(std::ceil(baseline_bench.multi / device_bench.multi));
}

const char* to_string(Topology t) { return t == Topology::kTree ? "tree" : "wired"; }

double tree_bandwidth(double wifi_bw, double sharing_factor) {
  if (!(sharing_factor > 0.0)) throw InputError("tree_bandwidth: sharing factor must be > 0");
  return wifi_bw / sharing_factor;
}

void validate(const ClusterDesign& d) {
  const std::string rec = "design " + d.key;
  if (d.n_devices && *d.n_devices < 1) throw InvariantError(rec, "n_devices must be >= 1");
  if (!d.n_devices && !d.baseline) throw InvariantError(rec, "needs n_devices or a baseline to size against");
  if (!(d.mgmt_fraction >= 0.0 && d.mgmt_fraction < 1.0)) throw InvariantError(rec, "mgmt_fraction must be in [0, 1)");
  if (!(d.smart_charging_savings >= 0.0 && d.smart_charging_savings < 1.0))
    throw InvariantError(rec, "smart_charging_savings must be in [0, 1)");
  if (d.f_net < 0.0) throw InvariantError(rec, "f_net must be >= 0");
  if (d.ei_net && *d.ei_net < 0.0) throw InvariantError(rec, "ei_net must be >= 0");
  if (d.topology.kind == Topology::kTree && d.topology.group_size < 1)
    throw InvariantError(rec, "tree group_size must be >= 1");
  for (const auto& p : d.peripherals) {
    if (p.value < 0.0) throw InvariantError(rec, fmt::format("peripheral '{}' count must be >= 0", p.peripheral.key));
    if (p.rule == PeripheralRule::kThermal && !p.peripheral.rating)
      throw InvariantError(rec, fmt::format("peripheral '{}' is provisioned by heat but has no rating", p.peripheral.key));
  }
}

Regime regime_from_string(const std::string& name) {
  if (name == "ca" || name == "california") return {"ca", grid::mix_intensity(grid::named_mix("california")), true};
  if (name == "solar") return {"solar", grid::mix_intensity(grid::named_mix("solar")), false};
  if (name == "zero" || name == "carbon_free") return {"zero", 0.0, false};
  if (name == "gas") return {"gas", grid::mix_intensity(grid::named_mix("gas")), true};
  throw InputError(fmt::format("unknown regime '{}' (expected ca, solar, zero, or gas)", name));
}

namespace {

std::vector<int> peripheral_counts(const ClusterDesign& design, int n, bool charging) {
  std::vector<int> out;
  out.reserve(design.peripherals.size());
  for (const auto& p : design.peripherals) {
    if (p.charging_only && !charging) {
      out.push_back(0);
      continue;
    }
    switch (p.rule) {
      case PeripheralRule::kFixed:
        out.push_back(static_cast<int>(std::llround(p.value)));
        break;
      case PeripheralRule::kPerDevice:
        out.push_back(static_cast<int>(std::ceil(static_cast<double>(n) * p.value)));
        break;
      case PeripheralRule::kThermal:
        out.push_back(thermal::provision_fans(static_cast<double>(n) * design.device.heat_watts(), p.peripheral));
        break;
    }
  }
  return out;
}

double per_device_power(const ClusterDesign& design, const LoadProfile& load) {
  return avg_power(design.device.power, load);
}

double peripheral_embodied(const ClusterDesign& design, const SizedCluster& sized) {
  double kg = 0.0;
  for (size_t i = 0; i < design.peripherals.size(); ++i)
    kg += sized.peripheral_counts[i] * design.peripherals[i].peripheral.embodied_carbon;
  return kg;
}

double peripheral_power(const ClusterDesign& design, const SizedCluster& sized) {
  double w = 0.0;
  for (size_t i = 0; i < design.peripherals.size(); ++i)
    w += sized.peripheral_counts[i] * design.peripherals[i].peripheral.active_power;
  return w;
}

double device_embodied(const ClusterDesign& design, int n, double device_power, double lifetime, bool charging) {
  if (design.mode == Mode::kNew) return n * design.device.embodied_carbon_total;
  if (charging && design.device.battery)
    return n * battery_replacement_carbon(*design.device.battery, device_power, lifetime);
  return 0.0;
}

}  // namespace

SizedCluster resolve_fixed(const ClusterDesign& design, int n, bool charging) {
  if (n < 1) throw InputError(fmt::format("design '{}': cluster size must be >= 1", design.key));
  SizedCluster s;
  s.n = n;
  s.peripheral_counts = peripheral_counts(design, n, charging);
  return s;
}

SizedCluster resolve(const ClusterDesign& design, const std::string& bench, bool charging) {
  SizedCluster s;
  const BenchmarkSpec& dev_bench = design.device.benchmark(bench);
  if (design.baseline) s.computed_n = size_cluster(design.baseline->benchmark(bench), dev_bench);
  if (design.n_devices) {
    s.n = *design.n_devices;
  } else {
    s.n = s.computed_n;
    if (design.sizing == SizingRule::kListed && dev_bench.listed_n) {
      s.listed_n = dev_bench.listed_n;
      s.n = *dev_bench.listed_n;
      s.overridden = s.n != s.computed_n;
    }
  }
  if (s.n < 1) throw InputError(fmt::format("design '{}': cluster size must be >= 1", design.key));
  s.peripheral_counts = peripheral_counts(design, s.n, charging);
  return s;
}

double network_ei(const ClusterDesign& design) {
  if (design.ei_net) return *design.ei_net;
  return design.topology.kind == Topology::kTree ? kLteJoulesPerByte : kWifiJoulesPerByte;
}

double cluster_power(const ClusterDesign& design, const SizedCluster& sized, const LoadProfile& load, bool apply_savings) {
  const double keep = apply_savings ? 1.0 - design.smart_charging_savings : 1.0;
  return sized.n * per_device_power(design, load) * keep + peripheral_power(design, sized);
}

double cluster_embodied(const ClusterDesign& design, const SizedCluster& sized, const LoadProfile& load, double lifetime,
                        bool charging) {
  return device_embodied(design, sized.n, per_device_power(design, load), lifetime, charging) +
         peripheral_embodied(design, sized);
}

double cluster_compute_carbon(const ClusterDesign& design, const SizedCluster& sized, const LoadProfile& load,
                              double lifetime, double ci, bool apply_savings) {
  return compute_carbon(cluster_power(design, sized, load, apply_savings), lifetime, ci);
}

CarbonBreakdown cluster_breakdown(const ClusterDesign& design, const SizedCluster& sized, const LoadProfile& load,
                                  double lifetime, const Regime& regime) {
  CarbonBreakdown b;
  b.c_m = cluster_embodied(design, sized, load, lifetime, regime.charging);
  b.c_c = cluster_compute_carbon(design, sized, load, lifetime, regime.ci, regime.charging);
  b.c_n = network_carbon({design.f_net, network_ei(design)}, lifetime, regime.ci);
  return b;
}

double cluster_ops(const ClusterDesign& design, const SizedCluster& sized, const LoadProfile& load,
                   const BenchmarkSpec& bench, double lifetime) {
  const double compute_units = (1.0 - design.mgmt_fraction) * sized.n;
  return compute_units * avg_ops_rate(bench, load) * lifetime;
}

std::vector<CCIResult> cluster_cci(const ClusterDesign& design, const LoadProfile& load, const std::string& bench,
                                   const std::vector<double>& lifetimes, const Regime& regime) {
  validate(design);
  const SizedCluster sized = resolve(design, bench, regime.charging);
  const BenchmarkSpec& spec = design.device.benchmark(bench);
  std::vector<CCIResult> out;
  out.reserve(lifetimes.size());
  for (double life : lifetimes) {
    const auto b = cluster_breakdown(design, sized, load, life, regime);
    out.push_back(make_cci(b, life, cluster_ops(design, sized, load, spec, life), spec.unit));
  }
  return out;
}

// ---- datacenter ----

void validate(const DatacenterDesign& dc) {
  const std::string rec = "datacenter " + dc.key;
  validate(dc.unit);
  if (!dc.unit.n_devices) throw InvariantError(rec, "unit design needs a fixed n_devices");
  if (dc.unit_count < 1) throw InvariantError(rec, "unit_count must be >= 1");
  if (dc.floor_area_per_unit < 0.0 || dc.lighting_power_density < 0.0 || dc.cooling_overhead < 0.0 ||
      dc.space_overhead_cooling < 0.0)
    throw InvariantError(rec, "areas, densities, and overheads must be >= 0");
}

double unit_it_power(const DatacenterDesign& dc, const LoadProfile& load) {
  const auto sized = resolve_fixed(dc.unit, dc.unit.n_devices.value_or(1), true);
  return cluster_power(dc.unit, sized, load, false);
}

double pue(const DatacenterDesign& dc, const LoadProfile& load) {
  const double p_it = unit_it_power(dc, load);
  if (!(p_it > 0.0)) throw ModelError(fmt::format("pue: datacenter '{}' has zero IT power", dc.key));
  const double area = dc.floor_area_per_unit;
  const double cooling = dc.cooling_overhead * p_it + dc.space_overhead_cooling * area;
  const double lighting = dc.lighting_power_density * area;
  return (p_it + cooling + lighting) / p_it;
}

PueCalibration calibrate_pue(double it_power_a, double rack_units_a, double target_a, double it_power_b,
                             double rack_units_b, double target_b, double lighting_density, double space_cooling_density) {
  if (!(it_power_a > 0.0) || !(it_power_b > 0.0)) throw InputError("calibrate_pue: IT power must be > 0");
  const double k = lighting_density + space_cooling_density;
  const double da = rack_units_a / it_power_a;
  const double db = rack_units_b / it_power_b;
  if (!(k > 0.0) || da == db) throw ModelError("calibrate_pue: designs are indistinguishable by area per watt");
  PueCalibration c;
  c.area_per_rack_unit = (target_b - target_a) / (k * (db - da));
  c.cooling_overhead = target_a - 1.0 - k * c.area_per_rack_unit * da;
  if (!(c.area_per_rack_unit >= 0.0) || !(c.cooling_overhead >= 0.0))
    throw ModelError(fmt::format("calibrate_pue: no nonnegative solution (area/RU {:.4g}, cooling {:.4g})",
                                 c.area_per_rack_unit, c.cooling_overhead));
  return c;
}

CCIResult datacenter_cci(const DatacenterDesign& dc, const LoadProfile& load, const std::string& bench, double lifetime,
                         const Regime& regime) {
  validate(dc);
  const auto sized = resolve(dc.unit, bench, regime.charging);
  const double ratio = pue(dc, load);
  const double count = static_cast<double>(dc.unit_count);
  const auto unit = cluster_breakdown(dc.unit, sized, load, lifetime, regime);
  CarbonBreakdown b;
  b.c_m = count * unit.c_m;
  b.c_c = count * ratio * unit.c_c;
  b.c_n = count * ratio * unit.c_n;
  const auto& spec = dc.unit.device.benchmark(bench);
  return make_cci(b, lifetime, count * cluster_ops(dc.unit, sized, load, spec, lifetime), spec.unit);
}

// ---- queries and cost ----

void validate(const QueryScenario& q) {
  const std::string rec = "query " + q.key;
  if (!(q.cluster_throughput > 0.0) || !(q.rival_throughput > 0.0)) throw InvariantError(rec, "throughputs must be > 0");
  if (q.cluster_power < 0.0 || q.rival_power < 0.0 || q.rival_embodied < 0.0 || q.ci < 0.0)
    throw InvariantError(rec, "powers, embodied carbon, and ci must be >= 0");
  if (!(q.lifetime > 0.0)) throw InvariantError(rec, "lifetime must be > 0");
}

QueryComparison query_carbon_comparison(const QueryScenario& scenario, const ClusterDesign& cluster,
                                        bool apply_savings) {
  validate(scenario);
  validate(cluster);
  if (!cluster.n_devices) throw InputError(fmt::format("query cluster '{}' needs a fixed n_devices", cluster.key));
  const auto sized = resolve_fixed(cluster, *cluster.n_devices, true);
  const double n = sized.n;
  const double device_power = scenario.cluster_power / n;
  const double keep = apply_savings ? 1.0 - cluster.smart_charging_savings : 1.0;

  QueryComparison q;
  q.savings_applied = apply_savings;
  const double embodied =
      device_embodied(cluster, sized.n, device_power, scenario.lifetime, true) + peripheral_embodied(cluster, sized);
  const double power = scenario.cluster_power * keep + peripheral_power(cluster, sized);
  q.cluster_carbon = embodied + compute_carbon(power, scenario.lifetime, scenario.ci);
  q.rival_carbon = scenario.rival_embodied + compute_carbon(scenario.rival_power, scenario.lifetime, scenario.ci);
  q.cluster_per_query = q.cluster_carbon / (scenario.cluster_throughput * scenario.lifetime);
  q.rival_per_query = q.rival_carbon / (scenario.rival_throughput * scenario.lifetime);
  if (!(q.cluster_per_query > 0.0)) throw ModelError("query comparison: cluster carbon is zero");
  q.ratio = q.rival_per_query / q.cluster_per_query;
  return q;
}

CostBreakdown deployment_cost(int n_devices, double unit_price, double wall_power, double energy_price,
                              double lifetime) {
  if (unit_price < 0.0 || energy_price < 0.0) throw InputError("deployment_cost: prices must be >= 0");
  if (n_devices < 0 || wall_power < 0.0 || lifetime < 0.0) throw InputError("deployment_cost: negative quantity");
  CostBreakdown c;
  c.hardware = n_devices * unit_price;
  c.energy_kwh = wall_power * lifetime / units::kJoulesPerKwh;
  c.energy = c.energy_kwh * energy_price;
  return c;
}

double hourly_cost(double hourly_rate, double lifetime) {
  if (hourly_rate < 0.0) throw InputError("hourly_cost: rate must be >= 0");
  return hourly_rate * units::to_hours(lifetime);
}

// ---- files ----

namespace {

ClusterDesign parse_design(const textconf::Section& s, const Registry& reg, const std::string& source) {
  ClusterDesign d;
  d.key = s.parts()[1];
  d.name = s.opt_string("name").value_or(d.key);
  const auto dev_key = s.string("device");
  const auto* dev = reg.find_device(dev_key);
  if (dev == nullptr) throw ParseError(source, s.line(), "device", fmt::format("unknown device '{}'", dev_key));
  d.device = *dev;
  d.mode = s.has("mode") ? mode_from_string(s.string("mode")) : (dev->reused_default ? Mode::kReused : Mode::kNew);
  if (auto n = s.opt_number("n_devices")) {
    if (*n != std::floor(*n)) throw ParseError(source, s.line(), "n_devices", "must be an integer");
    d.n_devices = static_cast<int>(*n);
  }
  const auto sizing = s.opt_string("sizing").value_or("listed");
  if (sizing == "listed") {
    d.sizing = SizingRule::kListed;
  } else if (sizing == "ceil") {
    d.sizing = SizingRule::kCeil;
  } else {
    throw ParseError(source, s.line(), "sizing", "expected \"listed\" or \"ceil\"");
  }
  d.mgmt_fraction = s.opt_number("mgmt_fraction").value_or(0.0);
  d.smart_charging_savings = s.opt_number("smart_charging_savings").value_or(0.0);
  const auto topo = s.opt_string("topology").value_or("wired");
  if (topo == "wired") {
    d.topology.kind = Topology::kWired;
  } else if (topo == "tree") {
    d.topology.kind = Topology::kTree;
  } else {
    throw ParseError(source, s.line(), "topology", "expected \"wired\" or \"tree\"");
  }
  d.topology.group_size = static_cast<int>(s.opt_number("group_size").value_or(5));
  d.f_net = s.opt_number("f_net_gbps").value_or(0.0) * 1e9 / 8.0;
  d.ei_net = s.opt_number("ei_net_j_per_byte");
  if (auto b = s.opt_string("baseline")) {
    const auto* base = reg.find_device(*b);
    if (base == nullptr) throw ParseError(source, s.line(), "baseline", fmt::format("unknown device '{}'", *b));
    d.baseline = *base;
  }
  s.reject_unread();
  return d;
}

PeripheralSpec parse_peripheral(const textconf::Section& s, const Registry& reg, const std::string& source) {
  PeripheralSpec p;
  const auto key = s.parts()[3];
  const auto* per = reg.find_peripheral(key);
  if (per == nullptr) throw ParseError(source, s.line(), s.path(), fmt::format("unknown peripheral '{}'", key));
  p.peripheral = *per;
  int rules = 0;
  if (auto c = s.opt_number("count")) {
    p.rule = PeripheralRule::kFixed;
    p.value = *c;
    ++rules;
  }
  if (auto r = s.opt_number("per_device")) {
    p.rule = PeripheralRule::kPerDevice;
    p.value = *r;
    ++rules;
  }
  if (s.boolean("thermal", false)) {
    p.rule = PeripheralRule::kThermal;
    ++rules;
  }
  if (rules != 1) throw ParseError(source, s.line(), s.path(), "set exactly one of count, per_device, thermal");
  p.charging_only = s.boolean("charging_only", false);
  s.reject_unread();
  return p;
}

}  // namespace

DesignFile parse_design_file(const std::string& text, const Registry& registry, const std::string& source) {
  const auto doc = textconf::Document::parse(text, source);
  DesignFile out;
  std::map<std::string, size_t> index;

  for (const auto& s : doc.sections()) {
    const auto parts = s.parts();
    if (parts[0] == "design" && parts.size() == 2) {
      if (index.count(parts[1])) throw ParseError(source, s.line(), s.path(), "duplicate design");
      index[parts[1]] = out.designs.size();
      out.designs.push_back(parse_design(s, registry, source));
    } else if (parts[0] != "design" && parts[0] != "datacenter" && parts[0] != "query") {
      throw ParseError(source, s.line(), s.path(), fmt::format("unknown record kind '{}'", parts[0]));
    }
  }
  for (const auto& s : doc.sections()) {
    const auto parts = s.parts();
    if (parts[0] != "design" || parts.size() == 2) continue;
    if (parts.size() != 4 || parts[2] != "peripheral")
      throw ParseError(source, s.line(), s.path(), "expected [design.<key>.peripheral.<peripheral>]");
    const auto it = index.find(parts[1]);
    if (it == index.end()) throw ParseError(source, s.line(), s.path(), "peripheral for an undefined design");
    out.designs[it->second].peripherals.push_back(parse_peripheral(s, registry, source));
  }
  for (const auto& d : out.designs) validate(d);

  auto design_ref = [&](const textconf::Section& s) -> const ClusterDesign& {
    const auto key = s.string("design");
    const auto it = index.find(key);
    if (it == index.end()) throw ParseError(source, s.line(), "design", fmt::format("unknown design '{}'", key));
    return out.designs[it->second];
  };

  for (const auto* s : doc.of_kind("datacenter")) {
    const auto parts = s->parts();
    if (parts.size() != 2) throw ParseError(source, s->line(), s->path(), "expected [datacenter.<key>]");
    DatacenterDesign dc;
    dc.key = parts[1];
    dc.unit = design_ref(*s);
    dc.unit_count = static_cast<long>(s->number("unit_count"));
    dc.rack_units = s->opt_number("rack_units").value_or(1.0);
    if (auto a = s->opt_number("floor_area_m2")) {
      dc.floor_area_per_unit = *a;
    } else {
      dc.floor_area_per_unit = dc.rack_units * s->number("area_per_rack_unit_m2");
    }
    dc.lighting_power_density = s->number("lighting_w_per_m2");
    dc.cooling_overhead = s->number("cooling_overhead");
    dc.space_overhead_cooling = s->number("space_cooling_w_per_m2");
    s->reject_unread();
    validate(dc);
    out.datacenters.push_back(std::move(dc));
  }

  for (const auto* s : doc.of_kind("query")) {
    const auto parts = s->parts();
    if (parts.size() != 2) throw ParseError(source, s->line(), s->path(), "expected [query.<key>]");
    QueryScenario q;
    q.key = parts[1];
    q.name = s->opt_string("name").value_or(q.key);
    out.query_designs.push_back(design_ref(*s).key);
    q.cluster_throughput = s->number("cluster_qps");
    q.rival_throughput = s->number("rival_qps");
    q.cluster_power = s->number("cluster_power_w");
    q.rival_power = s->number("rival_power_w");
    q.rival_embodied = s->number("rival_embodied_kgco2e");
    q.lifetime = units::years(s->number("lifetime_years"));
    if (auto ci = s->opt_number("ci_gco2e_kwh")) {
      q.ci = *ci;
    } else {
      q.ci = grid::mix_intensity(grid::named_mix(s->opt_string("mix").value_or("california")));
    }
    q.reference_ratio = s->opt_number("reference_ratio");
    s->reject_unread();
    validate(q);
    out.queries.push_back(std::move(q));
  }
  return out;
}

DesignFile load_design_file(const std::string& path, const Registry& registry) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open design file '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_design_file(ss.str(), registry, path);
}

const ClusterDesign& find_design(const DesignFile& file, const std::string& key) {
  for (const auto& d : file.designs)
    if (d.key == key) return d;
  throw InputError(fmt::format("no design '{}'", key));
}

}  // namespace jcci
