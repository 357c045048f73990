#include "jcci/registry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <set>

#include "jcci/error.hpp"
#include "jcci/textconf.hpp"

#ifndef JCCI_DATA_DIR
#define JCCI_DATA_DIR "data"
#endif

namespace jcci {

namespace {

constexpr double kSumTolerance = 1e-9;

struct LoadPoint {
  double load;
  double watts;
};

}  // namespace

double PowerProfile::at(double load_fraction) const {
  if (!(load_fraction >= 0.0 && load_fraction <= 1.0)) {
    throw InputError("load fraction " + textconf::format_number(load_fraction) + " outside [0,1]");
  }
  const LoadPoint pts[] = {{0.0, p_idle}, {0.1, p10}, {0.5, p50}, {1.0, p100}};
  for (const auto& p : pts) {
    if (load_fraction == p.load) return p.watts;
  }
  for (size_t i = 1; i < std::size(pts); ++i) {
    if (load_fraction < pts[i].load) {
      const auto& lo = pts[i - 1];
      const auto& hi = pts[i];
      double t = (load_fraction - lo.load) / (hi.load - lo.load);
      return lo.watts + t * (hi.watts - lo.watts);
    }
  }
  return p100;
}

double BatterySpec::usable_energy() const {
  if (usable_energy_override) return *usable_energy_override;
  return capacity_ah * 3600.0 * nominal_voltage;
}

static const std::vector<std::pair<Component, const char*>>& component_names() {
  static const std::vector<std::pair<Component, const char*>> names = {
      {Component::kCompute, "compute"}, {Component::kNetwork, "network"}, {Component::kBattery, "battery"},
      {Component::kDisplay, "display"}, {Component::kStorage, "storage"}, {Component::kSensors, "sensors"},
      {Component::kOther, "other"}};
  return names;
}

const char* to_string(Component c) {
  for (const auto& [k, n] : component_names()) {
    if (k == c) return n;
  }
  return "?";
}

Component component_from_string(const std::string& s) {
  for (const auto& [k, n] : component_names()) {
    if (s == n) return k;
  }
  throw InputError("unknown component category '" + s + "'");
}

const std::vector<Component>& all_components() {
  static const std::vector<Component> all = [] {
    std::vector<Component> v;
    for (const auto& [k, n] : component_names()) v.push_back(k);
    return v;
  }();
  return all;
}

const BenchmarkSpec* DeviceProfile::find_benchmark(const std::string& bench) const {
  for (const auto& b : benchmarks) {
    if (b.name == bench) return &b;
  }
  return nullptr;
}

const BenchmarkSpec& DeviceProfile::benchmark(const std::string& bench) const {
  if (const auto* b = find_benchmark(bench)) return *b;
  throw InputError("device '" + key + "' has no benchmark '" + bench + "'");
}

LoadProfile LoadProfile::light_medium() {
  return LoadProfile{"light_medium", {{1.0, 0.10}, {0.5, 0.35}, {0.1, 0.30}, {0.0, 0.25}}, "Dell R740 LCA light-medium regime"};
}

LoadProfile LoadProfile::constant(double load_fraction) {
  return LoadProfile{"constant", {{load_fraction, 1.0}}, ""};
}

// ---------------------------------------------------------------------------
// Validation

void validate(const PowerProfile& p, const std::string& record) {
  const std::string rec = record + " PowerProfile";
  for (double w : {p.p100, p.p50, p.p10, p.p_idle}) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvariantError(rec, "power values must be finite and >= 0");
  }
  if (!(p.p100 >= p.p50 && p.p50 >= p.p10 && p.p10 >= p.p_idle)) {
    throw InvariantError(rec, "p100 >= p50 >= p10 >= p_idle (monotone in load)");
  }
}

void validate(const BenchmarkSpec& b, const std::string& record) {
  const std::string rec = record + " benchmark " + b.name;
  if (b.name.empty()) throw InvariantError(rec, "benchmark name must be non-empty");
  if (!(b.single > 0.0)) throw InvariantError(rec, "single > 0");
  if (!(b.multi >= b.single)) throw InvariantError(rec, "multi >= single");
  if (b.listed_n && *b.listed_n < 1) throw InvariantError(rec, "listed_n >= 1");
}

void validate(const BatterySpec& b, const std::string& record) {
  const std::string rec = record + " BatterySpec";
  if (!(b.usable_energy() > 0.0)) throw InvariantError(rec, "usable_energy > 0");
  if (!(b.cycle_limit > 0.0)) throw InvariantError(rec, "cycle_limit > 0");
  if (!(b.charge_power >= 0.0)) throw InvariantError(rec, "charge_power >= 0");
  if (!(b.embodied_carbon >= 0.0)) throw InvariantError(rec, "embodied_carbon >= 0");
  if (!(b.capacity_ah >= 0.0 && b.nominal_voltage >= 0.0)) throw InvariantError(rec, "capacity and voltage >= 0");
}

void validate(const ComponentBreakdown& b, const std::string& record) {
  const std::string rec = record + " ComponentBreakdown";
  if (b.fractions.empty()) throw InvariantError(rec, "at least one component");
  long double sum = 0.0L;
  for (const auto& [c, f] : b.fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw InvariantError(rec, std::string(to_string(c)) + " fraction in [0,1]");
    sum += f;
  }
  if (std::fabs(static_cast<double>(sum) - 1.0) > kSumTolerance) throw InvariantError(rec, "fractions sum to 1");
}

void validate(const DeviceProfile& d) {
  const std::string rec = "device." + d.key;
  if (d.key.empty()) throw InvariantError(rec, "key must be non-empty");
  validate(d.power, rec);
  std::set<std::string> names;
  for (const auto& b : d.benchmarks) {
    validate(b, rec);
    if (!names.insert(b.name).second) throw InvariantError(rec, "duplicate benchmark " + b.name);
  }
  if (!(d.embodied_carbon_total >= 0.0)) throw InvariantError(rec, "embodied_carbon_total >= 0");
  validate(d.breakdown, rec);
  if (d.battery) validate(*d.battery, rec);
  if (d.thermal_power && !(*d.thermal_power >= 0.0)) throw InvariantError(rec, "thermal_w >= 0");
}

void validate(const Peripheral& p) {
  const std::string rec = "peripheral." + p.key;
  if (!(p.embodied_carbon >= 0.0)) throw InvariantError(rec, "embodied_carbon >= 0");
  if (!(p.active_power >= 0.0)) throw InvariantError(rec, "active_power >= 0");
  if (p.rating && !(*p.rating > 0.0)) throw InvariantError(rec, "rating > 0 when present");
}

void validate(const LoadProfile& l) {
  const std::string rec = "load_profile." + l.key;
  if (l.levels.empty()) throw InvariantError(rec, "at least one load level");
  long double sum = 0.0L;
  std::set<double> seen;
  for (const auto& lv : l.levels) {
    if (!(lv.load_fraction >= 0.0 && lv.load_fraction <= 1.0)) throw InvariantError(rec, "load fraction in [0,1]");
    if (!(lv.time_fraction >= 0.0 && lv.time_fraction <= 1.0)) throw InvariantError(rec, "time fraction in [0,1]");
    if (!seen.insert(lv.load_fraction).second) throw InvariantError(rec, "load fractions distinct");
    sum += lv.time_fraction;
  }
  if (std::fabs(static_cast<double>(sum) - 1.0) > kSumTolerance) throw InvariantError(rec, "time fractions sum to 1");
}

// ---------------------------------------------------------------------------

double avg_power(const PowerProfile& power, const LoadProfile& load) {
  double watts = 0.0;
  for (const auto& lv : load.levels) watts += lv.time_fraction * power.at(lv.load_fraction);
  return watts;
}

double avg_ops_rate(const BenchmarkSpec& bench, const LoadProfile& load) {
  double busy = 0.0;
  for (const auto& lv : load.levels) {
    if (!(lv.load_fraction >= 0.0 && lv.load_fraction <= 1.0)) throw InputError("load fraction outside [0,1]");
    busy += lv.time_fraction * lv.load_fraction;
  }
  return bench.multi * busy;
}

// ---------------------------------------------------------------------------
// Registry

Registry::Registry(std::vector<DeviceProfile> devices, std::vector<Peripheral> peripherals, std::vector<LoadProfile> loads)
    : devices_(std::move(devices)), peripherals_(std::move(peripherals)), loads_(std::move(loads)) {
  std::set<std::string> keys;
  for (const auto& d : devices_) {
    validate(d);
    if (!keys.insert("device." + d.key).second) throw InvariantError("device." + d.key, "duplicate key");
  }
  for (const auto& p : peripherals_) {
    validate(p);
    if (!keys.insert("peripheral." + p.key).second) throw InvariantError("peripheral." + p.key, "duplicate key");
  }
  for (const auto& l : loads_) {
    validate(l);
    if (!keys.insert("load_profile." + l.key).second) throw InvariantError("load_profile." + l.key, "duplicate key");
  }
}

const DeviceProfile* Registry::find_device(const std::string& key) const {
  auto it = std::find_if(devices_.begin(), devices_.end(), [&](const auto& d) { return d.key == key; });
  return it == devices_.end() ? nullptr : &*it;
}

const Peripheral* Registry::find_peripheral(const std::string& key) const {
  auto it = std::find_if(peripherals_.begin(), peripherals_.end(), [&](const auto& p) { return p.key == key; });
  return it == peripherals_.end() ? nullptr : &*it;
}

const LoadProfile* Registry::find_load_profile(const std::string& key) const {
  auto it = std::find_if(loads_.begin(), loads_.end(), [&](const auto& l) { return l.key == key; });
  return it == loads_.end() ? nullptr : &*it;
}

const DeviceProfile& Registry::device(const std::string& key) const {
  if (const auto* d = find_device(key)) return *d;
  throw InputError("unknown device '" + key + "'");
}

const Peripheral& Registry::peripheral(const std::string& key) const {
  if (const auto* p = find_peripheral(key)) return *p;
  throw InputError("unknown peripheral '" + key + "'");
}

const LoadProfile& Registry::load_profile(const std::string& key) const {
  if (const auto* l = find_load_profile(key)) return *l;
  throw InputError("unknown load profile '" + key + "'");
}

namespace {

using textconf::Section;

void parse_device_sub(DeviceProfile& d, const Section& s, const std::vector<std::string>& parts,
                      const std::string& source) {
  const std::string& sub = parts[2];
  if (sub == "benchmark" && parts.size() == 4) {
    BenchmarkSpec b;
    b.name = parts[3];
    b.unit = s.string("unit");
    b.single = s.number("single");
    b.multi = s.number("multi");
    if (auto n = s.opt_number("listed_n")) b.listed_n = static_cast<int>(*n);
    d.benchmarks.push_back(std::move(b));
  } else if (sub == "battery" && parts.size() == 3) {
    BatterySpec b;
    b.capacity_ah = s.number("capacity_ah");
    b.nominal_voltage = s.number("nominal_voltage_v");
    b.usable_energy_override = s.opt_number("usable_energy_j");
    b.charge_power = s.number("charge_power_w");
    b.cycle_limit = s.number("cycle_limit");
    b.embodied_carbon = s.number("embodied_kgco2e");
    d.battery = b;
  } else if (sub == "breakdown" && parts.size() == 3) {
    d.breakdown.fractions.clear();
    for (Component c : all_components()) {
      std::string name = to_string(c);
      if (auto f = s.opt_number(name)) d.breakdown.fractions[c] = *f;
      if (auto kg = s.opt_number(name + "_kg")) d.breakdown.listed_kg[c] = *kg;
    }
  } else {
    throw ParseError(source, s.line(), "", "unknown device subsection [" + s.path() + "]");
  }
  s.reject_unread();
}

}  // namespace

Registry parse_registry(const std::string& text, const std::string& source) {
  auto doc = textconf::Document::parse(text, source);
  if (doc.sections().empty()) throw InputError(source + ": no records");

  std::vector<DeviceProfile> devices;
  std::vector<Peripheral> peripherals;
  std::vector<LoadProfile> loads;

  auto device_by_key = [&](const std::string& key) -> DeviceProfile* {
    for (auto& d : devices) {
      if (d.key == key) return &d;
    }
    return nullptr;
  };

  // Top-level records first so subsections may appear anywhere.
  for (const auto& s : doc.sections()) {
    auto parts = s.parts();
    const std::string& kind = parts[0];
    if (kind != "device" && kind != "peripheral" && kind != "load_profile") {
      throw ParseError(source, s.line(), "", "unknown section kind '" + kind + "'");
    }
    if (parts.size() < 2) throw ParseError(source, s.line(), "", "section [" + s.path() + "] needs a record name");
    if (parts.size() != 2) continue;
    if (kind == "device") {
      DeviceProfile d;
      d.key = parts[1];
      d.name = s.opt_string("name").value_or(d.key);
      d.release_year = static_cast<int>(s.opt_number("release_year").value_or(0));
      d.power = PowerProfile{s.number("p100_w"), s.number("p50_w"), s.number("p10_w"), s.number("p_idle_w")};
      d.embodied_carbon_total = s.number("embodied_kgco2e");
      d.thermal_power = s.opt_number("thermal_w");
      d.reused_default = s.boolean("reused_default", true);
      d.citation = s.opt_string("citation").value_or("");
      d.breakdown.fractions = {{Component::kOther, 1.0}};
      s.reject_unread();
      devices.push_back(std::move(d));
    } else if (kind == "peripheral") {
      Peripheral p;
      p.key = parts[1];
      p.name = s.opt_string("name").value_or(p.key);
      p.embodied_carbon = s.number("embodied_kgco2e");
      p.active_power = s.number("active_power_w");
      p.rating = s.opt_number("rating_w");
      p.citation = s.opt_string("citation").value_or("");
      s.reject_unread();
      peripherals.push_back(std::move(p));
    } else {
      LoadProfile l;
      l.key = parts[1];
      auto lf = s.numbers("load_fractions");
      auto tf = s.numbers("time_fractions");
      if (lf.size() != tf.size()) throw ParseError(source, s.line(), "time_fractions", "length differs from load_fractions");
      for (size_t i = 0; i < lf.size(); ++i) l.levels.push_back({lf[i], tf[i]});
      l.citation = s.opt_string("citation").value_or("");
      s.reject_unread();
      loads.push_back(std::move(l));
    }
  }

  for (const auto& s : doc.sections()) {
    auto parts = s.parts();
    if (parts.size() <= 2) continue;
    if (parts[0] != "device") throw ParseError(source, s.line(), "", "unexpected subsection [" + s.path() + "]");
    DeviceProfile* d = device_by_key(parts[1]);
    if (d == nullptr) throw ParseError(source, s.line(), "", "subsection for undeclared device '" + parts[1] + "'");
    parse_device_sub(*d, s, parts, source);
  }

  return Registry(std::move(devices), std::move(peripherals), std::move(loads));
}

Registry load_registry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open registry '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_registry(ss.str(), path);
}

std::string serialize(const Registry& registry) {
  textconf::Writer w;
  for (const auto& d : registry.devices()) {
    w.section("device." + d.key);
    w.string("name", d.name);
    w.number("release_year", d.release_year);
    w.number("p100_w", d.power.p100);
    w.number("p50_w", d.power.p50);
    w.number("p10_w", d.power.p10);
    w.number("p_idle_w", d.power.p_idle);
    w.number("embodied_kgco2e", d.embodied_carbon_total);
    if (d.thermal_power) w.number("thermal_w", *d.thermal_power);
    w.boolean("reused_default", d.reused_default);
    if (!d.citation.empty()) w.string("citation", d.citation);
    for (const auto& b : d.benchmarks) {
      w.section("device." + d.key + ".benchmark." + b.name);
      w.string("unit", b.unit);
      w.number("single", b.single);
      w.number("multi", b.multi);
      if (b.listed_n) w.number("listed_n", *b.listed_n);
    }
    if (d.battery) {
      const auto& b = *d.battery;
      w.section("device." + d.key + ".battery");
      w.number("capacity_ah", b.capacity_ah);
      w.number("nominal_voltage_v", b.nominal_voltage);
      if (b.usable_energy_override) w.number("usable_energy_j", *b.usable_energy_override);
      w.number("charge_power_w", b.charge_power);
      w.number("cycle_limit", b.cycle_limit);
      w.number("embodied_kgco2e", b.embodied_carbon);
    }
    w.section("device." + d.key + ".breakdown");
    for (const auto& [c, f] : d.breakdown.fractions) w.number(to_string(c), f);
    for (const auto& [c, kg] : d.breakdown.listed_kg) w.number(std::string(to_string(c)) + "_kg", kg);
  }
  for (const auto& p : registry.peripherals()) {
    w.section("peripheral." + p.key);
    w.string("name", p.name);
    w.number("embodied_kgco2e", p.embodied_carbon);
    w.number("active_power_w", p.active_power);
    if (p.rating) w.number("rating_w", *p.rating);
    if (!p.citation.empty()) w.string("citation", p.citation);
  }
  for (const auto& l : registry.load_profiles()) {
    w.section("load_profile." + l.key);
    std::vector<double> lf, tf;
    for (const auto& lv : l.levels) {
      lf.push_back(lv.load_fraction);
      tf.push_back(lv.time_fraction);
    }
    w.numbers("load_fractions", lf);
    w.numbers("time_fractions", tf);
    if (!l.citation.empty()) w.string("citation", l.citation);
  }
  return w.str();
}

std::string default_registry_path() {
  if (const char* env = std::getenv("JCCI_REGISTRY"); env != nullptr && *env != '\0') return env;
  return std::string(JCCI_DATA_DIR) + "/registry.conf";
}

}  // namespace jcci
