#include "jcci/carbon.hpp"

#include <cmath>

#include "jcci/error.hpp"
#include "jcci/units.hpp"

namespace jcci {

Mode mode_from_string(const std::string& s) {
  if (s == "new") return Mode::kNew;
  if (s == "reused") return Mode::kReused;
  throw InputError("mode must be 'new' or 'reused', got '" + s + "'");
}

const char* to_string(Mode m) { return m == Mode::kNew ? "new" : "reused"; }

double compute_carbon(double avg_power, double lifetime, double ci) {
  if (avg_power < 0.0 || lifetime < 0.0 || ci < 0.0) throw InputError("compute_carbon inputs must be >= 0");
  return units::carbon_kg(ci, avg_power * lifetime);
}

double network_carbon(const NetworkLoadSpec& load, double lifetime, double ci) {
  if (load.f_net < 0.0 || load.ei_net < 0.0 || lifetime < 0.0 || ci < 0.0) {
    throw InputError("network_carbon inputs must be >= 0");
  }
  return units::carbon_kg(ci, load.power() * lifetime);
}

double battery_lifetime_days(const BatterySpec& battery, double avg_power) {
  const double usable = battery.usable_energy();
  if (!(usable > 0.0)) throw InputError("battery usable energy must be > 0");
  if (!(avg_power > 0.0)) throw ModelError("battery never cycles at zero power");
  const double cycles_per_day = avg_power * units::kSecondsPerDay / usable;
  return battery.cycle_limit / cycles_per_day;
}

int battery_replacements(const BatterySpec& battery, double avg_power, double lifetime) {
  const double life_s = battery_lifetime_days(battery, avg_power) * units::kSecondsPerDay;
  if (lifetime < 0.0) throw InputError("lifetime must be >= 0");
  // The first battery is counted even for a zero-length deployment.
  return std::max(1, static_cast<int>(std::ceil(lifetime / life_s)));
}

double battery_replacement_carbon(const BatterySpec& battery, double avg_power, double lifetime) {
  return battery.embodied_carbon * battery_replacements(battery, avg_power, lifetime);
}

double reuse_factor(const ComponentBreakdown& breakdown, const std::set<Component>& reused) {
  long double sum = 0.0L;
  for (Component c : reused) {
    auto it = breakdown.fractions.find(c);
    if (it == breakdown.fractions.end()) {
      throw InputError(std::string("component '") + to_string(c) + "' not in breakdown");
    }
    sum += it->second;
  }
  return static_cast<double>(sum);
}

EmbodiedCarbon embodied_carbon(const DeviceProfile& device, Mode mode, const std::set<Component>& reused_components,
                               const std::optional<BatteryPolicy>& battery_policy) {
  if (battery_policy && !device.battery) {
    throw InputError("battery policy given for battery-less device '" + device.key + "'");
  }
  EmbodiedCarbon out;
  if (mode == Mode::kNew) {
    out.kg = device.embodied_carbon_total;
    out.reuse_factor = 0.0;
    return out;
  }
  out.reuse_factor = reused_components.empty() ? 1.0 : reuse_factor(device.breakdown, reused_components);
  if (battery_policy) out.kg = battery_replacement_carbon(*device.battery, battery_policy->avg_power, battery_policy->lifetime);
  return out;
}

CCIResult make_cci(const CarbonBreakdown& b, double lifetime, double total_ops, const std::string& unit) {
  if (!(total_ops > 0.0)) throw ModelError("undefined CCI: zero lifetime operations");
  CCIResult r;
  r.breakdown = b;
  r.lifetime = lifetime;
  r.total_ops = total_ops;
  r.cci = b.total() / total_ops;
  r.unit = unit;
  return r;
}

CCIResult cci_single(const DeviceProfile& device, const LoadProfile& load, const BenchmarkSpec& bench, double lifetime,
                     double ci, const SingleOptions& opts) {
  const double power = avg_power(device.power, load);
  std::optional<BatteryPolicy> policy;
  if (opts.replace_batteries && opts.mode == Mode::kReused && device.battery) policy = BatteryPolicy{power, lifetime};
  CarbonBreakdown b;
  b.c_m = embodied_carbon(device, opts.mode, {}, policy).kg;
  b.c_c = compute_carbon(power, lifetime, ci);
  b.c_n = opts.net ? network_carbon(*opts.net, lifetime, ci) : 0.0;
  return make_cci(b, lifetime, avg_ops_rate(bench, load) * lifetime, bench.unit);
}

double cci_two_life(const FirstLife& first, const SecondLife& second) {
  const double ops = first.ops + second.ops;
  if (!(ops > 0.0)) throw ModelError("undefined CCI: zero operations over both lives");
  return (first.c_m + first.c_c + first.c_n + second.c_c + second.c_n) / ops;
}

}  // namespace jcci
