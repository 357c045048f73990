#include "jcci/charging.hpp"

#include <algorithm>
#include <iterator>
#include <map>

#include "jcci/error.hpp"
#include "jcci/units.hpp"

namespace jcci::charging {

void validate(const ChargePolicy& p) {
  if (!(p.min_soc >= 0.0 && p.min_soc < 1.0)) throw InvariantError("ChargePolicy", "0 <= min_soc < 1");
  if (!(p.charge_efficiency > 0.0 && p.charge_efficiency <= 1.0)) throw InvariantError("ChargePolicy", "0 < charge_efficiency <= 1");
  if (!(p.initial_soc >= 0.0 && p.initial_soc <= 1.0)) throw InvariantError("ChargePolicy", "initial_soc in [0,1]");
  if (p.percentile && !(*p.percentile >= 0.0 && *p.percentile <= 100.0)) throw InvariantError("ChargePolicy", "percentile in [0,100]");
}

static const BatterySpec& require_battery(const DeviceProfile& device) {
  if (!device.battery) throw InputError("device '" + device.key + "' has no battery");
  return *device.battery;
}

double required_duty(const DeviceProfile& device, const LoadProfile& load) {
  const auto& b = require_battery(device);
  if (!(b.charge_power > 0.0)) throw InputError("device '" + device.key + "' battery has no charge power");
  return 100.0 * avg_power(device.power, load) / b.charge_power;
}

double backup_runtime(const DeviceProfile& device, const LoadProfile& load, double soc) {
  const auto& b = require_battery(device);
  if (!(soc >= 0.0 && soc <= 1.0)) throw InputError("soc outside [0,1]");
  const double p = avg_power(device.power, load);
  if (!(p > 0.0)) throw ModelError("backup runtime undefined at zero power");
  return soc * b.usable_energy() / p;
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ChargeSimResult simulate(const DeviceProfile& device, const LoadProfile& load, const grid::GridTrace& trace,
                         const ChargePolicy& policy) {
  validate(policy);
  const auto& battery = require_battery(device);
  if (!(battery.charge_power > 0.0)) throw InputError("device '" + device.key + "' battery has no charge power");

  const auto full = trace.full_days();
  if (full.size() < 2) throw InputError("trace must cover at least 2 full calendar days");

  ChargeSimResult r;
  r.percentile = policy.percentile.value_or(required_duty(device, load));
  r.percentile = std::min(r.percentile, 100.0);
  r.initial_soc = policy.initial_soc;

  // Threshold per day from the previous full day; the first day bootstraps from itself.
  std::map<std::int64_t, double> day_pct;
  for (auto d : full) day_pct[d] = grid::percentile_threshold(trace, d, r.percentile);
  auto threshold_for = [&](std::int64_t day) {
    if (auto it = day_pct.find(day - 1); it != day_pct.end()) return it->second;
    auto it = day_pct.upper_bound(day);
    if (it == day_pct.begin()) return it->second;  // leading partial day
    return std::prev(it)->second;                  // latest full day at or before `day`
  };

  const double capacity = battery.usable_energy();
  const double draw = avg_power(device.power, load);
  const double eff = policy.charge_efficiency;
  const double dt = static_cast<double>(trace.interval());

  double stored = policy.initial_soc * capacity;
  std::map<std::int64_t, std::pair<double, double>> day_wall;  // day -> (wall J, wall J x intensity)
  std::map<std::int64_t, std::pair<double, double>> day_base;  // day -> (J, J x intensity)

  r.steps.reserve(trace.size());
  for (const auto& s : trace.samples()) {
    const std::int64_t day = trace.day_of(s.timestamp);
    StepRecord st;
    st.timestamp = s.timestamp;
    st.intensity = s.intensity;
    st.threshold = threshold_for(day);

    const double soc = stored / capacity;
    st.forced = soc < policy.min_soc;
    st.charging = st.forced || (s.intensity <= st.threshold && soc < 1.0);

    const double demand = draw * dt;
    double next = stored - demand;
    if (st.charging) {
      const double added = battery.charge_power * dt * eff;
      if (next + added > capacity) {
        // Stop as soon as the battery is full; bill only the energy it took.
        st.wall_energy = (capacity - next) / eff;
        next = capacity;
      } else {
        st.wall_energy = battery.charge_power * dt;
        next += added;
      }
    }
    double consumed = demand;
    if (next < 0.0) {
      r.unmet_energy += -next;
      consumed += next;
      next = 0.0;
    }
    stored = next;
    st.soc = stored / capacity;

    r.wall_energy += st.wall_energy;
    r.consumed_energy += consumed;
    r.smart_carbon_raw += units::carbon_kg(s.intensity, st.wall_energy);
    r.baseline_carbon += units::carbon_kg(s.intensity, demand);
    if (st.forced) ++r.forced_charge_steps;

    auto& w = day_wall[day];
    w.first += st.wall_energy;
    w.second += st.wall_energy * s.intensity;
    auto& b = day_base[day];
    b.first += demand;
    b.second += demand * s.intensity;

    if (st.charging) {
      if (!r.schedule.empty() && r.schedule.back().end == s.timestamp && r.schedule.back().forced == st.forced) {
        r.schedule.back().end = s.timestamp + trace.interval();
      } else {
        r.schedule.push_back({s.timestamp, s.timestamp + trace.interval(), st.forced});
      }
    }
    r.steps.push_back(st);
  }

  r.final_state.soc = stored / capacity;
  r.final_state.cumulative_charge_energy = r.wall_energy;
  r.final_state.equivalent_cycles = r.wall_energy * eff / capacity;

  if (r.wall_energy > 0.0) {
    r.smart_carbon = r.smart_carbon_raw * (r.consumed_energy / (r.wall_energy * eff));
  } else {
    r.smart_carbon = r.baseline_carbon;
  }
  r.savings_fraction = r.baseline_carbon > 0.0 ? 1.0 - r.smart_carbon / r.baseline_carbon : 0.0;

  std::vector<double> per_day;
  for (size_t i = 1; i < full.size(); ++i) {
    const auto d = full[i];
    const auto& w = day_wall[d];
    const auto& b = day_base[d];
    if (!(w.first > 0.0) || !(b.first > 0.0)) continue;
    DaySavings ds;
    ds.day = d;
    ds.smart_intensity = w.second / w.first;
    ds.baseline_intensity = b.second / b.first;
    ds.savings = ds.baseline_intensity > 0.0 ? 1.0 - (ds.smart_intensity / eff) / ds.baseline_intensity : 0.0;
    r.daily.push_back(ds);
    per_day.push_back(ds.savings);
  }
  r.median_daily_savings = median(std::move(per_day));
  return r;
}

}  // namespace jcci::charging
