// Randomized invariant checks. Each suite draws at least kCases inputs from a
// fixed seed so failures reproduce.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "jcci/carbon.hpp"
#include "jcci/charging.hpp"
#include "jcci/cluster.hpp"
#include "jcci/grid.hpp"
#include "jcci/report.hpp"
#include "jcci/textconf.hpp"
#include "jcci/thermal.hpp"
#include "jcci/units.hpp"
#include "support.hpp"

using namespace jcci;
using jcci::test::Gen;
using jcci::test::rel_close;

namespace {

constexpr int kCases = 1000;

// Stops at the first counterexample and reports its case index.
#define PROPERTY(cond)                                           \
  do {                                                           \
    if (!(cond)) {                                               \
      FAIL_CHECK("counterexample at case " << i << ": " #cond); \
      return;                                                    \
    }                                                            \
  } while (0)

DeviceProfile random_device(Gen& g, const std::string& key) {
  DeviceProfile d;
  d.key = key;
  d.name = "Device " + key;
  d.release_year = g.integer(2005, 2023);
  d.power = g.power();
  d.embodied_carbon_total = g.uniform(0.0, 5000.0);
  d.reused_default = g.coin();
  d.citation = g.coin() ? "" : "c";
  const int nb = g.integer(1, 3);
  for (int k = 0; k < nb; ++k) {
    auto b = g.bench();
    b.name = "bench" + std::to_string(k);
    if (g.coin()) b.listed_n = g.integer(1, 300);
    d.benchmarks.push_back(b);
  }
  if (g.coin()) {
    BatterySpec b;
    b.capacity_ah = g.uniform(0.5, 6.0);
    b.nominal_voltage = g.uniform(3.0, 15.0);
    if (g.coin()) b.usable_energy_override = g.uniform(1e3, 2e5);
    b.charge_power = g.uniform(1.0, 100.0);
    b.cycle_limit = g.uniform(100.0, 3000.0);
    b.embodied_carbon = g.uniform(0.1, 10.0);
    d.battery = b;
  }
  if (g.coin()) {
    // Fractions over all components that sum to one.
    double total = 0.0;
    std::vector<double> w;
    for (size_t k = 0; k < all_components().size(); ++k) w.push_back(g.uniform(0.01, 1.0)), total += w.back();
    double acc = 0.0;
    for (size_t k = 0; k < w.size(); ++k) {
      const double f = k + 1 == w.size() ? 1.0 - acc : w[k] / total;
      d.breakdown.fractions[all_components()[k]] = f;
      acc += f;
    }
  } else {
    d.breakdown.fractions = {{Component::kOther, 1.0}};
  }
  if (g.coin()) d.thermal_power = g.uniform(0.1, 500.0);
  return d;
}

grid::GridTrace random_trace(Gen& g, int days, std::int64_t interval) {
  std::vector<grid::Sample> s;
  const auto per_day = 86400 / interval;
  const double base = g.uniform(0.0, 600.0);
  for (std::int64_t i = 0; i < days * per_day; ++i)
    s.push_back({i * interval, std::max(0.0, base + g.uniform(-300.0, 300.0))});
  return grid::GridTrace(std::move(s), interval);
}

}  // namespace

TEST_CASE("property: avg_power of a constant profile is that constant") {
  Gen g(101);
  for (int i = 0; i < kCases; ++i) {
    const double c = g.uniform(0.0, 1000.0);
    const auto l = g.load();
    PROPERTY(rel_close(avg_power({c, c, c, c}, l), c, 1e-12, 1e-12));
  }
}

TEST_CASE("property: avg_power is monotone in the profile") {
  Gen g(102);
  for (int i = 0; i < kCases; ++i) {
    const auto p = g.power();
    auto q = p;
    q.p_idle += g.uniform(0.0, 5.0);
    q.p10 = std::max(q.p10, q.p_idle) + g.uniform(0.0, 5.0);
    q.p50 = std::max(q.p50, q.p10) + g.uniform(0.0, 5.0);
    q.p100 = std::max(q.p100, q.p50) + g.uniform(0.0, 5.0);
    const auto l = g.load();
    PROPERTY(avg_power(q, l) >= avg_power(p, l) - 1e-12);
  }
}

TEST_CASE("property: avg_ops_rate is linear in throughput") {
  Gen g(103);
  for (int i = 0; i < kCases; ++i) {
    auto b = g.bench();
    const auto l = g.load();
    const double k = g.uniform(0.01, 100.0);
    auto scaled = b;
    scaled.multi *= k;
    PROPERTY(rel_close(avg_ops_rate(scaled, l), k * avg_ops_rate(b, l), 1e-12, 1e-300));
  }
}

TEST_CASE("property: registry serialize round-trip") {
  Gen g(104);
  for (int i = 0; i < kCases; ++i) {
    std::vector<DeviceProfile> devices;
    const int nd = g.integer(1, 3);
    for (int k = 0; k < nd; ++k) devices.push_back(random_device(g, "d" + std::to_string(k)));
    std::vector<Peripheral> peripherals;
    if (g.coin()) {
      Peripheral p{"fan", "Fan", g.uniform(0, 20), g.uniform(0, 10), std::nullopt, ""};
      if (g.coin()) p.rating = g.uniform(1, 1000);
      peripherals.push_back(p);
    }
    auto load = g.load();
    load.key = "mix";
    std::sort(load.levels.begin(), load.levels.end(),
              [](const LoadLevel& a, const LoadLevel& b) { return a.load_fraction > b.load_fraction; });
    Registry r(devices, peripherals, {load});
    PROPERTY(parse_registry(serialize(r)) == r);
  }
}

TEST_CASE("property: percentile threshold is monotone in p") {
  Gen g(105);
  for (int i = 0; i < kCases; ++i) {
    const auto t = random_trace(g, 1, 1800);
    const double a = g.uniform(0.0, 100.0);
    const double b = g.uniform(0.0, 100.0);
    const double lo = grid::percentile_threshold(t, 0, std::min(a, b));
    const double hi = grid::percentile_threshold(t, 0, std::max(a, b));
    PROPERTY(grid::percentile_threshold(t, 0, 0) <= lo);
    PROPERTY(lo <= hi);
    PROPERTY(hi <= grid::percentile_threshold(t, 0, 100));
  }
}

TEST_CASE("property: splitting a mix source leaves the intensity unchanged") {
  Gen g(106);
  for (int i = 0; i < kCases; ++i) {
    grid::EnergyMix mix{"m", {}};
    const int n = g.integer(1, 5);
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      const double f = k + 1 == n ? 1.0 - acc : (1.0 - acc) * g.uniform(0.0, 1.0);
      mix.sources["s" + std::to_string(k)] = {f, g.uniform(0.0, 1000.0)};
      acc += f;
    }
    auto split = mix;
    auto& src = split.sources["s0"];
    const double part = g.uniform(0.0, 1.0);
    split.sources["s0_b"] = {src.fraction * (1.0 - part), src.intensity};
    src.fraction *= part;
    PROPERTY(rel_close(grid::mix_intensity(split), grid::mix_intensity(mix), 1e-12, 1e-9));
  }
}

TEST_CASE("property: trace CSV round-trip is lossless") {
  Gen g(107);
  for (int i = 0; i < kCases; ++i) {
    const auto t = random_trace(g, 1, 3600 * g.integer(1, 4));
    PROPERTY(grid::parse_trace(grid::write_trace(t), t.interval()) == t);
  }
}

TEST_CASE("property: CCI conservation identity") {
  Gen g(108);
  for (int i = 0, done = 0; done < kCases; ++i) {
    const auto d = random_device(g, "d");
    const auto l = g.load();
    const auto& b = d.benchmarks.front();
    SingleOptions o;
    o.mode = g.coin() ? Mode::kNew : Mode::kReused;
    o.replace_batteries = g.coin();
    if (g.coin()) o.net = NetworkLoadSpec{g.uniform(0, 1e8), g.uniform(0, 2e-5)};
    if (avg_ops_rate(b, l) <= 0.0) continue;
    ++done;
    const auto r = cci_single(d, l, b, units::months(g.uniform(0.5, 120)), g.uniform(0, 800), o);
    PROPERTY(rel_close(r.breakdown.total(), r.cci * r.total_ops, 1e-9, 1e-300));
  }
}

TEST_CASE("property: CCI is lifetime-invariant without embodied carbon") {
  Gen g(109);
  for (int i = 0, done = 0; done < kCases; ++i) {
    const auto d = random_device(g, "d");
    const auto l = g.load();
    const auto& b = d.benchmarks.front();
    if (avg_ops_rate(b, l) <= 0.0) continue;
    ++done;
    SingleOptions o;
    o.mode = Mode::kReused;
    o.net = NetworkLoadSpec{g.uniform(0, 1e8), g.uniform(0, 2e-5)};
    const double ci = g.uniform(0, 800);
    const double life = units::months(g.uniform(0.5, 120));
    const double k = g.uniform(0.1, 10);
    const auto a = cci_single(d, l, b, life, ci, o);
    const auto c = cci_single(d, l, b, life * k, ci, o);
    PROPERTY(a.breakdown.c_m == 0.0);
    PROPERTY(rel_close(a.cci, c.cci, 1e-12, 1e-300));
  }
}

TEST_CASE("property: CCI falls with lifetime when embodied carbon is positive") {
  Gen g(110);
  for (int i = 0, done = 0; done < kCases; ++i) {
    auto d = random_device(g, "d");
    d.embodied_carbon_total = g.uniform(1.0, 5000.0);
    const auto l = g.load();
    const auto& b = d.benchmarks.front();
    if (avg_ops_rate(b, l) <= 0.0) continue;
    ++done;
    SingleOptions o;
    o.mode = Mode::kNew;
    const double ci = g.uniform(0, 800);
    const double life = units::months(g.uniform(0.5, 120));
    const auto a = cci_single(d, l, b, life, ci, o);
    const auto c = cci_single(d, l, b, life * g.uniform(1.01, 3.0), ci, o);
    PROPERTY(c.cci < a.cci);
  }
}

TEST_CASE("property: zero grid intensity leaves only embodied carbon") {
  Gen g(111);
  for (int i = 0, done = 0; done < kCases; ++i) {
    const auto d = random_device(g, "d");
    const auto l = g.load();
    const auto& b = d.benchmarks.front();
    if (avg_ops_rate(b, l) <= 0.0) continue;
    ++done;
    SingleOptions o;
    o.mode = g.coin() ? Mode::kNew : Mode::kReused;
    o.replace_batteries = g.coin();
    o.net = NetworkLoadSpec{g.uniform(0, 1e9), g.uniform(0, 2e-5)};
    const auto r = cci_single(d, l, b, units::months(g.uniform(0.5, 120)), 0.0, o);
    PROPERTY(r.breakdown.c_c == 0.0);
    PROPERTY(r.breakdown.c_n == 0.0);
    PROPERTY(r.cci == r.breakdown.c_m / r.total_ops);
  }
}

TEST_CASE("property: compute and network carbon are linear") {
  Gen g(112);
  for (int i = 0; i < kCases; ++i) {
    const double p = g.uniform(0, 1000), t = g.uniform(0, 1e8), ci = g.uniform(0, 900), k = g.uniform(0, 10);
    const double base = compute_carbon(p, t, ci);
    PROPERTY(rel_close(compute_carbon(k * p, t, ci), k * base, 1e-12, 1e-300));
    PROPERTY(rel_close(compute_carbon(p, k * t, ci), k * base, 1e-12, 1e-300));
    PROPERTY(rel_close(compute_carbon(p, t, k * ci), k * base, 1e-12, 1e-300));
    NetworkLoadSpec n{g.uniform(0, 1e9), g.uniform(0, 2e-5)};
    NetworkLoadSpec n2{n.f_net * k, n.ei_net};
    PROPERTY(rel_close(network_carbon(n2, t, ci), k * network_carbon(n, t, ci), 1e-12, 1e-300));
  }
}

TEST_CASE("property: reuse factor is additive over disjoint sets") {
  Gen g(113);
  for (int i = 0, done = 0; done < kCases; ++i) {
    auto d = random_device(g, "d");
    if (d.breakdown.fractions.size() < all_components().size()) continue;
    ++done;
    std::set<Component> a, b;
    for (auto c : all_components()) {
      const int pick = g.integer(0, 2);
      if (pick == 1) a.insert(c);
      if (pick == 2) b.insert(c);
    }
    std::set<Component> both = a;
    both.insert(b.begin(), b.end());
    PROPERTY(rel_close(reuse_factor(d.breakdown, both), reuse_factor(d.breakdown, a) + reuse_factor(d.breakdown, b),
                       1e-12, 1e-15));
  }
}

TEST_CASE("property: smart charging invariants and determinism") {
  Gen g(114);
  const auto lm = LoadProfile::light_medium();
  for (int i = 0; i < kCases; ++i) {
    DeviceProfile d;
    d.key = "phone";
    d.power = g.power();
    BatterySpec b;
    b.usable_energy_override = g.uniform(1e4, 2e5);
    b.charge_power = avg_power(d.power, lm) * g.uniform(1.5, 20.0);
    b.cycle_limit = 2500;
    d.battery = b;
    const auto trace = random_trace(g, g.integer(2, 3), 1800);
    charging::ChargePolicy pol;
    if (g.coin()) pol.percentile = g.uniform(0, 100);
    pol.min_soc = g.uniform(0.0, 0.5);
    pol.charge_efficiency = g.uniform(0.7, 1.0);
    pol.initial_soc = g.uniform(pol.min_soc, 1.0);
    const auto r = charging::simulate(d, lm, trace, pol);

    const double capacity = b.usable_energy();
    const double quantum = b.charge_power * static_cast<double>(trace.interval());
    for (size_t k = 0; k < r.steps.size(); ++k) {
      PROPERTY(r.steps[k].soc >= 0.0 && r.steps[k].soc <= 1.0);
      if (k + 1 < r.steps.size() && r.steps[k].soc < pol.min_soc) PROPERTY(r.steps[k + 1].charging);
    }
    const double delta = (r.final_state.soc - pol.initial_soc) * capacity;
    PROPERTY(std::fabs(r.wall_energy * pol.charge_efficiency - r.consumed_energy - delta) <= quantum);
    PROPERTY(rel_close(r.final_state.equivalent_cycles, r.wall_energy * pol.charge_efficiency / capacity, 1e-12,
                       1e-300));

    const auto again = charging::simulate(d, lm, trace, pol);
    PROPERTY(again.schedule.size() == r.schedule.size());
    for (size_t k = 0; k < r.schedule.size(); ++k) {
      PROPERTY(again.schedule[k].start == r.schedule[k].start);
      PROPERTY(again.schedule[k].end == r.schedule[k].end);
      PROPERTY(again.schedule[k].forced == r.schedule[k].forced);
    }
    PROPERTY(again.smart_carbon == r.smart_carbon);
  }
}

TEST_CASE("property: emit_chart output is byte-stable") {
  Gen g(115);
  for (int i = 0; i < kCases; ++i) {
    report::Dataset data;
    const int ns = g.integer(1, 4);
    for (int s = 0; s < ns; ++s) {
      report::Series series{"series " + std::to_string(s), {}, {}, g.coin()};
      const int np = g.integer(1, 30);
      double x = g.uniform(-100, 100);
      for (int p = 0; p < np; ++p) {
        x += g.uniform(0.0, 10.0);
        series.x.push_back(x);
        series.y.push_back(g.uniform(-1e3, 1e3));
      }
      data.series.push_back(series);
    }
    if (g.coin()) data.shades.push_back({g.uniform(0, 5), g.uniform(5, 10), "w"});
    report::ChartSpec spec{"t" + std::to_string(i), "x", "y"};
    const auto a = report::emit_chart(data, spec);
    const auto b = report::emit_chart(data, spec);
    PROPERTY(a == b);
    PROPERTY(a.find("nan") == std::string::npos);
  }
}

TEST_CASE("property: sealed box conserves energy") {
  Gen g(116);
  for (int i = 0; i < kCases; ++i) {
    thermal::ThermalParams p;
    const int n = g.integer(1, 5);
    p.air_mass = g.uniform(0.005, 0.05);
    std::vector<double> powers;
    for (int k = 0; k < n; ++k) {
      p.device_masses.push_back(g.uniform(0.05, 0.5));
      powers.push_back(g.uniform(0.0, 5.0));
    }
    p.throttling = g.coin();
    p.ambient_conductance = 0.0;
    const auto r = thermal::simulate_box(p, powers, g.uniform(10, 600), 0.5, 0.0);
    const auto& first = r.samples.front();
    const auto& last = r.samples.back();
    double stored = p.c_p_air * p.air_mass * (last.air_temp - first.air_temp);
    for (int k = 0; k < n; ++k) stored += p.c_p_si * p.device_masses[k] * (last.device_temps[k] - first.device_temps[k]);
    PROPERTY(r.leaked_energy == 0.0);
    PROPERTY(std::fabs(stored - r.electrical_energy) <= 0.01 * r.electrical_energy + 1e-9);
  }
}

TEST_CASE("property: more device power never cools any node") {
  Gen g(117);
  for (int i = 0; i < kCases; ++i) {
    thermal::ThermalParams p;
    const int n = g.integer(1, 4);
    p.air_mass = g.uniform(0.005, 0.05);
    p.throttling = false;
    p.throttle_temp = 1e6;
    p.shutdown_temp = 2e6;
    p.ambient_conductance = g.uniform(0.0, 0.5);
    std::vector<double> powers;
    for (int k = 0; k < n; ++k) {
      p.device_masses.push_back(g.uniform(0.05, 0.5));
      powers.push_back(g.uniform(0.0, 5.0));
    }
    auto hotter = powers;
    hotter[static_cast<size_t>(g.integer(0, n - 1))] += g.uniform(0.01, 3.0);
    const double duration = g.uniform(10, 300);
    const auto a = thermal::simulate_box(p, powers, duration, 0.5, 5.0);
    const auto b = thermal::simulate_box(p, hotter, duration, 0.5, 5.0);
    PROPERTY(a.samples.size() == b.samples.size());
    for (size_t s = 0; s < a.samples.size(); ++s) {
      PROPERTY(b.samples[s].air_temp >= a.samples[s].air_temp - 1e-12);
      for (int k = 0; k < n; ++k) PROPERTY(b.samples[s].device_temps[k] >= a.samples[s].device_temps[k] - 1e-12);
    }
  }
}

TEST_CASE("property: thermal power is additive over device subsets") {
  Gen g(118);
  for (int i = 0; i < kCases; ++i) {
    thermal::ThermalParams all;
    all.air_mass = g.uniform(0.005, 0.05);
    thermal::ThermalSample s0{0, g.uniform(20, 30), {}}, s1{g.uniform(1, 1000), g.uniform(20, 60), {}};
    const int n = g.integer(2, 6);
    for (int k = 0; k < n; ++k) {
      all.device_masses.push_back(g.uniform(0.05, 0.5));
      s0.device_temps.push_back(g.uniform(20, 30));
      s1.device_temps.push_back(g.uniform(20, 80));
    }
    const int cut = g.integer(1, n - 1);
    auto part = [&](int lo, int hi, bool with_air) {
      thermal::ThermalParams p = all;
      p.device_masses.assign(all.device_masses.begin() + lo, all.device_masses.begin() + hi);
      thermal::ThermalSample a{s0.time, s0.air_temp, {s0.device_temps.begin() + lo, s0.device_temps.begin() + hi}};
      thermal::ThermalSample b{s1.time, with_air ? s1.air_temp : s0.air_temp,
                               {s1.device_temps.begin() + lo, s1.device_temps.begin() + hi}};
      return thermal::thermal_power(p, a, b);
    };
    PROPERTY(rel_close(part(0, n, true), part(0, cut, true) + part(cut, n, false), 1e-9, 1e-9));
  }
}

TEST_CASE("property: cluster sizing") {
  Gen g(119);
  for (int i = 0; i < kCases; ++i) {
    const auto b = g.bench();
    PROPERTY(size_cluster(b, b) == 1);
    auto slow = g.bench();
    auto fast = slow;
    fast.multi *= g.uniform(1.0, 10.0);
    PROPERTY(size_cluster(b, fast) <= size_cluster(b, slow));
  }
}

TEST_CASE("property: a one-device cluster equals the single-device model") {
  Gen g(120);
  const Regime regimes[] = {regime_from_string("ca"), regime_from_string("solar"), regime_from_string("zero"),
                            regime_from_string("gas")};
  for (int i = 0, done = 0; done < kCases; ++i) {
    ClusterDesign c;
    c.key = "one";
    c.device = random_device(g, "d");
    c.mode = g.coin() ? Mode::kNew : Mode::kReused;
    c.n_devices = 1;
    c.f_net = g.uniform(0, 1e8);
    c.ei_net = g.uniform(0, 2e-5);
    const auto& bench = c.device.benchmarks.front();
    const auto l = g.load();
    if (avg_ops_rate(bench, l) <= 0.0) continue;
    ++done;
    const auto& regime = regimes[g.integer(0, 3)];
    const double life = units::months(g.uniform(1, 120));
    const auto r = cluster_cci(c, l, bench.name, {life}, regime).front();
    SingleOptions o;
    o.mode = c.mode;
    o.net = NetworkLoadSpec{c.f_net, *c.ei_net};
    o.replace_batteries = regime.charging;
    const auto s = cci_single(c.device, l, bench, life, regime.ci, o);
    PROPERTY(r.breakdown == s.breakdown);
    PROPERTY(r.total_ops == s.total_ops);
    PROPERTY(r.cci == s.cci);
  }
}

TEST_CASE("property: pue is at least one and falls as IT power rises") {
  Gen g(121);
  const auto lm = LoadProfile::light_medium();
  for (int i = 0; i < kCases; ++i) {
    DatacenterDesign dc;
    dc.key = "dc";
    dc.unit.device.power = g.power();
    dc.unit.n_devices = g.integer(1, 100);
    dc.floor_area_per_unit = g.uniform(0, 5);
    dc.lighting_power_density = g.uniform(0, 30);
    dc.cooling_overhead = g.uniform(0, 1);
    dc.space_overhead_cooling = g.uniform(0, 10);
    const double a = pue(dc, lm);
    PROPERTY(a >= 1.0);
    dc.unit.n_devices = *dc.unit.n_devices + g.integer(1, 50);
    PROPERTY(pue(dc, lm) <= a + 1e-12);
  }
}

TEST_CASE("property: query ratio scales with throughput") {
  Gen g(122);
  for (int i = 0; i < kCases; ++i) {
    ClusterDesign c;
    c.key = "c";
    c.device.key = "p";
    c.device.power = {2, 2, 2, 2};
    BatterySpec b;
    b.usable_energy_override = g.uniform(1e4, 1e5);
    b.cycle_limit = 2500;
    b.embodied_carbon = g.uniform(0.5, 5);
    c.device.battery = b;
    c.n_devices = g.integer(1, 50);
    c.smart_charging_savings = g.uniform(0, 0.2);
    QueryScenario q;
    q.key = "q";
    q.cluster_throughput = g.uniform(10, 1e4);
    q.rival_throughput = g.uniform(10, 1e4);
    q.cluster_power = g.uniform(1, 100);
    q.rival_power = g.uniform(10, 500);
    q.rival_embodied = g.uniform(0, 3000);
    q.lifetime = units::years(g.uniform(0.5, 6));
    q.ci = g.uniform(1, 800);
    const bool savings = g.coin();
    const double base = query_carbon_comparison(q, c, savings).ratio;
    auto both = q;
    both.cluster_throughput *= 2;
    both.rival_throughput *= 2;
    PROPERTY(rel_close(query_carbon_comparison(both, c, savings).ratio, base, 1e-12));
    auto cluster_only = q;
    cluster_only.cluster_throughput *= 2;
    PROPERTY(rel_close(query_carbon_comparison(cluster_only, c, savings).ratio, 2 * base, 1e-12));
  }
}
