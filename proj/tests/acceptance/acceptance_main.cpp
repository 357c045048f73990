// Acceptance checks: one PASS/FAIL/SKIP line per criterion. Exit status is
// nonzero when any criterion fails; skips do not fail the run.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "jcci/carbon.hpp"
#include "jcci/charging.hpp"
#include "jcci/cluster.hpp"
#include "jcci/grid.hpp"
#include "jcci/registry.hpp"
#include "jcci/report.hpp"
#include "jcci/thermal.hpp"
#include "jcci/units.hpp"
#include "../golden_data.hpp"
#include "../support.hpp"

using namespace jcci;
using jcci::test::data_path;
using jcci::test::registry;

namespace {

// Tolerances.
constexpr double kAvgPowerRel = 0.005;
constexpr int kMinSizingMatches = 17;
constexpr double kBatteryYearsTarget = 2.3;
constexpr double kBatteryYearsTol = 0.05;
constexpr double kBackupMinH = 1.9;
constexpr double kBackupMaxH = 2.1;
constexpr double kBatteryCarbon3y = 4.00;
constexpr double kReuseTarget = 0.85;
constexpr double kConstantTraceTol = 1e-6;
constexpr double kPixelSavings = 0.0722;
constexpr double kPixelSavingsTol = 0.03;
constexpr double kThinkpadSavings = 0.0403;
constexpr double kThinkpadSavingsTol = 0.02;
constexpr double kEnergyBalanceRel = 0.01;
constexpr double kCrossoverMonths = 45.0;
constexpr double kCrossoverTol = 6.0;
constexpr double kPueTol = 0.02;
constexpr double kQueryRel = 0.15;
constexpr int kPropertyCases = 1000;

enum class Status { kPass, kFail, kSkip };

struct Outcome {
  Status status = Status::kPass;
  std::string detail;
};

Outcome pass(std::string d) { return {Status::kPass, std::move(d)}; }
Outcome fail(std::string d) { return {Status::kFail, std::move(d)}; }
Outcome skip(std::string d) { return {Status::kSkip, std::move(d)}; }
Outcome judge(bool ok, std::string d) {
  while (!d.empty() && (d.back() == ' ' || d.back() == ';')) d.pop_back();
  return ok ? pass(std::move(d)) : fail(std::move(d));
}

const LoadProfile& lm() {
  static const LoadProfile l = registry().load_profile("light_medium");
  return l;
}

Outcome avg_power_table() {
  const std::pair<const char*, double> rows[] = {{"poweredge_r740", 308.7},
                                                 {"pixel_3a", 1.54},
                                                 {"nexus_4", 1.78},
                                                 {"thinkpad_x1_carbon_g3", 11.47},
                                                 {"proliant_dl380_g6", 199.1}};
  bool ok = true;
  std::string d;
  for (const auto& [key, want] : rows) {
    const double got = avg_power(registry().device(key).power, lm());
    const double rel = std::fabs(got - want) / want;
    ok = ok && rel <= kAvgPowerRel;
    d += fmt::format("{} {:.4g} W ({:.2f}%); ", key, got, 100 * rel);
  }
  return judge(ok, d);
}

Outcome sizing_table() {
  auto file = load_design_file(data_path("designs/cloudlets.conf"), registry());
  const auto& base = registry().device("poweredge_r740");
  int cells = 0, matches = 0;
  bool surfaced = true;
  std::string mism;
  for (const auto& dev : registry().devices()) {
    for (const auto& b : dev.benchmarks) {
      if (!b.listed_n) continue;
      ++cells;
      const int n = size_cluster(base.benchmark(b.name), b);
      if (n == *b.listed_n) {
        ++matches;
        continue;
      }
      mism += fmt::format("{}/{} ceil {} listed {}; ", dev.key, b.name, n, *b.listed_n);
      for (const auto& design : file.designs) {
        if (design.device.key != dev.key) continue;
        const auto s = resolve(design, b.name);
        surfaced = surfaced && s.overridden && s.computed_n == n && s.listed_n == b.listed_n;
      }
    }
  }
  return judge(cells == 20 && matches >= kMinSizingMatches && surfaced,
               fmt::format("{} of {} cells match; {}overrides surfaced: {}", matches, cells, mism, surfaced));
}

Outcome battery_arithmetic() {
  const auto& px = registry().device("pixel_3a");
  const double p = avg_power(px.power, lm());
  const double years = battery_lifetime_days(*px.battery, p) / units::kDaysPerYear;
  const double backup_h = units::to_hours(charging::backup_runtime(px, lm(), 0.25));
  const double kg = battery_replacement_carbon(*px.battery, p, units::years(3));
  const bool ok = std::fabs(years - kBatteryYearsTarget) <= kBatteryYearsTol && backup_h >= kBackupMinH &&
                  backup_h <= kBackupMaxH && kg == kBatteryCarbon3y;
  return judge(ok, fmt::format("battery life {:.3f} y, backup at 25% {:.3f} h, 3-year battery carbon {} kg", years,
                               backup_h, kg));
}

Outcome reuse() {
  const auto& br = registry().device("nexus_4").breakdown;
  const double r = reuse_factor(
      br, {Component::kCompute, Component::kNetwork, Component::kBattery, Component::kStorage, Component::kOther});
  return judge(r == kReuseTarget, fmt::format("reuse factor {}", report::num(r)));
}

Outcome synthetic_charging() {
  const auto& px = registry().device("pixel_3a");
  const auto trace = grid::two_level_trace(7, 300, 100, 400, 10, 16);
  const charging::ChargePolicy pol;
  const auto r = charging::simulate(px, lm(), trace, pol);
  bool inside = true, soc_ok = true;
  for (const auto& s : r.steps) {
    soc_ok = soc_ok && s.soc >= 0.0 && s.soc <= 1.0;
    if (s.charging && !s.forced) {
      const double h = static_cast<double>(s.timestamp % 86400) / 3600.0;
      inside = inside && h >= 10.0 && h < 16.0;
    }
  }
  const double capacity = px.battery->usable_energy();
  const double quantum = px.battery->charge_power * static_cast<double>(trace.interval());
  const double imbalance =
      r.wall_energy * pol.charge_efficiency - r.consumed_energy - (r.final_state.soc - pol.initial_soc) * capacity;
  const bool conserved = std::fabs(imbalance) <= quantum;

  const auto flat = grid::two_level_trace(7, 300, 250, 250, 10, 16);
  const auto f = charging::simulate(px, lm(), flat, pol);
  const bool flat_ok = std::fabs(f.savings_fraction) <= kConstantTraceTol;
  return judge(r.savings_fraction > 0.0 && inside && soc_ok && conserved && flat_ok,
               fmt::format("two-level savings {:.4f}, non-forced charging in window: {}, soc bounded: {}, "
                           "energy imbalance {:.3g} J (quantum {} J), constant-trace savings {:.2g}",
                           r.savings_fraction, inside, soc_ok, imbalance, quantum, f.savings_fraction));
}

std::string caiso_path() {
  if (const char* env = std::getenv("JCCI_CAISO_TRACE")) return env;
  return data_path("caiso_2021_04.csv");
}

Outcome caiso_charging() {
  const auto path = caiso_path();
  if (!std::filesystem::exists(path)) return skip(fmt::format("April 2021 CAISO trace not present at {}", path));
  const auto trace = grid::load_trace(path, 300, -7 * 3600);
  const auto p = charging::simulate(registry().device("pixel_3a"), lm(), trace, {});
  const auto t = charging::simulate(registry().device("thinkpad_x1_carbon_g3"), lm(), trace, {});
  const bool ok = std::fabs(p.median_daily_savings - kPixelSavings) <= kPixelSavingsTol &&
                  std::fabs(t.median_daily_savings - kThinkpadSavings) <= kThinkpadSavingsTol;
  return judge(ok, fmt::format("Pixel median {:.4f}, ThinkPad median {:.4f}", p.median_daily_savings,
                               t.median_daily_savings));
}

Outcome thermal_checks() {
  const auto& fan = registry().peripheral("server_fan");
  const int f666 = thermal::provision_fans(666, fan);
  const int f135 = thermal::provision_fans(135, fan);

  auto cfg = thermal::load_box_config(data_path("thermal_fig4.conf"));
  auto sealed = cfg.params;
  sealed.ambient_conductance = 0.0;
  const auto s = thermal::simulate_box(sealed, cfg.device_powers, cfg.duration, cfg.dt, cfg.sample_every);
  const auto& first = s.samples.front();
  const auto& last = s.samples.back();
  double stored = sealed.c_p_air * sealed.air_mass * (last.air_temp - first.air_temp);
  for (size_t k = 0; k < sealed.device_masses.size(); ++k)
    stored += sealed.c_p_si * sealed.device_masses[k] * (last.device_temps[k] - first.device_temps[k]);
  const double balance = std::fabs(stored - s.electrical_energy) / s.electrical_energy;

  const auto r = thermal::simulate_box(cfg.params, cfg.device_powers, cfg.duration, cfg.dt, cfg.sample_every);
  const auto& m = cfg.params.device_masses;
  const double big = *std::max_element(m.begin(), m.end());
  double small_last = -1.0, big_first = INFINITY;
  size_t small_down = 0, small_total = 0;
  for (size_t k = 0; k < m.size(); ++k) small_total += m[k] < big;
  for (const auto& e : r.events) {
    if (m[e.device] < big) {
      ++small_down;
      small_last = std::max(small_last, e.time);
    } else {
      big_first = std::min(big_first, e.time);
    }
  }
  const bool order = small_total > 0 && small_down == small_total && small_last < big_first;
  return judge(f666 == 2 && f135 == 1 && balance <= kEnergyBalanceRel && order,
               fmt::format("666 W -> {} fans, 135 W -> {} fan; sealed energy error {:.2e}; small-mass shutdowns {}/{} "
                           "by {} s, large-mass shutdown {}",
                           f666, f135, balance, small_down, small_total, small_last,
                           std::isfinite(big_first) ? fmt::format("at {} s", big_first) : std::string("none")));
}

Outcome cluster_curves() {
  auto file = load_design_file(data_path("designs/cloudlets.conf"), registry());
  const auto ca = regime_from_string("ca");
  const double life = units::months(36);
  bool ok = true;
  std::string d;
  for (const char* bench : {"sgemm", "pdf_render", "dijkstra"}) {
    auto at = [&](const char* key) { return cluster_cci(find_design(file, key), lm(), bench, {life}, ca).front().cci; };
    const double pe = at("poweredge"), px = at("pixel"), pro = at("proliant");
    const double worst_other = std::max({at("thinkpad"), px, at("nexus")});
    ok = ok && px < pe && pro > worst_other;
    d += fmt::format("{}: pixel {:.4g} < poweredge {:.4g}, proliant {:.4g} vs next-worst reused {:.4g}; ", bench,
                     px * 1e6, pe * 1e6, pro * 1e6, worst_other * 1e6);
  }
  std::vector<double> months;
  for (int mo = 1; mo <= 120; ++mo) months.push_back(units::months(mo));
  const auto nx = cluster_cci(find_design(file, "nexus"), lm(), "sgemm", months, ca);
  const auto pe = cluster_cci(find_design(file, "poweredge"), lm(), "sgemm", months, ca);
  int cross = 0;
  for (size_t k = 1; k < months.size(); ++k) {
    if (nx[k - 1].cci < pe[k - 1].cci && nx[k].cci >= pe[k].cci) {
      cross = static_cast<int>(k + 1);
      break;
    }
  }
  ok = ok && cross > 0 && std::fabs(cross - kCrossoverMonths) <= kCrossoverTol;
  d += fmt::format("nexus/poweredge sgemm crossover at {} months", cross);
  return judge(ok, d);
}

Outcome pue_checks() {
  auto file = load_design_file(data_path("designs/datacenter.conf"), registry());
  double pe = 0.0, px = 0.0;
  for (const auto& dc : file.datacenters) {
    if (dc.key == "poweredge_dc") pe = pue(dc, lm());
    if (dc.key == "pixel_dc") px = pue(dc, lm());
  }
  return judge(std::fabs(pe - 1.31) <= kPueTol && std::fabs(px - 1.32) <= kPueTol && px > pe,
               fmt::format("PowerEdge DC {:.5f}, smartphone DC {:.5f}", pe, px));
}

Outcome query_checks() {
  auto file = load_design_file(data_path("queries.conf"), registry());
  bool ok = file.queries.size() == 3;
  std::string d;
  for (size_t k = 0; k < file.queries.size(); ++k) {
    const auto& q = file.queries[k];
    const auto& c = find_design(file, file.query_designs[k]);
    const double target = q.reference_ratio.value_or(NAN);
    for (bool savings : {true, false}) {
      const double r = query_carbon_comparison(q, c, savings).ratio;
      ok = ok && std::fabs(r - target) <= kQueryRel * target;
      d += fmt::format("{}{} {:.3f}x vs {}x; ", q.key, savings ? "" : " (no savings)", r, target);
    }
  }
  return judge(ok, d);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome property_suites() {
  test::Gen g(2021);
  int cases = 0;
  std::string broken;
  auto note = [&](bool ok, const char* what) {
    if (!ok && broken.empty()) broken = fmt::format("{} at case {}", what, cases);
  };
  for (int i = 0; i < kPropertyCases; ++i, ++cases) {
    DeviceProfile d;
    d.key = "d";
    d.power = g.power();
    d.embodied_carbon_total = g.uniform(1, 5000);
    auto b = g.bench();
    const auto l = g.load();
    if (avg_ops_rate(b, l) <= 0.0) continue;
    SingleOptions o;
    o.mode = g.coin() ? Mode::kNew : Mode::kReused;
    o.net = NetworkLoadSpec{g.uniform(0, 1e8), g.uniform(0, 2e-5)};
    const double life = units::months(g.uniform(1, 120));
    const double ci = g.uniform(0, 800);
    const auto r = cci_single(d, l, b, life, ci, o);
    note(test::rel_close(r.breakdown.total(), r.cci * r.total_ops, 1e-9, 1e-300), "conservation");
    o.mode = Mode::kReused;
    const auto a = cci_single(d, l, b, life, ci, o);
    const auto a2 = cci_single(d, l, b, life * g.uniform(0.1, 10), ci, o);
    note(test::rel_close(a.cci, a2.cci, 1e-12, 1e-300), "lifetime invariance");
    const auto z = cci_single(d, l, b, life, 0.0, o);
    note(z.breakdown.c_c == 0 && z.breakdown.c_n == 0 && z.cci == 0, "zero-ci limit");
  }
  for (int i = 0; i < kPropertyCases; ++i, ++cases) {
    std::vector<grid::Sample> s;
    for (int k = 0; k < 48; ++k) s.push_back({k * 1800LL, g.uniform(0, 600)});
    grid::GridTrace t(s, 1800);
    const double p = g.uniform(0, 100), q = g.uniform(0, 100);
    note(grid::percentile_threshold(t, 0, std::min(p, q)) <= grid::percentile_threshold(t, 0, std::max(p, q)),
         "percentile monotonicity");
  }
  const auto& px = registry().device("pixel_3a");
  for (int i = 0; i < kPropertyCases; ++i, ++cases) {
    grid::SyntheticSpec spec;
    spec.days = 2;
    spec.interval_s = 1800;
    spec.noise_sd = g.uniform(0, 60);
    spec.seed = static_cast<std::uint64_t>(i + 1);
    const auto t = grid::synthetic_trace(spec);
    charging::ChargePolicy pol;
    pol.initial_soc = g.uniform(0.3, 1.0);
    const auto r1 = charging::simulate(px, lm(), t, pol);
    const auto r2 = charging::simulate(px, lm(), t, pol);
    bool same = r1.schedule.size() == r2.schedule.size() && r1.smart_carbon == r2.smart_carbon;
    for (size_t k = 0; same && k < r1.schedule.size(); ++k)
      same = r1.schedule[k].start == r2.schedule[k].start && r1.schedule[k].end == r2.schedule[k].end;
    note(same, "simulate determinism");
  }
  for (int i = 0; i < kPropertyCases; ++i, ++cases) {
    report::Dataset data;
    report::Series s{"s", {}, {}};
    const int n = g.integer(1, 20);
    for (int k = 0; k < n; ++k) s.x.push_back(k), s.y.push_back(g.uniform(-100, 100));
    data.series.push_back(s);
    note(report::emit_chart(data, {"t", "x", "y"}) == report::emit_chart(data, {"t", "x", "y"}),
         "emit_chart determinism");
  }
  const bool golden = report::emit_chart(test::golden_dataset(), test::golden_spec()) == slurp(test::golden_path());
  note(golden, "golden chart bytes");
  return judge(broken.empty(), broken.empty() ? fmt::format("{} randomized cases and the golden chart hold", cases)
                                              : "counterexample: " + broken);
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "light-medium average power", 1, avg_power_table},
      {2, "cluster sizing", 1, sizing_table},
      {3, "battery arithmetic", 1, battery_arithmetic},
      {4, "reuse factor", 1, reuse},
      {5, "smart charging, synthetic trace", 5, synthetic_charging},
      {6, "smart charging, CAISO April 2021", 30, caiso_charging},
      {7, "thermal provisioning and box model", 10, thermal_checks},
      {8, "cluster CCI ordering and crossover", 10, cluster_curves},
      {9, "PUE calibration", 1, pue_checks},
      {10, "per-query comparison", 1, query_checks},
      {11, "property suites", 60, property_suites},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = fail(std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.status != Status::kSkip && secs > c.budget_s) {
      o.status = Status::kFail;
      o.detail += fmt::format(" over the {} s budget", c.budget_s);
    }
    const char* tag = o.status == Status::kPass ? "PASS" : o.status == Status::kFail ? "FAIL" : "SKIP";
    failed += o.status == Status::kFail;
    std::cout << fmt::format("{} [{:2}] {}: {} ({:.3f} s)\n", tag, c.id, c.name, o.detail, secs);
  }
  std::cout << (failed == 0 ? "acceptance: no failures\n" : fmt::format("acceptance: {} failed\n", failed));
  return failed == 0 ? 0 : 1;
}
