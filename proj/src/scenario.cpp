#include "jcci/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "jcci/carbon.hpp"
#include "jcci/charging.hpp"
#include "jcci/cluster.hpp"
#include "jcci/error.hpp"
#include "jcci/report.hpp"
#include "jcci/units.hpp"

namespace jcci::scenario {

namespace fs = std::filesystem;
using report::num;
using report::sig;
using textconf::Section;

namespace {

std::vector<std::string> strings_or(const Section& s, const char* key, std::vector<std::string> fallback) {
  return s.has(key) ? s.strings(key) : std::move(fallback);
}

std::vector<double> month_grid(const Section& s) {
  const double max = s.opt_number("months_max").value_or(60.0);
  const double step = s.opt_number("month_step").value_or(1.0);
  if (!(step > 0.0) || !(max >= step)) throw InputError("months_max must be >= month_step > 0");
  std::vector<double> out;
  for (int i = 1;; ++i) {
    const double m = step * i;
    if (m > max + 1e-9) break;
    out.push_back(m);
  }
  return out;
}

std::string resolve_path(const RunContext& ctx, const std::string& p) {
  if (fs::path(p).is_absolute() || ctx.data_dir.empty()) return p;
  return (fs::path(ctx.data_dir) / p).string();
}

void add_csv(Bundle& b, const std::string& name, const report::Table& t) {
  b.outputs.push_back({name + ".csv", OutputKind::kCsv, t.to_csv()});
}

report::ChartSpec chart(std::string title, std::string x_label, std::string y_label) {
  report::ChartSpec c;
  c.title = std::move(title);
  c.x_label = std::move(x_label);
  c.y_label = std::move(y_label);
  return c;
}

void add_svg(Bundle& b, const std::string& name, const report::Dataset& d, const report::ChartSpec& spec) {
  b.outputs.push_back({name + ".svg", OutputKind::kSvg, report::emit_chart(d, spec)});
}

std::vector<Regime> regimes_of(const Section& s, std::vector<std::string> fallback) {
  std::vector<Regime> out;
  for (const auto& r : strings_or(s, "regimes", std::move(fallback))) out.push_back(regime_from_string(r));
  return out;
}

// ---- ops ----

void op_single_cci(const Section& s, const RunContext& ctx, Bundle& b) {
  const auto& reg = *ctx.registry;
  const auto devices = s.strings("devices");
  const auto benches = strings_or(s, "benchmarks", {"sgemm", "pdf_render", "dijkstra"});
  const auto regimes = regimes_of(s, {"ca", "solar", "zero"});
  const auto months = month_grid(s);
  const auto out = s.opt_string("output").value_or("fig3");
  const auto load = reg.load_profile(s.opt_string("load").value_or("light_medium"));

  report::Table t({"benchmark", "regime", "device", "mode", "lifetime_months", "c_m_kg", "c_c_kg", "c_n_kg", "cci_mg",
                   "unit", "provenance"});
  for (const auto& bench : benches) {
    for (const auto& regime : regimes) {
      report::Dataset data;
      std::string unit;
      for (const auto& key : devices) {
        const auto& dev = reg.device(key);
        SingleOptions opts;
        opts.mode = dev.reused_default ? Mode::kReused : Mode::kNew;
        opts.replace_batteries = regime.charging;
        report::Series series{dev.name, {}, {}};
        for (double m : months) {
          const auto r = cci_single(dev, load, dev.benchmark(bench), units::months(m), regime.ci, opts);
          unit = r.unit;
          t.add_row({bench, regime.name, key, to_string(opts.mode), num(m), sig(r.breakdown.c_m, 8),
                     sig(r.breakdown.c_c, 8), sig(r.breakdown.c_n, 8), sig(r.cci_mg(), 8), r.unit, "computed"});
          series.x.push_back(m);
          series.y.push_back(r.cci_mg());
        }
        data.series.push_back(std::move(series));
      }
      add_svg(b, fmt::format("{}_{}_{}", out, bench, regime.name), data,
              chart(fmt::format("Single-device CCI, {} ({})", bench, regime.name), "lifetime (months)",
               fmt::format("CCI (mgCO2e / {})", unit)));
    }
  }
  add_csv(b, out, t);
}

void op_charge_day(const Section& s, const RunContext& ctx, Bundle& b) {
  const auto& reg = *ctx.registry;
  const auto devices = s.strings("devices");
  const auto trace_name = s.string("trace");
  const auto fallback = s.opt_string("fallback_trace");
  const auto chart_day = static_cast<size_t>(s.opt_number("chart_day").value_or(1.0));
  const auto percentile = s.opt_number("percentile");
  const auto reference = s.has("reference_savings") ? s.numbers("reference_savings") : std::vector<double>{};
  const auto out = s.opt_string("output").value_or("fig6");
  const auto load = reg.load_profile(s.opt_string("load").value_or("light_medium"));
  if (!reference.empty() && reference.size() != devices.size())
    throw InputError("reference_savings must have one entry per device");

  std::string used = trace_name;
  auto it = ctx.traces.find(trace_name);
  if (it == ctx.traces.end() && fallback) {
    it = ctx.traces.find(*fallback);
    used = *fallback;
    b.notes.push_back(fmt::format("trace '{}' not supplied; using '{}' instead", trace_name, *fallback));
  }
  if (it == ctx.traces.end()) throw InputError(fmt::format("trace '{}' not supplied", trace_name));
  const auto& trace = it->second;

  report::Table summary({"device", "trace", "percentile", "median_daily_savings", "aggregate_savings",
                         "forced_charge_steps", "reference_savings", "provenance"});
  report::Table daily({"device", "day", "smart_intensity", "baseline_intensity", "savings"});
  const auto full = trace.full_days();
  if (chart_day >= full.size()) throw InputError(fmt::format("chart_day {} beyond the trace's {} full days", chart_day, full.size()));
  const auto day = full[chart_day];
  const auto [first, last] = trace.day_range(day);
  const double t0 = static_cast<double>(trace.samples()[first].timestamp);
  const double t_end = t0 + units::kSecondsPerDay;

  for (size_t k = 0; k < devices.size(); ++k) {
    const auto& dev = reg.device(devices[k]);
    charging::ChargePolicy policy;
    policy.percentile = percentile;
    const auto r = charging::simulate(dev, load, trace, policy);
    summary.add_row({devices[k], used, sig(r.percentile, 6), sig(r.median_daily_savings, 6), sig(r.savings_fraction, 6),
                     std::to_string(r.forced_charge_steps), reference.empty() ? "" : num(reference[k]),
                     used == trace_name ? "computed" : "computed-synthetic"});
    for (const auto& d : r.daily)
      daily.add_row({devices[k], std::to_string(d.day), sig(d.smart_intensity, 8), sig(d.baseline_intensity, 8),
                     sig(d.savings, 8)});

    report::Dataset data;
    report::Series ci{"grid intensity", {}, {}};
    report::Series th{"threshold", {}, {}, true};
    for (size_t i = first; i < last; ++i) {
      const double h = (static_cast<double>(trace.samples()[i].timestamp) - t0) / units::kSecondsPerHour;
      ci.x.push_back(h);
      ci.y.push_back(trace.samples()[i].intensity);
      th.x.push_back(h);
      th.y.push_back(r.steps[i].threshold);
    }
    data.series = {ci, th};
    for (const auto& w : r.schedule) {
      const double a = std::max(static_cast<double>(w.start), t0);
      const double e = std::min(static_cast<double>(w.end), t_end);
      if (e <= a) continue;
      data.shades.push_back({(a - t0) / units::kSecondsPerHour, (e - t0) / units::kSecondsPerHour,
                             w.forced ? "forced charging" : "charging"});
    }
    add_svg(b, fmt::format("{}_{}", out, devices[k]), data,
            chart(fmt::format("Smart charging, {} (day {})", dev.name, day), "hour of day", "gCO2e/kWh"));
  }
  add_csv(b, out + "_summary", summary);
  add_csv(b, out + "_daily", daily);
}

void op_cluster_cci(const Section& s, const RunContext& ctx, Bundle& b) {
  const auto& reg = *ctx.registry;
  const auto file = load_design_file(resolve_path(ctx, s.string("design_file")), reg);
  std::vector<std::string> all;
  for (const auto& d : file.designs) all.push_back(d.key);
  const auto keys = strings_or(s, "designs", all);
  const auto benches = strings_or(s, "benchmarks", {"sgemm", "pdf_render", "dijkstra"});
  const auto regimes = regimes_of(s, {"ca", "solar"});
  const auto months = month_grid(s);
  const auto reference = s.opt_string("reference");
  const auto out = s.opt_string("output").value_or("fig7");
  const auto load = reg.load_profile(s.opt_string("load").value_or("light_medium"));

  std::vector<double> lifetimes;
  for (double m : months) lifetimes.push_back(units::months(m));

  report::Table t({"benchmark", "regime", "design", "n_devices", "computed_n", "lifetime_months", "c_m_kg", "c_c_kg",
                   "c_n_kg", "cci_mg", "unit", "provenance"});
  report::Table cross({"benchmark", "regime", "design", "reference", "crossover_month"});
  std::set<std::string> noted;
  for (const auto& bench : benches) {
    for (const auto& regime : regimes) {
      report::Dataset data;
      std::string unit;
      std::map<std::string, std::vector<double>> curves;
      for (const auto& key : keys) {
        const auto& d = find_design(file, key);
        const auto sized = resolve(d, bench, regime.charging);
        const auto results = cluster_cci(d, load, bench, lifetimes, regime);
        const char* prov = sized.overridden ? "listed-override" : "computed";
        if (sized.overridden && noted.insert(key + bench).second)
          b.notes.push_back(fmt::format("{} {}: table N = {} used; ceil rule gives {}", key, bench, sized.n,
                                        sized.computed_n));
        if (d.mgmt_fraction > 0.0 && noted.insert(key).second)
          b.notes.push_back(fmt::format("{}: {:.0f}% of devices are management nodes and do no benchmark work", key,
                                        d.mgmt_fraction * 100));
        report::Series series{d.name, {}, {}};
        for (size_t i = 0; i < results.size(); ++i) {
          const auto& r = results[i];
          unit = r.unit;
          t.add_row({bench, regime.name, key, std::to_string(sized.n), std::to_string(sized.computed_n), num(months[i]),
                     sig(r.breakdown.c_m, 8), sig(r.breakdown.c_c, 8), sig(r.breakdown.c_n, 8), sig(r.cci_mg(), 8),
                     r.unit, prov});
          series.x.push_back(months[i]);
          series.y.push_back(r.cci_mg());
        }
        curves[key] = series.y;
        data.series.push_back(std::move(series));
      }
      if (reference) {
        const auto ref = curves.find(*reference);
        if (ref == curves.end()) throw InputError(fmt::format("reference design '{}' not in the design list", *reference));
        for (const auto& key : keys) {
          if (key == *reference) continue;
          std::string at = "none";
          const auto& c = curves[key];
          for (size_t i = 0; i < c.size(); ++i)
            if (c[i] >= ref->second[i]) {
              at = num(months[i]);
              break;
            }
          cross.add_row({bench, regime.name, key, *reference, at});
        }
      }
      add_svg(b, fmt::format("{}_{}_{}", out, bench, regime.name), data,
              chart(fmt::format("Cluster CCI, {} ({})", bench, regime.name), "lifetime (months)",
               fmt::format("CCI (mgCO2e / {})", unit)));
    }
  }
  add_csv(b, out, t);
  if (reference) add_csv(b, out + "_crossover", cross);
}

void op_query_comparison(const Section& s, const RunContext& ctx, Bundle& b) {
  const auto file = load_design_file(resolve_path(ctx, s.string("query_file")), *ctx.registry);
  const double years_max = s.opt_number("years_max").value_or(5.0);
  const auto out = s.opt_string("output").value_or("fig9");

  report::Table t({"query", "variant", "cluster_kg", "rival_kg", "cluster_mg_per_query", "rival_mg_per_query", "ratio",
                   "reference_ratio", "provenance"});
  for (size_t i = 0; i < file.queries.size(); ++i) {
    const auto& q = file.queries[i];
    const auto& d = find_design(file, file.query_designs[i]);
    for (bool savings : {true, false}) {
      const auto r = query_carbon_comparison(q, d, savings);
      t.add_row({q.key, savings ? "with_smart_charging" : "without_smart_charging", sig(r.cluster_carbon, 8),
                 sig(r.rival_carbon, 8), sig(r.cluster_per_query * 1e6, 8), sig(r.rival_per_query * 1e6, 8),
                 sig(r.ratio, 6), q.reference_ratio ? num(*q.reference_ratio) : "", "computed"});
    }
    report::Dataset data;
    report::Series with{"cloudlet (smart charging)", {}, {}};
    report::Series without{"cloudlet", {}, {}, true};
    report::Series rival{"server", {}, {}};
    for (double y = 0.5; y <= years_max + 1e-9; y += 0.5) {
      auto qq = q;
      qq.lifetime = units::years(y);
      const auto a = query_carbon_comparison(qq, d, true);
      const auto c = query_carbon_comparison(qq, d, false);
      for (auto* ser : {&with, &without, &rival}) ser->x.push_back(y);
      with.y.push_back(a.cluster_per_query * 1e9);
      without.y.push_back(c.cluster_per_query * 1e9);
      rival.y.push_back(a.rival_per_query * 1e9);
    }
    data.series = {with, without, rival};
    add_svg(b, fmt::format("{}_{}", out, q.key), data,
            chart(fmt::format("Carbon per query, {}", q.name), "lifetime (years)", "ugCO2e / query"));
  }
  add_csv(b, out, t);
}

void op_sizing(const Section& s, const RunContext& ctx, Bundle& b) {
  const auto& reg = *ctx.registry;
  const auto devices = s.strings("devices");
  const auto benches = strings_or(s, "benchmarks", {"sgemm", "pdf_render", "dijkstra", "memory_copy"});
  const auto& base = reg.device(s.opt_string("baseline").value_or("poweredge_r740"));
  const auto out = s.opt_string("output").value_or("table1");

  report::Table t({"device", "benchmark", "baseline_multi", "device_multi", "computed_n", "listed_n", "n_used",
                   "provenance"});
  int cells = 0, matches = 0;
  for (const auto& key : devices) {
    const auto& dev = reg.device(key);
    for (const auto& bench : benches) {
      const auto& db = dev.benchmark(bench);
      const int n = size_cluster(base.benchmark(bench), db);
      std::string prov = "computed";
      int used = n;
      if (db.listed_n) {
        ++cells;
        if (*db.listed_n == n) {
          ++matches;
        } else {
          prov = "listed-override";
          used = *db.listed_n;
        }
      }
      t.add_row({key, bench, num(base.benchmark(bench).multi), num(db.multi), std::to_string(n),
                 db.listed_n ? std::to_string(*db.listed_n) : "", std::to_string(used), prov});
    }
  }
  b.notes.push_back(fmt::format("sizing: ceil rule matches {} of {} table cells", matches, cells));
  add_csv(b, out, t);
}

void op_avg_power(const Section& s, const RunContext& ctx, Bundle& b) {
  const auto& reg = *ctx.registry;
  const auto devices = s.strings("devices");
  const auto reference = s.has("reference_avg_w") ? s.numbers("reference_avg_w") : std::vector<double>{};
  const auto out = s.opt_string("output").value_or("table2");
  const auto load = reg.load_profile(s.opt_string("load").value_or("light_medium"));
  if (!reference.empty() && reference.size() != devices.size()) throw InputError("reference_avg_w must have one entry per device");

  report::Table t({"device", "p100_w", "p50_w", "p10_w", "p_idle_w", "avg_power_w", "reference_avg_w", "rel_diff",
                   "provenance"});
  for (size_t i = 0; i < devices.size(); ++i) {
    const auto& dev = reg.device(devices[i]);
    const double p = avg_power(dev.power, load);
    std::string ref, diff;
    if (!reference.empty()) {
      ref = num(reference[i]);
      diff = sig((p - reference[i]) / reference[i], 4);
    }
    t.add_row({devices[i], num(dev.power.p100), num(dev.power.p50), num(dev.power.p10), num(dev.power.p_idle),
               sig(p, 8), ref, diff, "computed"});
  }
  add_csv(b, out, t);
}

std::vector<const DatacenterDesign*> pick_datacenters(const Section& s, const DesignFile& file) {
  std::vector<const DatacenterDesign*> out;
  if (!s.has("datacenters")) {
    for (const auto& dc : file.datacenters) out.push_back(&dc);
    return out;
  }
  for (const auto& key : s.strings("datacenters")) {
    auto it = std::find_if(file.datacenters.begin(), file.datacenters.end(), [&](const auto& d) { return d.key == key; });
    if (it == file.datacenters.end()) throw InputError(fmt::format("no datacenter '{}'", key));
    out.push_back(&*it);
  }
  return out;
}

void op_datacenter(const Section& s, const RunContext& ctx, Bundle& b) {
  const auto& reg = *ctx.registry;
  const auto file = load_design_file(resolve_path(ctx, s.string("design_file")), reg);
  const auto dcs = pick_datacenters(s, file);
  const auto benches = strings_or(s, "benchmarks", {"sgemm", "pdf_render", "dijkstra"});
  const auto regime = regime_from_string(s.opt_string("regime").value_or("ca"));
  const double years = s.opt_number("years").value_or(3.0);
  const auto out = s.opt_string("output").value_or("table4");
  const auto load = reg.load_profile(s.opt_string("load").value_or("light_medium"));

  report::Table t({"datacenter", "benchmark", "unit_count", "unit_it_power_w", "pue", "c_m_kg", "c_c_kg", "c_n_kg",
                   "cci_mg", "unit", "provenance"});
  for (const auto* dc : dcs) {
    for (const auto& bench : benches) {
      const auto r = datacenter_cci(*dc, load, bench, units::years(years), regime);
      t.add_row({dc->key, bench, std::to_string(dc->unit_count), sig(unit_it_power(*dc, load), 8),
                 sig(pue(*dc, load), 6), sig(r.breakdown.c_m, 8), sig(r.breakdown.c_c, 8), sig(r.breakdown.c_n, 8),
                 sig(r.cci_mg(), 8), r.unit, "computed"});
    }
  }
  add_csv(b, out, t);
}

void op_pue(const Section& s, const RunContext& ctx, Bundle& b) {
  const auto& reg = *ctx.registry;
  const auto file = load_design_file(resolve_path(ctx, s.string("design_file")), reg);
  const auto dcs = pick_datacenters(s, file);
  const auto targets = s.has("targets") ? s.numbers("targets") : std::vector<double>{};
  const auto out = s.opt_string("output").value_or("pue");
  const auto load = reg.load_profile(s.opt_string("load").value_or("light_medium"));
  if (!targets.empty() && targets.size() != dcs.size()) throw InputError("targets must have one entry per datacenter");

  report::Table t({"datacenter", "unit_it_power_w", "rack_units", "floor_area_m2", "cooling_overhead", "pue", "target",
                   "provenance"});
  for (size_t i = 0; i < dcs.size(); ++i) {
    const auto& dc = *dcs[i];
    t.add_row({dc.key, sig(unit_it_power(dc, load), 8), num(dc.rack_units), sig(dc.floor_area_per_unit, 8),
               sig(dc.cooling_overhead, 8), sig(pue(dc, load), 6), targets.empty() ? "" : num(targets[i]),
               "computed"});
  }
  add_csv(b, out, t);

  if (targets.size() == 2) {
    const auto& a = *dcs[0];
    const auto& c = *dcs[1];
    const auto cal = calibrate_pue(unit_it_power(a, load), a.rack_units, targets[0], unit_it_power(c, load),
                                   c.rack_units, targets[1], a.lighting_power_density, a.space_overhead_cooling);
    report::Table ct({"parameter", "calibrated", "frozen"});
    ct.add_row({"cooling_overhead", num(cal.cooling_overhead), num(a.cooling_overhead)});
    ct.add_row({"area_per_rack_unit_m2", num(cal.area_per_rack_unit), num(a.floor_area_per_unit / a.rack_units)});
    add_csv(b, out + "_calibration", ct);
  }
}

using OpFn = std::function<void(const Section&, const RunContext&, Bundle&)>;

const std::map<std::string, OpFn>& ops() {
  static const std::map<std::string, OpFn> table = {
      {"single_cci", op_single_cci}, {"charge_day", op_charge_day}, {"cluster_cci", op_cluster_cci},
      {"query_comparison", op_query_comparison}, {"sizing", op_sizing}, {"avg_power", op_avg_power},
      {"datacenter", op_datacenter}, {"pue", op_pue},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& known_ops() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : ops()) v.push_back(k);
    return v;
  }();
  return names;
}

std::vector<size_t> execution_order(const Scenario& s) {
  std::map<std::string, size_t> index;
  for (size_t i = 0; i < s.steps.size(); ++i) index[s.steps[i].id] = i;
  std::vector<int> pending(s.steps.size(), 0);
  std::vector<std::vector<size_t>> next(s.steps.size());
  for (size_t i = 0; i < s.steps.size(); ++i) {
    for (const auto& dep : s.steps[i].after) {
      const auto it = index.find(dep);
      if (it == index.end())
        throw InvariantError("scenario " + s.name, fmt::format("step '{}' depends on unknown step '{}'", s.steps[i].id, dep));
      next[it->second].push_back(i);
      ++pending[i];
    }
  }
  std::set<size_t> ready;
  for (size_t i = 0; i < s.steps.size(); ++i)
    if (pending[i] == 0) ready.insert(i);
  std::vector<size_t> order;
  while (!ready.empty()) {
    const size_t i = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(i);
    for (size_t j : next[i])
      if (--pending[j] == 0) ready.insert(j);
  }
  if (order.size() != s.steps.size()) throw InvariantError("scenario " + s.name, "step dependencies form a cycle");
  return order;
}

void validate(const Scenario& s, const Registry& registry) {
  const std::string rec = "scenario " + s.name;
  std::set<std::string> ids;
  for (const auto& st : s.steps) {
    if (!ids.insert(st.id).second) throw InvariantError(rec, fmt::format("duplicate step '{}'", st.id));
    if (!ops().count(st.op)) throw InvariantError(rec, fmt::format("step '{}' has unknown op '{}'", st.id, st.op));
    for (const auto& e : st.params.entries()) {
      if (e.key != "devices" && e.key != "baseline") continue;
      std::vector<std::string> keys;
      if (const auto* v = std::get_if<std::vector<std::string>>(&e.value)) keys = *v;
      if (const auto* v = std::get_if<std::string>(&e.value)) keys = {*v};
      for (const auto& k : keys)
        if (registry.find_device(k) == nullptr)
          throw InvariantError(rec, fmt::format("step '{}' references unknown device '{}'", st.id, k));
    }
  }
  execution_order(s);
}

Scenario parse_scenario(const std::string& text, const std::string& source) {
  const auto doc = textconf::Document::parse(text, source);
  Scenario s;
  const auto* top = doc.find("scenario");
  if (top == nullptr) throw ParseError(source, 0, "scenario", "missing [scenario] section");
  s.name = top->string("name");
  s.description = top->opt_string("description").value_or("");
  top->reject_unread();
  for (const auto& sec : doc.sections()) {
    const auto parts = sec.parts();
    if (parts.size() == 1 && parts[0] == "scenario") continue;
    if (parts.size() != 3 || parts[0] != "scenario" || parts[1] != "step")
      throw ParseError(source, sec.line(), sec.path(), "expected [scenario] or [scenario.step.<id>]");
    Step st{parts[2], sec.string("op"), sec.has("after") ? sec.strings("after") : std::vector<std::string>{}, sec};
    s.steps.push_back(std::move(st));
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open scenario '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path);
}

std::vector<std::string> bundled_scenarios(const std::string& data_dir) {
  std::vector<std::string> out;
  const fs::path dir = fs::path(data_dir) / "scenarios";
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".conf") out.push_back(e.path().stem().string());
  std::sort(out.begin(), out.end());
  return out;
}

std::string bundled_scenario_path(const std::string& data_dir, const std::string& name) {
  return (fs::path(data_dir) / "scenarios" / (name + ".conf")).string();
}

Bundle run_scenario(const Scenario& s, const RunContext& ctx) {
  if (ctx.registry == nullptr) throw InputError("run_scenario: no registry");
  validate(s, *ctx.registry);
  Bundle bundle;
  for (size_t i : execution_order(s)) {
    const auto& st = s.steps[i];
    const std::string where = fmt::format("step '{}' ({})", st.id, st.op);
    // A fresh copy so unread-key tracking starts clean on every run.
    Section params = st.params;
    try {
      params.string("op");
      if (params.has("after")) params.strings("after");
      ops().at(st.op)(params, ctx, bundle);
      params.reject_unread();
    } catch (const ModelError& e) {
      throw ModelError(where + ": " + e.what());
    } catch (const InputError& e) {
      throw InputError(where + ": " + e.what());
    }
  }
  return bundle;
}

Format format_from_string(const std::string& s) {
  if (s == "csv") return Format::kCsv;
  if (s == "svg") return Format::kSvg;
  if (s == "both") return Format::kBoth;
  throw InputError(fmt::format("unknown format '{}' (expected csv, svg, or both)", s));
}

std::vector<std::string> write_bundle(const Bundle& bundle, const std::string& dir, Format format) {
  std::vector<std::string> written;
  if (bundle.outputs.empty()) return written;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError(fmt::format("cannot create '{}': {}", dir, ec.message()));
  for (const auto& o : bundle.outputs) {
    if (format == Format::kCsv && o.kind != OutputKind::kCsv) continue;
    if (format == Format::kSvg && o.kind != OutputKind::kSvg) continue;
    const auto path = (fs::path(dir) / o.name).string();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError(fmt::format("cannot write '{}'", path));
    f << o.content;
    written.push_back(path);
  }
  return written;
}

}  // namespace jcci::scenario
