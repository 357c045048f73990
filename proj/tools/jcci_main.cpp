// jcci: carbon accounting for reused devices.
//
// Exit codes: 0 ok, 1 input error, 2 model error.

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "jcci/carbon.hpp"
#include "jcci/charging.hpp"
#include "jcci/cluster.hpp"
#include "jcci/error.hpp"
#include "jcci/grid.hpp"
#include "jcci/registry.hpp"
#include "jcci/report.hpp"
#include "jcci/scenario.hpp"
#include "jcci/thermal.hpp"
#include "jcci/units.hpp"

namespace fs = std::filesystem;
using namespace jcci;
using report::num;
using report::sig;

namespace {

constexpr std::int64_t kPacificDaylightOffset = -7 * 3600;

struct Globals {
  std::string registry_path;
  std::string out_dir;
  std::string format = "both";
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write '{}'", path));
  out << content;
}

std::string data_dir() {
  if (const char* env = std::getenv("JCCI_DATA")) return env;
  return JCCI_DATA_DIR;
}

Registry registry(const Globals& g) { return load_registry(g.registry_path.empty() ? default_registry_path() : g.registry_path); }

// CSV tables go to stdout; with --out-dir they are also written there
// (together with charts) according to --format.
void emit(const Globals& g, scenario::Bundle bundle, bool print_csv = true) {
  if (print_csv) {
    const auto tables = std::count_if(bundle.outputs.begin(), bundle.outputs.end(),
                                      [](const auto& o) { return o.kind == scenario::OutputKind::kCsv; });
    for (const auto& o : bundle.outputs) {
      if (o.kind != scenario::OutputKind::kCsv) continue;
      if (tables > 1) std::cout << "# " << o.name << '\n';
      std::cout << o.content;
    }
  }
  for (const auto& n : bundle.notes) std::cerr << "note: " << n << '\n';
  if (!g.out_dir.empty())
    for (const auto& p : scenario::write_bundle(bundle, g.out_dir, scenario::format_from_string(g.format)))
      std::cerr << "wrote " << p << '\n';
}

// --ci accepts a number in gCO2e/kWh, a named mix, or a trace CSV (its mean is used).
Regime pick_regime(const std::string& name, const std::string& ci) {
  auto r = regime_from_string(name);
  if (ci.empty()) return r;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(ci.data(), ci.data() + ci.size(), v);
  if (ec == std::errc() && ptr == ci.data() + ci.size()) {
    r.ci = v;
  } else if (fs::is_regular_file(ci)) {
    const auto t = grid::load_trace(ci, 300);
    r.ci = grid::mean_intensity(t, t.samples().front().timestamp, t.samples().back().timestamp + t.interval());
  } else {
    r.ci = grid::mix_intensity(grid::named_mix(ci));
  }
  r.name = ci;
  return r;
}

std::map<std::string, grid::GridTrace> scenario_traces(const std::string& caiso_path) {
  std::map<std::string, grid::GridTrace> traces;
  grid::SyntheticSpec spec;
  spec.start = 1617235200;  // 2021-04-01 00:00 UTC
  spec.days = 30;
  spec.noise_sd = 15.0;
  spec.seed = 2021;
  traces.emplace("synthetic", grid::synthetic_trace(spec));

  std::string path = caiso_path;
  if (path.empty())
    if (const char* env = std::getenv("JCCI_CAISO_TRACE")) path = env;
  if (path.empty()) {
    const auto bundled = fs::path(data_dir()) / "caiso_2021_04.csv";
    if (fs::exists(bundled)) path = bundled.string();
  }
  if (!path.empty()) traces.emplace("caiso", grid::load_trace(path, 300, kPacificDaylightOffset));
  return traces;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Computational carbon intensity of new and reused devices"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--registry", g.registry_path, "Device registry file (default: $JCCI_REGISTRY or the bundled one)");
  app.add_option("--out-dir", g.out_dir, "Write CSV/SVG outputs here");
  app.add_option("--format", g.format, "Outputs to write: csv, svg, or both")
      ->check(CLI::IsMember({"csv", "svg", "both"}));

  std::function<void()> action;

  // ---- registry ----
  auto* reg_cmd = app.add_subcommand("registry", "Inspect and validate device registries");
  reg_cmd->require_subcommand(1);
  std::string reg_path;
  auto* reg_validate = reg_cmd->add_subcommand("validate", "Parse and validate a registry file");
  reg_validate->add_option("path", reg_path, "Registry file (default: the --registry one)");
  reg_validate->callback([&] {
    action = [&] {
      const auto r = reg_path.empty() ? registry(g) : load_registry(reg_path);
      fmt::print("ok: {} devices, {} peripherals, {} load profiles\n", r.devices().size(), r.peripherals().size(),
                 r.load_profiles().size());
    };
  });
  std::string show_key;
  auto* reg_show = reg_cmd->add_subcommand("show", "Print one device and its derived quantities");
  reg_show->add_option("device", show_key)->required();
  reg_show->callback([&] {
    action = [&] {
      const auto r = registry(g);
      const auto& d = r.device(show_key);
      const auto lm = LoadProfile::light_medium();
      fmt::print("{} ({}, {})\n", d.name, d.key, d.release_year);
      fmt::print("  power W: 100%={} 50%={} 10%={} idle={}  light-medium avg={:.4g}\n", d.power.p100, d.power.p50,
                 d.power.p10, d.power.p_idle, avg_power(d.power, lm));
      fmt::print("  embodied {} kgCO2e, default mode {}\n", d.embodied_carbon_total, d.reused_default ? "reused" : "new");
      for (const auto& b : d.benchmarks)
        fmt::print("  {:<12} {:>8} {}/s single, {:>8} multi{}\n", b.name, b.single, b.unit, b.multi,
                   b.listed_n ? fmt::format(", table N {}", *b.listed_n) : "");
      if (d.battery)
        fmt::print("  battery {:.0f} J, charge {} W, {} cycles, {} kgCO2e; life {:.1f} days\n", d.battery->usable_energy(),
                   d.battery->charge_power, d.battery->cycle_limit, d.battery->embodied_carbon,
                   battery_lifetime_days(*d.battery, avg_power(d.power, lm)));
      if (!d.citation.empty()) fmt::print("  source: {}\n", d.citation);
    };
  });

  // ---- grid ----
  auto* grid_cmd = app.add_subcommand("grid", "Grid carbon-intensity traces");
  grid_cmd->require_subcommand(1);
  std::string caiso_in, grid_out;
  auto* imp = grid_cmd->add_subcommand("import-caiso", "Convert a CAISO emissions export to the canonical trace CSV");
  imp->add_option("input", caiso_in)->required()->check(CLI::ExistingFile);
  imp->add_option("-o,--output", grid_out, "Output path (default stdout)");
  imp->callback([&] {
    action = [&] {
      const auto csv = grid::import_caiso(read_file(caiso_in), caiso_in);
      if (grid_out.empty()) {
        std::cout << csv;
      } else {
        write_file(grid_out, csv);
      }
    };
  });
  grid::SyntheticSpec synth;
  auto* syn = grid_cmd->add_subcommand("synth", "Generate a synthetic trace with a midday dip");
  syn->add_option("--days", synth.days)->capture_default_str();
  syn->add_option("--interval", synth.interval_s, "Seconds between samples")->capture_default_str();
  syn->add_option("--start", synth.start, "UTC seconds of the first sample")->capture_default_str();
  syn->add_option("--base", synth.base)->capture_default_str();
  syn->add_option("--dip", synth.dip_depth)->capture_default_str();
  syn->add_option("--noise", synth.noise_sd)->capture_default_str();
  syn->add_option("--seed", synth.seed)->capture_default_str();
  syn->add_option("-o,--output", grid_out, "Output path (default stdout)");
  syn->callback([&] {
    action = [&] {
      const auto csv = grid::write_trace(grid::synthetic_trace(synth));
      if (grid_out.empty()) {
        std::cout << csv;
      } else {
        write_file(grid_out, csv);
      }
    };
  });

  // ---- cci ----
  auto* cci_cmd = app.add_subcommand("cci", "Computational carbon intensity");
  cci_cmd->require_subcommand(1);
  std::string dev_key, bench = "sgemm", regime_name = "ca", mode_name;
  std::string ci_arg;
  std::vector<double> months{12, 24, 36, 48, 60};
  double net_gbps = 0.0;
  std::optional<double> ei;
  bool batteries = true;
  auto* single = cci_cmd->add_subcommand("single", "CCI of one device over lifetimes");
  single->add_option("--device", dev_key)->required();
  single->add_option("--bench,--benchmark", bench)->capture_default_str();
  single->add_option("--months,--lifetime-months", months, "Lifetimes in months")->capture_default_str();
  single->add_option("--regime", regime_name, "ca, solar, zero, or gas")->capture_default_str();
  single->add_option("--ci", ci_arg, "Grid intensity: gCO2e/kWh, a mix name, or a trace CSV");
  single->add_option("--mode", mode_name, "new or reused (default: registry)");
  single->add_option("--net-gbps", net_gbps, "Network traffic")->capture_default_str();
  single->add_option("--ei", ei, "Network energy intensity, J/byte (default WiFi)");
  single->add_flag("!--no-batteries", batteries, "Ignore battery replacements");
  single->callback([&] {
    action = [&] {
      const auto r = registry(g);
      const auto& d = r.device(dev_key);
      const auto regime = pick_regime(regime_name, ci_arg);
      SingleOptions opts;
      opts.mode = mode_name.empty() ? (d.reused_default ? Mode::kReused : Mode::kNew) : mode_from_string(mode_name);
      opts.replace_batteries = batteries && regime.charging;
      if (net_gbps > 0.0) opts.net = NetworkLoadSpec{net_gbps * 1e9 / 8.0, ei.value_or(kWifiJoulesPerByte)};
      report::Table t({"device", "benchmark", "mode", "ci", "lifetime_months", "c_m_kg", "c_c_kg", "c_n_kg", "ops",
                       "cci_mg", "unit"});
      report::Dataset data;
      report::Series s{d.name, {}, {}};
      for (double m : months) {
        const auto c = cci_single(d, r.load_profile("light_medium"), d.benchmark(bench), units::months(m), regime.ci, opts);
        t.add_row({d.key, bench, to_string(opts.mode), num(regime.ci), num(m), sig(c.breakdown.c_m, 8),
                   sig(c.breakdown.c_c, 8), sig(c.breakdown.c_n, 8), sig(c.total_ops, 10), sig(c.cci_mg(), 8), c.unit});
        s.x.push_back(m);
        s.y.push_back(c.cci_mg());
      }
      data.series.push_back(s);
      scenario::Bundle b;
      b.outputs.push_back({"cci_" + d.key + ".csv", scenario::OutputKind::kCsv, t.to_csv()});
      report::ChartSpec spec;
      spec.title = fmt::format("CCI, {} {}", d.name, bench);
      spec.x_label = "lifetime (months)";
      spec.y_label = "CCI (mgCO2e / op)";
      b.outputs.push_back({"cci_" + d.key + ".svg", scenario::OutputKind::kSvg, report::emit_chart(data, spec)});
      emit(g, b);
    };
  });

  // ---- charge ----
  auto* charge_cmd = app.add_subcommand("charge", "Smart charging");
  charge_cmd->require_subcommand(1);
  std::string trace_path;
  std::int64_t interval = 300, tz = 0;
  charging::ChargePolicy policy;
  std::optional<double> percentile;
  auto* sim = charge_cmd->add_subcommand("simulate", "Run the threshold charger over a trace");
  sim->add_option("--device", dev_key)->required();
  sim->add_option("--trace", trace_path, "Canonical trace CSV")->required()->check(CLI::ExistingFile);
  sim->add_option("--interval", interval, "Trace sample interval, s")->capture_default_str();
  sim->add_option("--tz-offset", tz, "Seconds added to UTC to find calendar days")->capture_default_str();
  sim->add_option("--percentile", percentile, "Charge threshold percentile (default: required duty)");
  sim->add_option("--min-soc", policy.min_soc)->capture_default_str();
  sim->add_option("--efficiency", policy.charge_efficiency)->capture_default_str();
  sim->callback([&] {
    action = [&] {
      const auto r = registry(g);
      const auto& d = r.device(dev_key);
      const auto trace = grid::load_trace(trace_path, interval, tz);
      policy.percentile = percentile;
      const auto res = charging::simulate(d, r.load_profile("light_medium"), trace, policy);
      fmt::print("device {}\npercentile {:.4g}\nmedian daily savings {:.4f}\naggregate savings {:.4f}\n", d.key,
                 res.percentile, res.median_daily_savings, res.savings_fraction);
      fmt::print("smart carbon {:.6g} kg, baseline {:.6g} kg, forced steps {}, unmet {:.4g} J\n", res.smart_carbon,
                 res.baseline_carbon, res.forced_charge_steps, res.unmet_energy);
      report::Table steps({"timestamp", "intensity", "threshold", "soc", "charging", "forced", "wall_energy_j"});
      for (const auto& st : res.steps)
        steps.add_row({std::to_string(st.timestamp), num(st.intensity), num(st.threshold), sig(st.soc, 8),
                       st.charging ? "1" : "0", st.forced ? "1" : "0", sig(st.wall_energy, 8)});
      report::Table windows({"start", "end", "forced"});
      for (const auto& w : res.schedule)
        windows.add_row({std::to_string(w.start), std::to_string(w.end), w.forced ? "1" : "0"});
      scenario::Bundle b;
      b.outputs.push_back({"schedule_" + d.key + ".csv", scenario::OutputKind::kCsv, steps.to_csv()});
      b.outputs.push_back({"windows_" + d.key + ".csv", scenario::OutputKind::kCsv, windows.to_csv()});
      emit(g, b, false);
    };
  });
  auto* duty = charge_cmd->add_subcommand("duty", "Required charging duty, backup runtime, and battery life");
  duty->add_option("--device", dev_key)->required();
  double soc = 0.25;
  double years = 3.0;
  duty->add_option("--soc", soc, "State of charge for the backup runtime")->capture_default_str();
  duty->add_option("--years", years, "Lifetime for battery replacements")->capture_default_str();
  duty->callback([&] {
    action = [&] {
      const auto r = registry(g);
      const auto& d = r.device(dev_key);
      const auto& lm = r.load_profile("light_medium");
      if (!d.battery) throw InputError(fmt::format("device '{}' has no battery", d.key));
      const double p = avg_power(d.power, lm);
      const double days = battery_lifetime_days(*d.battery, p);
      fmt::print("required duty {:.4g} %\n", charging::required_duty(d, lm));
      fmt::print("backup runtime at {:.0f}% {:.4g} h\n", soc * 100, charging::backup_runtime(d, lm, soc) / 3600.0);
      fmt::print("battery life {:.1f} days ({:.3g} years)\n", days, days / units::kDaysPerYear);
      fmt::print("battery carbon over {} years {:.4g} kg ({} batteries)\n", years,
                 battery_replacement_carbon(*d.battery, p, units::years(years)),
                 battery_replacements(*d.battery, p, units::years(years)));
    };
  });

  // ---- thermal ----
  auto* th_cmd = app.add_subcommand("thermal", "Heat output, fans, and the packed-box model");
  th_cmd->require_subcommand(1);
  std::string th_from, th_config = (fs::path(data_dir()) / "thermal_fig4.conf").string();
  std::optional<double> until;
  auto* th_power = th_cmd->add_subcommand("power", "Thermal power between the first and last rows of a sample CSV");
  th_power->add_option("--from", th_from, "Sample CSV: time_s,air_c,<device>_c...")->required()->check(CLI::ExistingFile);
  th_power->add_option("--config", th_config, "Box config supplying air and device masses")->capture_default_str();
  th_power->add_option("--until", until, "Use the last row at or before this time");
  th_power->callback([&] {
    action = [&] {
      const auto cfg = thermal::load_box_config(th_config);
      const auto samples = thermal::parse_samples_csv(read_file(th_from), th_from);
      if (samples.size() < 2) throw InputError("need at least two samples");
      size_t last = samples.size() - 1;
      if (until)
        while (last > 0 && samples[last].time > *until) --last;
      const double w = thermal::thermal_power(cfg.params, samples.front(), samples[last]);
      fmt::print("thermal power {:.4g} W ({:.4g} W/device) over {} s\n", w, w / cfg.params.device_masses.size(),
                 samples[last].time - samples.front().time);
    };
  });
  auto* th_sim = th_cmd->add_subcommand("simulate", "Run the lumped box model");
  th_sim->add_option("--config", th_config)->capture_default_str()->check(CLI::ExistingFile);
  th_sim->callback([&] {
    action = [&] {
      const auto cfg = thermal::load_box_config(th_config);
      const auto res = thermal::simulate_box(cfg.params, cfg.device_powers, cfg.duration, cfg.dt, cfg.sample_every);
      for (const auto& e : res.events)
        std::cerr << fmt::format("shutdown {} at {} s (air {:.1f} C)\n", cfg.device_names[e.device], e.time, e.air_temp);
      std::cerr << fmt::format("energy in {:.1f} J, stored {:.1f} J, leaked {:.1f} J\n", res.electrical_energy,
                               res.stored_energy, res.leaked_energy);
      scenario::Bundle b;
      b.outputs.push_back({"thermal.csv", scenario::OutputKind::kCsv, thermal::samples_csv(cfg.device_names, res.samples)});
      report::Dataset data;
      report::Series air{"air", {}, {}, true};
      std::vector<report::Series> dev;
      for (const auto& n : cfg.device_names) dev.push_back({n, {}, {}});
      for (const auto& s : res.samples) {
        air.x.push_back(s.time / 60.0);
        air.y.push_back(s.air_temp);
        for (size_t i = 0; i < dev.size(); ++i) {
          dev[i].x.push_back(s.time / 60.0);
          dev[i].y.push_back(s.device_temps[i]);
        }
      }
      data.series = dev;
      data.series.push_back(air);
      report::ChartSpec spec;
      spec.title = "Packed box temperatures";
      spec.x_label = "time (min)";
      spec.y_label = "temperature (C)";
      b.outputs.push_back({"thermal.svg", scenario::OutputKind::kSvg, report::emit_chart(data, spec)});
      emit(g, b, g.out_dir.empty());
    };
  });
  double watts = 0.0;
  std::string fan_key = "server_fan";
  auto* th_fans = th_cmd->add_subcommand("fans", "Fans needed to remove a heat load");
  th_fans->add_option("--watts", watts)->required();
  th_fans->add_option("--fan", fan_key)->capture_default_str();
  th_fans->callback([&] {
    action = [&] {
      const auto r = registry(g);
      fmt::print("{}\n", thermal::provision_fans(watts, r.peripheral(fan_key)));
    };
  });

  // ---- cluster ----
  auto* cl_cmd = app.add_subcommand("cluster", "Cloudlets built from one device type");
  cl_cmd->require_subcommand(1);
  std::string baseline_key = "poweredge_r740";
  auto* cl_size = cl_cmd->add_subcommand("size", "Devices needed to match the baseline's throughput");
  cl_size->add_option("--device", dev_key)->required();
  cl_size->add_option("--bench", bench)->capture_default_str();
  cl_size->add_option("--baseline", baseline_key)->capture_default_str();
  cl_size->callback([&] {
    action = [&] {
      const auto r = registry(g);
      const auto& db = r.device(dev_key).benchmark(bench);
      const int n = size_cluster(r.device(baseline_key).benchmark(bench), db);
      fmt::print("{}\n", n);
      if (db.listed_n && *db.listed_n != n) std::cerr << fmt::format("note: table lists N = {}\n", *db.listed_n);
    };
  });
  std::string design_path = (fs::path(data_dir()) / "designs" / "cloudlets.conf").string();
  std::vector<std::string> design_keys;
  auto* cl_cci = cl_cmd->add_subcommand("cci", "Cloudlet CCI over lifetimes");
  cl_cci->add_option("--design", design_path, "Design file")->capture_default_str()->check(CLI::ExistingFile);
  cl_cci->add_option("--name", design_keys, "Design keys (default: all)");
  cl_cci->add_option("--bench", bench)->capture_default_str();
  cl_cci->add_option("--regime", regime_name, "ca, solar, or zero")->capture_default_str();
  cl_cci->add_option("--months", months)->capture_default_str();
  cl_cci->callback([&] {
    action = [&] {
      const auto r = registry(g);
      const auto file = load_design_file(design_path, r);
      const auto regime = regime_from_string(regime_name);
      std::vector<double> lifetimes;
      for (double m : months) lifetimes.push_back(units::months(m));
      if (design_keys.empty())
        for (const auto& d : file.designs) design_keys.push_back(d.key);
      report::Table t({"design", "benchmark", "regime", "n_devices", "lifetime_months", "c_m_kg", "c_c_kg", "c_n_kg",
                       "cci_mg", "unit", "provenance"});
      report::Dataset data;
      std::string unit;
      for (const auto& key : design_keys) {
        const auto& d = find_design(file, key);
        const auto sized = resolve(d, bench, regime.charging);
        const auto res = cluster_cci(d, r.load_profile("light_medium"), bench, lifetimes, regime);
        report::Series s{d.name, {}, {}};
        for (size_t i = 0; i < res.size(); ++i) {
          unit = res[i].unit;
          t.add_row({key, bench, regime.name, std::to_string(sized.n), num(months[i]), sig(res[i].breakdown.c_m, 8),
                     sig(res[i].breakdown.c_c, 8), sig(res[i].breakdown.c_n, 8), sig(res[i].cci_mg(), 8), res[i].unit,
                     sized.overridden ? "listed-override" : "computed"});
          s.x.push_back(months[i]);
          s.y.push_back(res[i].cci_mg());
        }
        data.series.push_back(s);
      }
      scenario::Bundle b;
      b.outputs.push_back({"cluster_cci.csv", scenario::OutputKind::kCsv, t.to_csv()});
      report::ChartSpec spec;
      spec.title = fmt::format("Cluster CCI, {} ({})", bench, regime.name);
      spec.x_label = "lifetime (months)";
      spec.y_label = fmt::format("CCI (mgCO2e / {})", unit);
      b.outputs.push_back({"cluster_cci.svg", scenario::OutputKind::kSvg, report::emit_chart(data, spec)});
      emit(g, b);
    };
  });

  // ---- dc ----
  auto* dc_cmd = app.add_subcommand("dc", "Datacenter-scale PUE and CCI");
  dc_cmd->require_subcommand(1);
  std::string dc_path = (fs::path(data_dir()) / "designs" / "datacenter.conf").string();
  auto* dc_pue = dc_cmd->add_subcommand("pue", "PUE of each datacenter in a design file");
  dc_pue->add_option("--design", dc_path)->capture_default_str()->check(CLI::ExistingFile);
  dc_pue->callback([&] {
    action = [&] {
      const auto r = registry(g);
      const auto file = load_design_file(dc_path, r);
      report::Table t({"datacenter", "unit_it_power_w", "floor_area_m2", "pue"});
      for (const auto& dc : file.datacenters)
        t.add_row({dc.key, sig(unit_it_power(dc, r.load_profile("light_medium")), 8), sig(dc.floor_area_per_unit, 8),
                   sig(pue(dc, r.load_profile("light_medium")), 6)});
      scenario::Bundle b;
      b.outputs.push_back({"pue.csv", scenario::OutputKind::kCsv, t.to_csv()});
      emit(g, b);
    };
  });
  double dc_years = 3.0;
  std::vector<std::string> benches{"sgemm", "pdf_render", "dijkstra"};
  auto* dc_cci = dc_cmd->add_subcommand("cci", "Datacenter CCI");
  dc_cci->add_option("--design", dc_path)->capture_default_str()->check(CLI::ExistingFile);
  dc_cci->add_option("--bench", benches)->capture_default_str();
  dc_cci->add_option("--years", dc_years)->capture_default_str();
  dc_cci->add_option("--regime", regime_name)->capture_default_str();
  dc_cci->callback([&] {
    action = [&] {
      const auto r = registry(g);
      const auto file = load_design_file(dc_path, r);
      const auto regime = regime_from_string(regime_name);
      const auto& lm = r.load_profile("light_medium");
      report::Table t({"datacenter", "benchmark", "pue", "c_m_kg", "c_c_kg", "c_n_kg", "cci_mg", "unit"});
      for (const auto& dc : file.datacenters)
        for (const auto& b : benches) {
          const auto c = datacenter_cci(dc, lm, b, units::years(dc_years), regime);
          t.add_row({dc.key, b, sig(pue(dc, lm), 6), sig(c.breakdown.c_m, 8), sig(c.breakdown.c_c, 8),
                     sig(c.breakdown.c_n, 8), sig(c.cci_mg(), 8), c.unit});
        }
      scenario::Bundle b;
      b.outputs.push_back({"dc_cci.csv", scenario::OutputKind::kCsv, t.to_csv()});
      emit(g, b);
    };
  });
  std::vector<double> targets{1.31, 1.32};
  double lighting = 10.76, space_cooling = 3.2;
  auto* dc_cal = dc_cmd->add_subcommand("calibrate", "Solve cooling overhead and area per rack unit for target PUEs");
  dc_cal->add_option("--design", dc_path)->capture_default_str()->check(CLI::ExistingFile);
  dc_cal->add_option("--targets", targets, "Target PUE of the first two datacenters")->expected(2)->capture_default_str();
  dc_cal->add_option("--lighting", lighting, "Lighting density, W/m^2")->capture_default_str();
  dc_cal->add_option("--space-cooling", space_cooling, "Space cooling density, W/m^2")->capture_default_str();
  dc_cal->callback([&] {
    action = [&] {
      const auto r = registry(g);
      const auto file = load_design_file(dc_path, r);
      if (file.datacenters.size() < 2) throw InputError("calibration needs two datacenters in the design file");
      const auto& lm = r.load_profile("light_medium");
      const auto& a = file.datacenters[0];
      const auto& c = file.datacenters[1];
      const auto cal = calibrate_pue(unit_it_power(a, lm), a.rack_units, targets[0], unit_it_power(c, lm), c.rack_units,
                                     targets[1], lighting, space_cooling);
      fmt::print("cooling_overhead = {}\narea_per_rack_unit_m2 = {}\nlighting_w_per_m2 = {}\nspace_cooling_w_per_m2 = {}\n",
                 cal.cooling_overhead, cal.area_per_rack_unit, lighting, space_cooling);
    };
  });

  // ---- compare / cost ----
  auto* cmp_cmd = app.add_subcommand("compare", "Comparisons against a rival system");
  cmp_cmd->require_subcommand(1);
  std::string query_path = (fs::path(data_dir()) / "queries.conf").string();
  auto* cmp_q = cmp_cmd->add_subcommand("queries", "Per-query carbon ratio, rival over cloudlet");
  cmp_q->add_option("--scenario", query_path)->capture_default_str()->check(CLI::ExistingFile);
  cmp_q->callback([&] {
    action = [&] {
      const auto r = registry(g);
      const auto file = load_design_file(query_path, r);
      report::Table t({"query", "variant", "cluster_kg", "rival_kg", "ratio", "reference_ratio"});
      for (size_t i = 0; i < file.queries.size(); ++i) {
        const auto& q = file.queries[i];
        for (bool s : {true, false}) {
          const auto c = query_carbon_comparison(q, find_design(file, file.query_designs[i]), s);
          t.add_row({q.key, s ? "with_smart_charging" : "without_smart_charging", sig(c.cluster_carbon, 8),
                     sig(c.rival_carbon, 8), sig(c.ratio, 6), q.reference_ratio ? num(*q.reference_ratio) : ""});
        }
      }
      scenario::Bundle b;
      b.outputs.push_back({"queries.csv", scenario::OutputKind::kCsv, t.to_csv()});
      emit(g, b);
    };
  });

  std::string cost_design;
  double unit_price = 70.0, energy_price = 0.0, cost_years = 3.0;
  std::optional<double> hourly;
  auto* cost = app.add_subcommand("cost", "Deployment cost of a fixed-size cloudlet, optionally against an hourly rival");
  cost->add_option("--design", query_path, "Design file")->capture_default_str()->check(CLI::ExistingFile);
  cost->add_option("--name", cost_design, "Design key (default: first fixed-size design)");
  cost->add_option("--unit-price", unit_price, "Price per device")->capture_default_str();
  cost->add_option("--energy-price", energy_price, "Price per kWh")->capture_default_str();
  cost->add_option("--years", cost_years)->capture_default_str();
  cost->add_option("--hourly", hourly, "Rival hourly rate");
  cost->callback([&] {
    action = [&] {
      const auto r = registry(g);
      const auto file = load_design_file(query_path, r);
      const ClusterDesign* d = nullptr;
      for (const auto& x : file.designs)
        if ((cost_design.empty() && x.n_devices) || x.key == cost_design) {
          d = &x;
          break;
        }
      if (d == nullptr || !d->n_devices) throw InputError("no fixed-size design to cost");
      const auto sized = resolve_fixed(*d, *d->n_devices, true);
      const double power = cluster_power(*d, sized, r.load_profile("light_medium"), false);
      const auto c = deployment_cost(sized.n, unit_price, power, energy_price, units::years(cost_years));
      fmt::print("{}: hardware {:.2f}, energy {:.1f} kWh -> {:.2f}, total {:.2f}\n", d->key, c.hardware, c.energy_kwh,
                 c.energy, c.total());
      if (hourly) {
        const double h = units::to_hours(units::years(cost_years));
        fmt::print("rival: {} h x {} = {:.2f}\n", h, *hourly, hourly_cost(*hourly, units::years(cost_years)));
      }
    };
  });

  // ---- run ----
  std::string scenario_name, caiso_path;
  bool list = false;
  auto* run = app.add_subcommand("run", "Run a bundled scenario by name, or a scenario file");
  run->add_option("scenario", scenario_name);
  run->add_option("--caiso", caiso_path, "Canonical CAISO trace (default: $JCCI_CAISO_TRACE or the bundled file)");
  run->add_flag("--list", list, "List bundled scenarios");
  run->callback([&] {
    action = [&] {
      if (list || scenario_name.empty()) {
        for (const auto& n : scenario::bundled_scenarios(data_dir())) fmt::print("{}\n", n);
        return;
      }
      const auto path = fs::is_regular_file(scenario_name) ? scenario_name : scenario::bundled_scenario_path(data_dir(), scenario_name);
      if (!fs::is_regular_file(path)) throw InputError(fmt::format("no scenario '{}'", scenario_name));
      const auto s = scenario::load_scenario(path);
      const auto r = registry(g);
      scenario::RunContext ctx{&r, scenario_traces(caiso_path), data_dir()};
      auto bundle = scenario::run_scenario(s, ctx);
      if (g.out_dir.empty()) g.out_dir = (fs::path("out") / s.name).string();
      emit(g, bundle, false);
      std::cerr << fmt::format("{}: {} outputs\n", s.name, bundle.outputs.size());
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (action) action();
  } catch (const ModelError& e) {
    std::cerr << "model error: " << e.what() << '\n';
    return 2;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
