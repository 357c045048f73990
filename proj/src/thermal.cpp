#include "jcci/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "jcci/error.hpp"
#include "jcci/textconf.hpp"

namespace jcci::thermal {

namespace {

constexpr double kAirDensity = 1.2;  // kg/m^3
constexpr double kMetersPerInch = 0.0254;

double throttle_factor(const ThermalParams& p, double temp) {
  if (!p.throttling || temp <= p.throttle_temp) return 1.0;
  if (temp >= p.shutdown_temp) return p.throttle_floor;
  const double x = (temp - p.throttle_temp) / (p.shutdown_temp - p.throttle_temp);
  return 1.0 - x * (1.0 - p.throttle_floor);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void validate(const ThermalParams& p) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw InvariantError("thermal params", fmt::format("{} must be > 0 (got {})", name, v));
  };
  positive(p.c_p_air, "c_p_air");
  positive(p.c_p_si, "c_p_si");
  positive(p.air_mass, "air_mass");
  for (double m : p.device_masses) positive(m, "device mass");
  if (!(p.shutdown_temp > p.throttle_temp)) throw InvariantError("thermal params", "shutdown_temp must exceed throttle_temp");
  if (!(p.throttle_floor > 0.0 && p.throttle_floor <= 1.0))
    throw InvariantError("thermal params", "throttle_floor must be in (0, 1]");
  if (!(p.device_air_conductance >= 0.0) || !(p.ambient_conductance >= 0.0))
    throw InvariantError("thermal params", "conductances must be >= 0");
}

double box_air_mass(double w_in, double l_in, double h_in) {
  const double m3 = w_in * l_in * h_in * std::pow(kMetersPerInch, 3);
  return m3 * kAirDensity;
}

double thermal_power(const ThermalParams& params, const ThermalSample& start, const ThermalSample& end) {
  const double dt = end.time - start.time;
  if (dt == 0.0) throw InputError("thermal_power: zero elapsed time");
  if (dt < 0.0) throw InputError("thermal_power: end precedes start");
  if (start.device_temps.size() != end.device_temps.size() || start.device_temps.size() != params.device_masses.size())
    throw InputError(fmt::format("thermal_power: {} masses but {} and {} device temperatures", params.device_masses.size(),
                                 start.device_temps.size(), end.device_temps.size()));
  double joules = params.c_p_air * params.air_mass * (end.air_temp - start.air_temp);
  for (size_t i = 0; i < params.device_masses.size(); ++i)
    joules += params.c_p_si * params.device_masses[i] * (end.device_temps[i] - start.device_temps[i]);
  return joules / dt;
}

int provision_fans(double total_thermal, const Peripheral& fan) {
  if (!fan.rating || !(*fan.rating > 0.0)) throw InputError(fmt::format("fan '{}' has no thermal rating", fan.key));
  if (total_thermal < 0.0) throw InputError("negative thermal power");
  if (total_thermal == 0.0) return 0;
  return static_cast<int>(std::ceil(total_thermal / *fan.rating));
}

BoxResult simulate_box(const ThermalParams& params, const std::vector<double>& device_powers, double duration, double dt,
                       double sample_every) {
  validate(params);
  if (!(dt > 0.0)) throw InputError("simulate_box: dt must be > 0");
  if (duration < 0.0) throw InputError("simulate_box: negative duration");
  const size_t n = params.device_masses.size();
  if (device_powers.size() != n)
    throw InputError(fmt::format("simulate_box: {} powers for {} devices", device_powers.size(), n));
  for (double p : device_powers)
    if (p < 0.0) throw InputError("simulate_box: negative device power");

  const double c_air = params.c_p_air * params.air_mass;
  std::vector<double> c_dev(n);
  for (size_t i = 0; i < n; ++i) c_dev[i] = params.c_p_si * params.device_masses[i];

  // Smallest time constant over all nodes.
  const double g = params.device_air_conductance;
  double tau = std::numeric_limits<double>::infinity();
  const double g_air = g * static_cast<double>(n) + params.ambient_conductance;
  if (g_air > 0.0) tau = std::min(tau, c_air / g_air);
  if (g > 0.0)
    for (double c : c_dev) tau = std::min(tau, c / g);
  if (!(dt < 0.1 * tau))
    throw ModelError(fmt::format("simulate_box: dt {} s is unstable; must be < {:.4g} s (0.1 x smallest C/G)", dt, 0.1 * tau));

  if (sample_every <= 0.0) sample_every = dt;
  const auto steps = static_cast<long long>(std::llround(duration / dt));
  const auto stride = std::max<long long>(1, std::llround(sample_every / dt));

  BoxResult out;
  double air = params.initial_temp;
  std::vector<double> dev(n, params.initial_temp);
  std::vector<bool> off(n, false);
  std::vector<double> q(n);

  auto record = [&](double t) { out.samples.push_back({t, air, dev}); };
  record(0.0);

  for (long long k = 1; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    double to_air = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double power = off[i] ? 0.0 : device_powers[i] * throttle_factor(params, dev[i]);
      out.electrical_energy += power * dt;
      const double flow = g * (dev[i] - air);
      q[i] = power - flow;
      to_air += flow;
    }
    const double leak = params.ambient_conductance * (air - params.ambient_temp);
    out.leaked_energy += leak * dt;
    air += (to_air - leak) * dt / c_air;
    for (size_t i = 0; i < n; ++i) {
      dev[i] += q[i] * dt / c_dev[i];
      if (!off[i] && dev[i] >= params.shutdown_temp) {
        off[i] = true;
        out.events.push_back({i, t, air});
      }
    }
    if (k % stride == 0 || k == steps) record(t);
  }

  out.stored_energy = c_air * (air - params.initial_temp);
  for (size_t i = 0; i < n; ++i) out.stored_energy += c_dev[i] * (dev[i] - params.initial_temp);
  return out;
}

BoxConfig parse_box_config(const std::string& text, const std::string& source) {
  const auto doc = textconf::Document::parse(text, source);
  const auto* top = doc.find("thermal");
  if (top == nullptr) throw ParseError(source, 0, "thermal", "missing [thermal] section");

  BoxConfig cfg;
  auto& p = cfg.params;
  p.c_p_air = top->opt_number("c_p_air").value_or(p.c_p_air);
  p.c_p_si = top->opt_number("c_p_si").value_or(p.c_p_si);
  if (auto m = top->opt_number("air_mass_kg")) {
    p.air_mass = *m;
  } else {
    const auto dims = top->numbers("box_inches");
    if (dims.size() != 3) throw ParseError(source, top->line(), "box_inches", "expected 3 dimensions");
    p.air_mass = box_air_mass(dims[0], dims[1], dims[2]);
  }
  p.throttle_temp = top->opt_number("throttle_c").value_or(p.throttle_temp);
  p.shutdown_temp = top->opt_number("shutdown_c").value_or(p.shutdown_temp);
  p.throttle_floor = top->opt_number("throttle_floor").value_or(p.throttle_floor);
  p.throttling = top->boolean("throttling", true);
  p.device_air_conductance = top->opt_number("device_air_w_per_k").value_or(p.device_air_conductance);
  p.ambient_conductance = top->opt_number("ambient_w_per_k").value_or(p.ambient_conductance);
  p.ambient_temp = top->opt_number("ambient_c").value_or(p.ambient_temp);
  p.initial_temp = top->opt_number("initial_c").value_or(p.initial_temp);
  cfg.duration = top->opt_number("duration_s").value_or(cfg.duration);
  cfg.dt = top->opt_number("dt_s").value_or(cfg.dt);
  cfg.sample_every = top->opt_number("sample_every_s").value_or(cfg.sample_every);
  top->reject_unread();

  for (const auto* s : doc.of_kind("thermal")) {
    const auto parts = s->parts();
    if (parts.size() == 1) continue;
    if (parts.size() != 3 || parts[1] != "device")
      throw ParseError(source, s->line(), s->path(), "expected [thermal] or [thermal.device.<name>]");
    cfg.device_names.push_back(parts[2]);
    p.device_masses.push_back(s->number("mass_kg"));
    cfg.device_powers.push_back(s->number("power_w"));
    s->reject_unread();
  }
  if (cfg.device_names.empty()) throw ParseError(source, top->line(), "thermal.device", "no devices");
  validate(p);
  return cfg;
}

BoxConfig load_box_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open thermal config '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_box_config(ss.str(), path);
}

std::string samples_csv(const std::vector<std::string>& device_names, const std::vector<ThermalSample>& samples) {
  std::string out = "time_s,air_c";
  for (const auto& name : device_names) out += "," + name + "_c";
  out += '\n';
  for (const auto& s : samples) {
    out += fmt::format("{},{:.6f}", s.time, s.air_temp);
    for (double t : s.device_temps) out += fmt::format(",{:.6f}", t);
    out += '\n';
  }
  return out;
}

std::vector<ThermalSample> parse_samples_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 1, "header", "empty file");
  const auto header = split_csv(line);
  if (header.size() < 2 || header[0] != "time_s" || header[1] != "air_c")
    throw ParseError(source, 1, "header", "expected 'time_s,air_c,<device>...'");
  std::vector<ThermalSample> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size())
      throw ParseError(source, lineno, "row", fmt::format("expected {} columns, got {}", header.size(), cells.size()));
    ThermalSample s;
    try {
      s.time = std::stod(cells[0]);
      s.air_temp = std::stod(cells[1]);
      for (size_t i = 2; i < cells.size(); ++i) s.device_temps.push_back(std::stod(cells[i]));
    } catch (const std::exception&) {
      throw ParseError(source, lineno, "row", "malformed number");
    }
    if (!out.empty() && s.time < out.back().time) throw ParseError(source, lineno, "time_s", "times must be nondecreasing");
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace jcci::thermal
