#pragma once

// Heat accounting for packed devices: the sensible-heat estimate of thermal
// power, fan provisioning, and a lumped-capacitance box model with per-device
// throttling and shutdown.

#include <string>
#include <vector>

#include "jcci/registry.hpp"

namespace jcci::thermal {

struct ThermalSample {
  double time = 0.0;  // s
  double air_temp = 0.0;
  std::vector<double> device_temps;  // degC
};

struct ThermalParams {
  double c_p_air = 1005.0;  // J/(kg K)
  double c_p_si = 705.0;
  double air_mass = 0.0;  // kg
  std::vector<double> device_masses;
  double throttle_temp = 45.0;
  double shutdown_temp = 77.0;
  // Power fraction left at the shutdown temperature; derating is linear from the throttle point.
  double throttle_floor = 0.5;
  bool throttling = true;
  double device_air_conductance = 0.04;  // W/K per device
  double ambient_conductance = 0.0;      // W/K, 0 = sealed
  double ambient_temp = 25.0;
  double initial_temp = 25.0;
};

void validate(const ThermalParams& p);

// Air mass in kg of a box given inside dimensions in inches, at 1.2 kg/m^3.
double box_air_mass(double w_in, double l_in, double h_in);

// (c_p_air m_air dT_air + sum c_p_si m_dev dT_dev) / dt, in watts.
double thermal_power(const ThermalParams& params, const ThermalSample& start, const ThermalSample& end);

// ceil(total / fan rating); 0 fans for 0 W.
int provision_fans(double total_thermal, const Peripheral& fan);

struct ShutdownEvent {
  size_t device = 0;
  double time = 0.0;
  double air_temp = 0.0;
};

struct BoxResult {
  std::vector<ThermalSample> samples;
  std::vector<ShutdownEvent> events;
  double electrical_energy = 0.0;  // J delivered to devices
  double leaked_energy = 0.0;      // J lost to ambient
  double stored_energy = 0.0;      // J, sum of C dT over all nodes
};

// Forward Euler. Throws ModelError when dt >= 0.1 x the smallest node time constant.
BoxResult simulate_box(const ThermalParams& params, const std::vector<double>& device_powers, double duration, double dt,
                       double sample_every = 0.0);

struct BoxConfig {
  ThermalParams params;
  std::vector<std::string> device_names;
  std::vector<double> device_powers;
  double duration = 3600.0;
  double dt = 1.0;
  double sample_every = 10.0;
};

// Reads [thermal] and [thermal.device.<name>] sections.
BoxConfig load_box_config(const std::string& path);
BoxConfig parse_box_config(const std::string& text, const std::string& source = "<string>");

std::string samples_csv(const std::vector<std::string>& device_names, const std::vector<ThermalSample>& samples);
std::vector<ThermalSample> parse_samples_csv(const std::string& text, const std::string& source = "<string>");

}  // namespace jcci::thermal
