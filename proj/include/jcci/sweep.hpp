#pragma once

// Batched evaluation: CCI over (design, benchmark, lifetime, regime) grids and
// independent smart-charging runs. The parallel versions use OpenMP; the
// serial versions are the reference the tests compare against.

#include <string>
#include <vector>

#include "jcci/charging.hpp"
#include "jcci/cluster.hpp"

namespace jcci::sweep {

struct CciPoint {
  size_t design = 0;  // index into the design list
  std::string bench;
  double lifetime = 0.0;  // s
  Regime regime;
};

// Cartesian product in design-major, then benchmark, regime, lifetime order.
std::vector<CciPoint> cci_grid(size_t n_designs, const std::vector<std::string>& benches,
                               const std::vector<Regime>& regimes, const std::vector<double>& lifetimes);

std::vector<CCIResult> cci_sweep(const std::vector<ClusterDesign>& designs, const LoadProfile& load,
                                 const std::vector<CciPoint>& points);
std::vector<CCIResult> cci_sweep_serial(const std::vector<ClusterDesign>& designs, const LoadProfile& load,
                                        const std::vector<CciPoint>& points);

struct ChargeJob {
  const DeviceProfile* device = nullptr;
  const grid::GridTrace* trace = nullptr;
  charging::ChargePolicy policy;
};

std::vector<charging::ChargeSimResult> simulate_batch(const LoadProfile& load, const std::vector<ChargeJob>& jobs);
std::vector<charging::ChargeSimResult> simulate_batch_serial(const LoadProfile& load,
                                                             const std::vector<ChargeJob>& jobs);

}  // namespace jcci::sweep
