#include "jcci/sweep.hpp"

#include <exception>

#include <fmt/format.h>

#include "jcci/error.hpp"

namespace jcci::sweep {

namespace {

CCIResult eval_point(const std::vector<ClusterDesign>& designs, const LoadProfile& load, const CciPoint& p) {
  if (p.design >= designs.size()) throw InputError(fmt::format("sweep: design index {} out of range", p.design));
  return cluster_cci(designs[p.design], load, p.bench, {p.lifetime}, p.regime).front();
}

charging::ChargeSimResult eval_job(const LoadProfile& load, const ChargeJob& job) {
  if (job.device == nullptr || job.trace == nullptr) throw InputError("simulate_batch: job without device or trace");
  return charging::simulate(*job.device, load, *job.trace, job.policy);
}

// Runs fn(i) for every index; the lowest-index exception is rethrown after the loop.
template <typename Fn>
void parallel_for(size_t n, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < count; ++i) {
    try {
      fn(static_cast<size_t>(i));
    } catch (...) {
      errors[static_cast<size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

std::vector<CciPoint> cci_grid(size_t n_designs, const std::vector<std::string>& benches,
                               const std::vector<Regime>& regimes, const std::vector<double>& lifetimes) {
  std::vector<CciPoint> out;
  out.reserve(n_designs * benches.size() * regimes.size() * lifetimes.size());
  for (size_t d = 0; d < n_designs; ++d)
    for (const auto& b : benches)
      for (const auto& r : regimes)
        for (double life : lifetimes) out.push_back({d, b, life, r});
  return out;
}

std::vector<CCIResult> cci_sweep(const std::vector<ClusterDesign>& designs, const LoadProfile& load,
                                 const std::vector<CciPoint>& points) {
  std::vector<CCIResult> out(points.size());
  parallel_for(points.size(), [&](size_t i) { out[i] = eval_point(designs, load, points[i]); });
  return out;
}

std::vector<CCIResult> cci_sweep_serial(const std::vector<ClusterDesign>& designs, const LoadProfile& load,
                                        const std::vector<CciPoint>& points) {
  std::vector<CCIResult> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(eval_point(designs, load, p));
  return out;
}

std::vector<charging::ChargeSimResult> simulate_batch(const LoadProfile& load, const std::vector<ChargeJob>& jobs) {
  std::vector<charging::ChargeSimResult> out(jobs.size());
  parallel_for(jobs.size(), [&](size_t i) { out[i] = eval_job(load, jobs[i]); });
  return out;
}

std::vector<charging::ChargeSimResult> simulate_batch_serial(const LoadProfile& load,
                                                             const std::vector<ChargeJob>& jobs) {
  std::vector<charging::ChargeSimResult> out;
  out.reserve(jobs.size());
  for (const auto& j : jobs) out.push_back(eval_job(load, j));
  return out;
}

}  // namespace jcci::sweep
