#pragma once

#include <cmath>
#include <random>
#include <string>

#include "jcci/registry.hpp"

namespace jcci::test {

inline std::string data_path(const std::string& rel) { return std::string(JCCI_DATA_DIR) + "/" + rel; }

inline const Registry& registry() {
  static const Registry r = load_registry(data_path("registry.conf"));
  return r;
}

inline bool rel_close(double a, double b, double rel, double abs = 0.0) {
  return std::fabs(a - b) <= std::max(abs, rel * std::max(std::fabs(a), std::fabs(b)));
}

// Seeded generator with the draws the property suites need.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  bool coin() { return integer(0, 1) == 1; }
  std::mt19937_64& engine() { return eng_; }

  PowerProfile power() {
    PowerProfile p;
    p.p_idle = uniform(0.1, 200.0);
    p.p10 = p.p_idle + uniform(0.0, 50.0);
    p.p50 = p.p10 + uniform(0.0, 100.0);
    p.p100 = p.p50 + uniform(0.0, 200.0);
    return p;
  }

  LoadProfile load() {
    LoadProfile l;
    l.key = "gen";
    const int n = integer(1, 5);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const double w = uniform(0.05, 1.0);
      l.levels.push_back({uniform(0.0, 1.0), w});
      total += w;
    }
    double acc = 0.0;
    for (size_t i = 0; i + 1 < l.levels.size(); ++i) {
      l.levels[i].time_fraction /= total;
      acc += l.levels[i].time_fraction;
    }
    l.levels.back().time_fraction = 1.0 - acc;
    return l;
  }

  BenchmarkSpec bench() {
    BenchmarkSpec b;
    b.name = "gen";
    b.unit = "op";
    b.multi = uniform(0.5, 5000.0);
    b.single = b.multi * uniform(0.1, 1.0);
    return b;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace jcci::test
