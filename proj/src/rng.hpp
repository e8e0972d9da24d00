#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace qst {

// Deterministic random source. Every stochastic operation takes one of these
// explicitly; two instances with the same seed produce identical streams, so
// results are reproducible bit for bit on a given build.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1), 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double uniform_in(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal (Box-Muller, spare cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  // Uniform integer in [0, n). Modulo bias is negligible against 2^64.
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Seed-splitting rule for independent sub-tasks (dataset samples, benchmark
// states, sampling repetitions). Documented part of the reproducibility
// contract: task_seed = master_seed * 1000003 + task_index.
inline std::uint64_t split_seed(std::uint64_t master_seed,
                                std::uint64_t task_index) {
  return master_seed * 1000003ULL + task_index;
}

}  // namespace qst
