#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace proalign {

/// Seeded generator whose outputs are identical across standard libraries:
/// std::mt19937_64 is fully specified, the distributions below are spelled out
/// instead of using the implementation-defined std:: distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Standard normal via Box-Muller (one draw per call, no caching).
  double normal();
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

/// Independent sub-seed for a named consumer (world, data, solver, train).
std::uint64_t derive_seed(std::uint64_t base, std::string_view name);

}  // namespace proalign
