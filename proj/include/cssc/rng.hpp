#pragma once

#include <cstdint>
#include <random>

namespace cssc {

/// Deterministic random source. The raw engine is std::mt19937_64 but every
/// mapping to doubles/ints is spelled out here, so streams are reproducible
/// regardless of standard-library distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform();

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);

  /// Standard Gaussian via Box-Muller.
  double normal();

  /// Uniform integer in [lo, hi] (inclusive). Modulo mapping; the tiny bias
  /// is irrelevant here, determinism is what matters.
  int uniform_int(int lo, int hi);

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cssc
