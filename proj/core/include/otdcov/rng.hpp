#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "otdcov/common.hpp"

namespace otdcov {

/// Derives an independent stream seed from (base seed, purpose tag, index).
/// All randomness in the project funnels through this derivation so that
/// reruns with the same base seed reproduce every artifact byte for byte,
/// and parallel workers can own disjoint streams.
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t index = 0);

/// Seeded random stream with portable draw paths. Uniform doubles and
/// normals are built from raw mt19937_64 words (never from the
/// implementation-defined std distributions), so a given seed yields the
/// same sequence on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe as a log() argument.
  double uniform_open() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

  /// Unbiased integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal via Box-Muller (one spare cached).
  double normal();

  Vector normal_vector(int d);

  /// Uniform random permutation of {0, ..., n-1} (Fisher-Yates).
  std::vector<int> permutation(int n);

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace otdcov
