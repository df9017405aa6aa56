#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace acmvl {

struct RngSeed {
  std::uint64_t value = 0;
  friend bool operator==(RngSeed, RngSeed) = default;
};

/// SplitMix64 finalizer. Used to expand a seed into generator state and to
/// derive independent sub-seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// Deterministic child seed for a numbered sub-stream. Children of the same
/// parent with different tags are independent for practical purposes.
RngSeed derive_seed(RngSeed parent, std::uint64_t tag);
RngSeed derive_seed(RngSeed parent, std::uint64_t tag_a, std::uint64_t tag_b);

/// xoshiro256** 1.0 (Blackman & Vigna), state filled from the seed by
/// SplitMix64. Every distribution below is implemented here rather than via
/// <random> distributions, whose output is implementation-defined, so that a
/// seed gives the same stream on every platform.
class Rng {
 public:
  explicit Rng(RngSeed seed);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi);
  /// Standard normal via the Box-Muller transform.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  /// Uniform integer in [0, bound), bound > 0, by rejection (no modulo bias).
  std::uint64_t below(std::uint64_t bound);

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::array<std::uint64_t, 4> s_{};
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace acmvl
