#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

#include "wifimode/types.hpp"

namespace wifimode {

std::uint64_t splitmix64(std::uint64_t x);

// Sub-seeds are derived from a parent seed by a fixed label or index so one
// stage's randomness never depends on how much another stage consumed.
RngSeed derive_seed(RngSeed parent, std::string_view label);
RngSeed derive_seed(RngSeed parent, std::uint64_t index);

// Deterministic random source. The engine is mt19937_64 (bit-exact across
// standard libraries); the distributions are implemented here rather than
// taken from <random>, whose distribution algorithms are unspecified.
class Rng {
 public:
  explicit Rng(RngSeed seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform in [0, n). n must be > 0.
  std::size_t uniform_index(std::size_t n);
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(i)]);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace wifimode
