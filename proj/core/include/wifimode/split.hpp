#pragma once

#include <array>

#include "wifimode/types.hpp"

namespace wifimode {

struct SplitIndices {
  std::vector<std::size_t> train;  // ascending row indices
  std::vector<std::size_t> test;
};

// Per-class test counts: round-half-up of count * fraction. If their sum
// misses round-half-up(N * fraction), the difference is absorbed one row at
// a time by the largest classes first (ties: lowest mode index).
std::array<std::size_t, kNumModes> stratified_test_counts(const std::array<std::size_t, kNumModes>& class_counts,
                                                          double test_fraction);

SplitIndices stratified_split_indices(const Dataset& ds, double test_fraction, RngSeed seed);

struct TrainTest {
  Dataset train;
  Dataset test;
};

TrainTest stratified_split(const Dataset& ds, double test_fraction, RngSeed seed);

}  // namespace wifimode
