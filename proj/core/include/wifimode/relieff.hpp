#pragma once

#include <cstddef>
#include <vector>

#include "wifimode/types.hpp"

namespace wifimode {

struct ReliefFParams {
  std::size_t k_neighbors = 10;
  // 0 means every row is used as a sampled instance.
  std::size_t sample_count = 0;
  RngSeed seed = 0;
};

struct FeatureWeights {
  std::vector<double> weights;          // indexed by feature position (id - 1)
  std::vector<std::size_t> ranking;     // 1-based feature ids, highest weight first; ties -> lower id
  // 1-based rank of the feature at position j.
  std::size_t rank_of(std::size_t j) const;
};

// Multiclass ReliefF with min-max scaled Manhattan distance, k nearest hits
// and k nearest misses per other class weighted by the class prior. Rows are
// processed in a canonical order (sorted by feature values, then label) and
// neighbour ties are broken by that order, so the result does not depend on
// the input row order. A constant feature gets weight 0.
FeatureWeights relieff_rank(const Dataset& ds, const ReliefFParams& p);

}  // namespace wifimode
