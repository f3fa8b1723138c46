#include "wifimode/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wifimode/errors.hpp"
#include "wifimode/rng.hpp"

namespace wifimode {
namespace {

std::size_t round_half_up(double x) { return static_cast<std::size_t>(std::floor(x + 0.5)); }

void check_fraction(double f) {
  if (!(f > 0.0 && f < 1.0)) throw ConfigError("split fraction must lie in (0, 1), got " + std::to_string(f));
}

}  // namespace

std::array<std::size_t, kNumModes> stratified_test_counts(const std::array<std::size_t, kNumModes>& class_counts,
                                                          double test_fraction) {
  check_fraction(test_fraction);
  std::array<std::size_t, kNumModes> test{};
  std::size_t total = 0;
  for (std::size_t c = 0; c < kNumModes; ++c) {
    test[c] = round_half_up(static_cast<double>(class_counts[c]) * test_fraction);
    total += class_counts[c];
  }
  const std::size_t target = round_half_up(static_cast<double>(total) * test_fraction);

  std::array<std::size_t, kNumModes> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return class_counts[a] > class_counts[b]; });

  std::size_t sum = std::accumulate(test.begin(), test.end(), std::size_t{0});
  for (std::size_t k = 0; sum != target && k < 2 * kNumModes; ++k) {
    const std::size_t c = order[k % kNumModes];
    if (class_counts[c] == 0) continue;
    if (sum < target && test[c] + 1 < class_counts[c]) {
      ++test[c];
      ++sum;
    } else if (sum > target && test[c] > 1) {
      --test[c];
      --sum;
    }
  }
  return test;
}

SplitIndices stratified_split_indices(const Dataset& ds, double test_fraction, RngSeed seed) {
  check_fraction(test_fraction);
  const auto counts = ds.class_counts();
  for (std::size_t c = 0; c < kNumModes; ++c) {
    if (counts[c] == 1)
      throw DataError("class '" + std::string(to_string(mode_from_index(c))) + "' has fewer than 2 rows");
  }
  const auto test_counts = stratified_test_counts(counts, test_fraction);

  std::array<std::vector<std::size_t>, kNumModes> by_class;
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[index_of(ds[i].label)].push_back(i);

  SplitIndices out;
  for (std::size_t c = 0; c < kNumModes; ++c) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    auto& rows = by_class[c];
    rng.shuffle(rows);
    out.test.insert(out.test.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(test_counts[c]));
    out.train.insert(out.train.end(), rows.begin() + static_cast<std::ptrdiff_t>(test_counts[c]), rows.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

TrainTest stratified_split(const Dataset& ds, double test_fraction, RngSeed seed) {
  const auto idx = stratified_split_indices(ds, test_fraction, seed);
  return {ds.select(idx.train), ds.select(idx.test)};
}

}  // namespace wifimode
