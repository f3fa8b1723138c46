#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "test_support.hpp"
#include "wifimode/errors.hpp"
#include "wifimode/relieff.hpp"

using namespace wifimode;

namespace {

// Straightforward ReliefF for tie-free data: full sort of every other row by
// scaled Manhattan distance, k nearest per class.
std::vector<double> reference_relieff(const Dataset& ds, std::size_t k) {
  const std::size_t n = ds.size(), w = ds.width();
  std::vector<double> lo(w, INFINITY), hi(w, -INFINITY);
  for (const auto& r : ds.rows())
    for (std::size_t f = 0; f < w; ++f) {
      lo[f] = std::min(lo[f], r.values[f]);
      hi[f] = std::max(hi[f], r.values[f]);
    }
  auto diff = [&](std::size_t a, std::size_t b, std::size_t f) {
    return hi[f] > lo[f] ? std::abs(ds[a].values[f] - ds[b].values[f]) / (hi[f] - lo[f]) : 0.0;
  };
  const auto counts = ds.class_counts();
  std::vector<double> weight(w, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<std::pair<double, std::size_t>> others;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == r) continue;
      double d = 0.0;
      for (std::size_t f = 0; f < w; ++f) d += diff(r, j, f);
      others.emplace_back(d, j);
    }
    std::sort(others.begin(), others.end());
    const double p_r = static_cast<double>(counts[index_of(ds[r].label)]) / static_cast<double>(n);
    for (Mode c : kAllModes) {
      std::size_t taken = 0;
      for (const auto& [d, j] : others) {
        if (ds[j].label != c) continue;
        if (taken++ == k) break;
        const double factor = c == ds[r].label
                                  ? -1.0
                                  : (static_cast<double>(counts[index_of(c)]) / static_cast<double>(n)) / (1.0 - p_r);
        for (std::size_t f = 0; f < w; ++f) weight[f] += factor * diff(r, j, f) / (static_cast<double>(n * k));
      }
    }
  }
  return weight;
}

Dataset random_dataset(std::size_t per_class, std::size_t width, RngSeed seed) {
  Rng rng(seed);
  std::vector<FeatureVector> rows;
  for (Mode m : kAllModes)
    for (std::size_t i = 0; i < per_class; ++i) {
      FeatureVector fv;
      fv.label = m;
      for (std::size_t f = 0; f < width; ++f)
        fv.values.push_back(rng.normal() + (f == 0 ? 1.5 * static_cast<double>(index_of(m)) : 0.0));
      rows.push_back(fv);
    }
  return Dataset::with_default_names(std::move(rows));
}

}  // namespace

TEST(ReliefF, MatchesReferenceImplementation) {
  for (RngSeed seed : {1u, 2u, 3u}) {
    const Dataset ds = random_dataset(25, 6, seed);
    const auto got = relieff_rank(ds, {5, 0, 0});
    const auto want = reference_relieff(ds, 5);
    ASSERT_EQ(got.weights.size(), want.size());
    for (std::size_t f = 0; f < want.size(); ++f) EXPECT_NEAR(got.weights[f], want[f], 1e-12) << "feature " << f;
  }
}

TEST(ReliefF, ClassFeatureBeatsNoise) {
  Rng rng(12);
  std::vector<FeatureVector> rows;
  for (Mode m : kAllModes)
    for (int i = 0; i < 40; ++i) rows.push_back({{static_cast<double>(index_of(m)), rng.uniform()}, m});
  const auto w = relieff_rank(Dataset::with_default_names(rows), {10, 0, 0});
  EXPECT_GT(w.weights[0], w.weights[1]);
  // Scaled class codes 0, 0.5, 1: walking and driving rows score
  // 0.5 * 0.5 + 0.5 * 1 = 0.75, biking rows 0.5, so the mean is 2/3.
  EXPECT_NEAR(w.weights[0], 2.0 / 3.0, 1e-12);
  EXPECT_EQ(w.ranking, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(w.rank_of(0), 1u);
  EXPECT_EQ(w.rank_of(1), 2u);
}

TEST(ReliefF, ConstantFeatureHasZeroWeight) {
  Rng rng(3);
  std::vector<FeatureVector> rows;
  for (Mode m : kAllModes)
    for (int i = 0; i < 12; ++i) rows.push_back({{7.0, rng.normal()}, m});
  const auto w = relieff_rank(Dataset::with_default_names(rows), {3, 0, 0});
  EXPECT_EQ(w.weights[0], 0.0);
}

TEST(ReliefF, Errors) {
  const Dataset small = random_dataset(5, 3, 1);
  EXPECT_THROW(relieff_rank(small, {5, 0, 0}), DataError);
  EXPECT_NO_THROW(relieff_rank(small, {4, 0, 0}));
  EXPECT_THROW(relieff_rank(small, {0, 0, 0}), ConfigError);
  std::vector<FeatureVector> one_class;
  for (int i = 0; i < 20; ++i) one_class.push_back({{static_cast<double>(i)}, Mode::Biking});
  EXPECT_THROW(relieff_rank(Dataset::with_default_names(one_class), {3, 0, 0}), DataError);
}

TEST(ReliefF, SampledSubsetIsSeededAndApproximatesFullRun) {
  const Dataset ds = random_dataset(40, 4, 9);
  const auto a = relieff_rank(ds, {5, 60, 1});
  const auto b = relieff_rank(ds, {5, 60, 1});
  const auto c = relieff_rank(ds, {5, 60, 2});
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_NE(a.weights, c.weights);
  EXPECT_EQ(a.ranking.front(), 1u);
  EXPECT_EQ(relieff_rank(ds, {5, 1000, 1}).weights, relieff_rank(ds, {5, 0, 7}).weights);
}

TEST(ReliefFProperty, RowPermutationInvariance) {
  const Dataset ds = random_dataset(20, 5, 4);
  const auto base = relieff_rank(ds, {4, 0, 0});
  Rng rng(5);
  for (int t = 0; t < 10; ++t) {
    std::vector<std::size_t> perm(ds.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm);
    const auto w = relieff_rank(ds.select(perm), {4, 0, 0});
    ASSERT_EQ(w.weights, base.weights);
    ASSERT_EQ(w.ranking, base.ranking);
  }
}

TEST(ReliefFProperty, DuplicatingEveryRowKeepsRanking) {
  // Graded relevance: feature 0 strong, 1 weaker, 2 pure noise.
  Rng rng(6);
  std::vector<FeatureVector> rows;
  for (Mode m : kAllModes)
    for (int i = 0; i < 30; ++i) {
      const double c = static_cast<double>(index_of(m));
      rows.push_back({{3.0 * c + rng.normal(), c + rng.normal(), rng.normal()}, m});
    }
  const Dataset ds = Dataset::with_default_names(rows);
  std::vector<std::size_t> twice(2 * ds.size());
  for (std::size_t i = 0; i < twice.size(); ++i) twice[i] = i % ds.size();
  const auto a = relieff_rank(ds, {10, 0, 0});
  const auto b = relieff_rank(ds.select(twice), {10, 0, 0});
  EXPECT_EQ(a.ranking, (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_EQ(b.ranking, a.ranking);
}

TEST(ReliefFProperty, TiedWeightsRankLowerIdFirst) {
  // Two identical columns get identical weights.
  Rng rng(8);
  std::vector<FeatureVector> rows;
  for (Mode m : kAllModes)
    for (int i = 0; i < 15; ++i) {
      const double v = rng.normal() + static_cast<double>(index_of(m));
      rows.push_back({{rng.normal(), v, v}, m});
    }
  const auto w = relieff_rank(Dataset::with_default_names(rows), {5, 0, 0});
  ASSERT_EQ(w.weights[1], w.weights[2]);
  EXPECT_EQ(w.ranking[0], 2u);
  EXPECT_EQ(w.ranking[1], 3u);
}

TEST(ReliefFProperty, WeightsStayInUnitRange) {
  for (RngSeed seed = 20; seed < 30; ++seed) {
    const auto w = relieff_rank(random_dataset(15, 4, seed), {5, 0, 0});
    for (double v : w.weights) {
      ASSERT_GE(v, -1.0);
      ASSERT_LE(v, 1.0);
    }
  }
}

TEST(ReliefFProperty, SpeedAndDwellFeaturesArePositiveOnSimulatedData) {
  const auto w = relieff_rank(wifimode::testing::default_dataset(), {10, 0, 0});
  ASSERT_EQ(w.weights.size(), kNumFeatures);
  for (std::size_t f = 0; f < 6; ++f) EXPECT_GT(w.weights[f], 0.0) << "f" << f + 1;
  std::vector<std::size_t> sorted = w.ranking;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < kNumFeatures; ++i) EXPECT_EQ(sorted[i], i + 1);
}
