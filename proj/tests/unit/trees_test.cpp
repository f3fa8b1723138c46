#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "test_support.hpp"
#include "wifimode/errors.hpp"
#include "wifimode/trees.hpp"

using namespace wifimode;
using wifimode::testing::make_dataset;

namespace {

constexpr Mode W = Mode::Walking;
constexpr Mode B = Mode::Biking;
constexpr Mode D = Mode::Driving;

double gini(const std::vector<Mode>& labels) {
  if (labels.empty()) return 0.0;
  double acc = 1.0;
  for (Mode m : kAllModes) {
    const double q = static_cast<double>(std::count(labels.begin(), labels.end(), m)) / labels.size();
    acc -= q * q;
  }
  return acc;
}

DecisionTree leaf_tree(Mode m) {
  TreeNode n;
  n.prediction = m;
  return DecisionTree({n});
}

double training_accuracy(const DecisionTree& t, const Dataset& ds) {
  std::size_t ok = 0;
  for (const auto& r : ds.rows()) ok += t.predict(r) == r.label;
  return static_cast<double>(ok) / ds.size();
}

}  // namespace

TEST(DecisionTree, PureDataIsASingleLeaf) {
  const auto ds = make_dataset({{1}, {2}, {3}, {4}, {5}, {6}, {7}, {8}, {9}, {10}, {11}}, std::vector<Mode>(11, B));
  const auto t = train_tree(ds, {});
  ASSERT_EQ(t.nodes().size(), 1u);
  EXPECT_EQ(t.predict(std::vector<double>{100.0}), B);
  EXPECT_EQ(t.nodes()[0].class_counts, (std::array<std::size_t, 3>{0, 11, 0}));
}

TEST(DecisionTree, HandComputedGiniSplit) {
  // Candidates 0.5, 1.5, 2.5 have weighted Gini 1/3, 0, 1/3.
  const auto ds = make_dataset({{0}, {1}, {2}, {3}}, {W, W, B, B});
  for (Impurity imp : {Impurity::Gini, Impurity::Entropy}) {
    const auto t = train_tree(ds, {1, 2, imp});
    ASSERT_EQ(t.nodes().size(), 3u);
    EXPECT_EQ(t.nodes()[0].feature, 0);
    EXPECT_EQ(t.nodes()[0].threshold, 1.5);
    EXPECT_EQ(t.predict(std::vector<double>{1.49}), W);
    EXPECT_EQ(t.predict(std::vector<double>{1.5}), B);
    EXPECT_EQ(t.depth(), 1u);
  }
}

TEST(DecisionTree, MinBranchStopsSmallNodes) {
  const auto ds = make_dataset({{0}, {0.1}, {0.2}, {0.3}, {0.4}, {1.0}, {1.1}, {1.2}, {1.3}}, {W, W, W, W, W, B, B, B, B});
  const auto stopped = train_tree(ds, {1, 10, Impurity::Gini});
  ASSERT_EQ(stopped.nodes().size(), 1u);
  EXPECT_EQ(stopped.predict(std::vector<double>{0.7}), W);
  const auto split = train_tree(ds, {1, 9, Impurity::Gini});
  ASSERT_EQ(split.nodes().size(), 3u);
  EXPECT_DOUBLE_EQ(split.nodes()[0].threshold, 0.7);
  EXPECT_EQ(split.predict(std::vector<double>{1.5}), B);
}

TEST(DecisionTree, RootSplitMatchesBruteForceOracle) {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<double>> x;
    std::vector<Mode> y;
    for (int i = 0; i < 30; ++i) {
      x.push_back({std::round(rng.uniform(0, 20)), std::round(rng.uniform(0, 20)), std::round(rng.uniform(0, 20))});
      y.push_back(mode_from_index(rng.uniform_index(3)));
    }
    const auto ds = make_dataset(x, y);
    // Every (feature, midpoint) candidate, scanned in tie-break order.
    double best = INFINITY;
    int best_f = -1;
    double best_t = 0.0;
    for (int f = 0; f < 3; ++f) {
      std::set<double> vals;
      for (const auto& r : x) vals.insert(r[f]);
      for (auto it = vals.begin(); std::next(it) != vals.end(); ++it) {
        const double t = (*it + *std::next(it)) / 2.0;
        std::vector<Mode> l, r;
        for (std::size_t i = 0; i < x.size(); ++i) (x[i][f] < t ? l : r).push_back(y[i]);
        const double imp = (l.size() * gini(l) + r.size() * gini(r)) / x.size();
        if (imp < best - 1e-12) {
          best = imp;
          best_f = f;
          best_t = t;
        }
      }
    }
    const auto tree = train_tree(ds, {});
    if (best < gini(y) - 1e-12) {
      EXPECT_EQ(tree.nodes()[0].feature, best_f) << "trial " << trial;
      EXPECT_EQ(tree.nodes()[0].threshold, best_t) << "trial " << trial;
    }
  }
}

TEST(DecisionTree, MinLeafIsRespected) {
  const Dataset ds = wifimode::testing::blobs(40, 3, 1.0, 5);
  for (std::size_t min_leaf : {1u, 4u, 9u}) {
    const auto t = train_tree(ds, {min_leaf, 2 * min_leaf, Impurity::Gini});
    for (const auto& n : t.nodes()) {
      std::size_t total = n.class_counts[0] + n.class_counts[1] + n.class_counts[2];
      ASSERT_GE(total, min_leaf);
    }
  }
}

TEST(DecisionTree, UnrestrictedTreeFitsTrainingData) {
  const Dataset ds = wifimode::testing::blobs(50, 4, 1.5, 6);
  EXPECT_EQ(training_accuracy(train_tree(ds, {1, 2, Impurity::Gini}), ds), 1.0);
  EXPECT_EQ(training_accuracy(train_tree(ds, {1, 2, Impurity::Entropy}), ds), 1.0);
}

TEST(DecisionTreeProperty, MonotoneTransformKeepsTrainingPredictions) {
  const Dataset ds = wifimode::testing::blobs(30, 3, 1.0, 7);
  std::vector<FeatureVector> rows;
  for (const auto& r : ds.rows()) {
    FeatureVector t = r;
    for (double& v : t.values) v = std::exp(v) * 3.0 + 1.0;
    rows.push_back(t);
  }
  const Dataset moved = Dataset::with_default_names(rows);
  const auto a = train_tree(ds, {});
  const auto b = train_tree(moved, {});
  EXPECT_EQ(a.nodes().size(), b.nodes().size());
  for (std::size_t i = 0; i < ds.size(); ++i) ASSERT_EQ(a.predict(ds[i]), b.predict(moved[i]));
}

TEST(DecisionTree, Errors) {
  const auto ds = make_dataset({{0}, {1}}, {W, B});
  EXPECT_THROW(train_tree(ds, {0, 10, Impurity::Gini}), ConfigError);
  EXPECT_THROW(train_tree(ds, {5, 2, Impurity::Gini}), ConfigError);
  EXPECT_THROW(train_tree(Dataset::with_default_names({}), {}), TrainingError);
  const std::vector<std::size_t> bad{3};
  EXPECT_THROW(train_tree(ds, {}, bad), ConfigError);

  TreeNode root;
  root.feature = 0;
  root.left = 1;
  root.right = 7;
  EXPECT_THROW(DecisionTree({root, TreeNode{}}), DataError);
  EXPECT_THROW(DecisionTree(std::vector<TreeNode>{}), DataError);

  TreeNode split;
  split.feature = 4;
  split.left = 1;
  split.right = 2;
  const DecisionTree t({split, TreeNode{}, TreeNode{}});
  EXPECT_THROW(t.predict(std::vector<double>{1.0, 2.0}), DataError);
}

TEST(Majority, TiesGoToTheLowestMode) {
  EXPECT_EQ(majority({2, 0, 1}), W);
  EXPECT_EQ(majority({1, 0, 1}), W);
  EXPECT_EQ(majority({0, 3, 3}), B);
  EXPECT_EQ(majority({0, 0, 0}), W);
}

TEST(Forest, VotesAndTies) {
  Forest f;
  f.trees = {leaf_tree(W), leaf_tree(W), leaf_tree(D)};
  EXPECT_EQ(f.predict(std::vector<double>{0.0}), W);
  f.trees = {leaf_tree(D), leaf_tree(W)};
  EXPECT_EQ(f.predict(std::vector<double>{0.0}), W);
  f.trees = {leaf_tree(D), leaf_tree(B), leaf_tree(D)};
  EXPECT_EQ(f.predict(std::vector<double>{0.0}), D);
  EXPECT_THROW(Forest{}.predict(std::vector<double>{0.0}), DataError);
}

TEST(Forest, IdenticalTreesVoteLikeOne) {
  const Dataset ds = wifimode::testing::blobs(20, 3, 2.0, 8);
  EnsembleParams e;
  e.n_trees = 400;
  e.identity_sample = true;
  e.features_per_tree = 0;
  const Forest f = train_bagged(ds, e, {});
  const auto single = train_tree(ds, {});
  for (const auto& t : f.trees) ASSERT_EQ(t.nodes().size(), single.nodes().size());
  const Dataset probe = wifimode::testing::blobs(30, 3, 3.0, 9);
  for (const auto& r : probe.rows()) ASSERT_EQ(f.predict(r), single.predict(r));
}

TEST(Forest, DeterministicPerSeed) {
  const Dataset ds = wifimode::testing::blobs(30, 6, 1.5, 10);
  EnsembleParams e;
  e.n_trees = 25;
  e.features_per_tree = 2;
  e.seed = 3;
  const Forest a = train_forest(ds, e, {});
  const Forest b = train_forest(ds, e, {});
  ASSERT_EQ(a.feature_subsets, b.feature_subsets);
  for (std::size_t t = 0; t < a.trees.size(); ++t) {
    ASSERT_EQ(a.trees[t].nodes().size(), b.trees[t].nodes().size());
    for (std::size_t i = 0; i < a.trees[t].nodes().size(); ++i) {
      ASSERT_EQ(a.trees[t].nodes()[i].feature, b.trees[t].nodes()[i].feature);
      ASSERT_EQ(a.trees[t].nodes()[i].threshold, b.trees[t].nodes()[i].threshold);
    }
  }
  e.seed = 4;
  EXPECT_NE(a.feature_subsets, train_forest(ds, e, {}).feature_subsets);
}

TEST(Forest, FullWidthForestEqualsBagging) {
  const Dataset ds = wifimode::testing::blobs(20, 15, 1.5, 11);
  EnsembleParams e;
  e.n_trees = 15;
  e.seed = 12;
  e.features_per_tree = 15;
  const Forest rf = train_forest(ds, e, {});
  e.features_per_tree = 0;
  const Forest bag = train_bagged(ds, e, {});
  for (std::size_t t = 0; t < rf.trees.size(); ++t) {
    ASSERT_EQ(rf.trees[t].nodes().size(), bag.trees[t].nodes().size());
    for (std::size_t i = 0; i < rf.trees[t].nodes().size(); ++i)
      ASSERT_EQ(rf.trees[t].nodes()[i].threshold, bag.trees[t].nodes()[i].threshold);
  }
}

TEST(Forest, DefaultsUseAThirdOfTheFeatures) {
  const EnsembleParams e;
  EXPECT_EQ(e.n_trees, 400u);
  EXPECT_EQ(e.features_per_tree, kNumFeatures / 3);
  const TreeParams p;
  EXPECT_EQ(p.min_leaf, 1u);
  EXPECT_EQ(p.min_branch, 10u);
  EXPECT_EQ(p.impurity, Impurity::Gini);
}

TEST(Forest, SubsetsAreSortedAndTreesStayInside) {
  const Dataset ds = wifimode::testing::blobs(25, 15, 1.0, 13);
  EnsembleParams e;
  e.n_trees = 30;
  e.seed = 14;
  const Forest f = train_forest(ds, e, {});
  for (std::size_t t = 0; t < f.trees.size(); ++t) {
    const auto& subset = f.feature_subsets[t];
    ASSERT_EQ(subset.size(), 5u);
    ASSERT_TRUE(std::is_sorted(subset.begin(), subset.end()));
    ASSERT_EQ(std::set<std::size_t>(subset.begin(), subset.end()).size(), 5u);
    for (const auto& n : f.trees[t].nodes())
      if (!n.is_leaf())
        ASSERT_TRUE(std::binary_search(subset.begin(), subset.end(), static_cast<std::size_t>(n.feature)));
  }
}

TEST(Forest, ParameterErrors) {
  const Dataset ds = wifimode::testing::blobs(10, 15, 1.0, 15);
  EnsembleParams e;
  e.n_trees = 3;
  e.features_per_tree = 5;
  EXPECT_THROW(train_bagged(ds, e, {}), ConfigError);
  e.features_per_tree = 16;
  EXPECT_THROW(train_forest(ds, e, {}), ConfigError);
  e.features_per_tree = 5;
  e.n_trees = 0;
  EXPECT_THROW(train_forest(ds, e, {}), ConfigError);
}

TEST(Bootstrap, DistinctFractionApproachesOneMinusInverseE) {
  const std::size_t n = 240;
  const double oracle = 1.0 - std::pow(1.0 - 1.0 / n, static_cast<double>(n));
  Rng rng(16);
  double total = 0.0;
  const int draws = 200;
  for (int d = 0; d < draws; ++d) {
    const auto s = bootstrap_sample(n, rng);
    ASSERT_EQ(s.size(), n);
    for (std::size_t v : s) ASSERT_LT(v, n);
    total += static_cast<double>(std::set<std::size_t>(s.begin(), s.end()).size()) / n;
  }
  EXPECT_NEAR(total / draws, oracle, 0.02);
  EXPECT_NEAR(oracle, 0.632, 0.001);
}
