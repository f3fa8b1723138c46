#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "wifimode/rng.hpp"
#include "wifimode/types.hpp"

namespace wifimode {

enum class Impurity { Gini, Entropy };

struct TreeParams {
  std::size_t min_leaf = 1;
  std::size_t min_branch = 10;
  Impurity impurity = Impurity::Gini;

  void validate() const;
};

// Internal nodes send `x[feature] < threshold` left. Leaves have feature == -1.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::array<std::size_t, kNumModes> class_counts{};
  Mode prediction = Mode::Walking;

  bool is_leaf() const { return feature < 0; }
};

// Flat node array; the root is node 0.
class DecisionTree {
 public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes);

  Mode predict(std::span<const double> x) const;
  Mode predict(const FeatureVector& x) const { return predict(x.values); }

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t depth() const;

 private:
  std::vector<TreeNode> nodes_;
};

// Argmax with ties going to the lowest mode index.
Mode majority(const std::array<std::size_t, kNumModes>& counts);

// Greedy CART on the given rows (duplicates allowed) using only the features
// in `feature_subset` (0-based positions). Split ties go to the lowest
// feature, then the smallest threshold.
DecisionTree train_tree(const Dataset& train, const TreeParams& p, std::span<const std::size_t> feature_subset);
DecisionTree train_tree(const Dataset& train, const TreeParams& p);
DecisionTree train_tree_on_rows(const Dataset& train, std::span<const std::size_t> rows, const TreeParams& p,
                                std::span<const std::size_t> feature_subset);

struct EnsembleParams {
  std::size_t n_trees = 400;
  // 0 means all features.
  std::size_t features_per_tree = 5;
  RngSeed seed = 0;
  // Redraw the feature subset at every split instead of once per tree.
  bool per_split_features = false;
  // Test hook: use the identity sample instead of a bootstrap draw.
  bool identity_sample = false;
};

struct Forest {
  std::vector<DecisionTree> trees;
  std::vector<std::vector<std::size_t>> feature_subsets;  // 0-based, per tree

  // Majority vote; ties go to the lowest mode index.
  Mode predict(std::span<const double> x) const;
  Mode predict(const FeatureVector& x) const { return predict(x.values); }
};

// n draws with replacement from [0, n).
std::vector<std::size_t> bootstrap_sample(std::size_t n, Rng& rng);

// Bootstrap aggregation over all features. features_per_tree must be 0 or the dataset width.
Forest train_bagged(const Dataset& train, const EnsembleParams& e, const TreeParams& p);
// Bagging plus an n_f feature subset drawn once per tree (per split with per_split_features).
Forest train_forest(const Dataset& train, const EnsembleParams& e, const TreeParams& p);

Mode predict_tree(const DecisionTree& tree, const FeatureVector& x);
Mode predict_forest(const Forest& forest, const FeatureVector& x);

}  // namespace wifimode
