#include "wifimode/trees.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "wifimode/errors.hpp"

namespace wifimode {
namespace {

double node_impurity(const std::array<std::size_t, kNumModes>& counts, std::size_t n, Impurity kind) {
  if (n == 0) return 0.0;
  const double total = static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double q = static_cast<double>(c) / total;
    acc += kind == Impurity::Gini ? q * q : -q * std::log2(q);
  }
  return kind == Impurity::Gini ? 1.0 - acc : acc;
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const TreeParams& p, std::span<const std::size_t> features, Rng* split_rng,
              std::size_t per_split_count)
      : data_(data), p_(p), features_(features.begin(), features.end()), split_rng_(split_rng),
        per_split_count_(per_split_count) {}

  std::vector<TreeNode> build(std::vector<std::size_t> rows) {
    grow(std::move(rows));
    return std::move(nodes_);
  }

 private:
  int grow(std::vector<std::size_t> rows) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    std::array<std::size_t, kNumModes> counts{};
    for (std::size_t r : rows) ++counts[index_of(data_[r].label)];
    nodes_[id].class_counts = counts;
    nodes_[id].prediction = majority(counts);

    const std::size_t n = rows.size();
    const bool pure = std::count(counts.begin(), counts.end(), std::size_t{0}) >= static_cast<std::ptrdiff_t>(kNumModes - 1);
    if (pure || n < p_.min_branch) return id;

    const double parent = node_impurity(counts, n, p_.impurity);
    const Split best = find_split(rows, node_features());
    if (best.feature < 0 || !(best.impurity < parent - 1e-12)) return id;

    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) (data_[r].values[best.feature] < best.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    nodes_[id].feature = best.feature;
    nodes_[id].threshold = best.threshold;
    const int l = grow(std::move(left));
    nodes_[id].left = l;
    const int r = grow(std::move(right));
    nodes_[id].right = r;
    return id;
  }

  std::vector<std::size_t> node_features() {
    if (split_rng_ == nullptr) return features_;
    std::vector<std::size_t> all = features_;
    const std::size_t take = std::min(per_split_count_, all.size());
    for (std::size_t i = 0; i < take; ++i) std::swap(all[i], all[i + split_rng_->uniform_index(all.size() - i)]);
    all.resize(take);
    std::sort(all.begin(), all.end());
    return all;
  }

  Split find_split(const std::vector<std::size_t>& rows, const std::vector<std::size_t>& features) const {
    const std::size_t n = rows.size();
    Split best;
    best.impurity = INFINITY;
    std::vector<std::pair<double, std::size_t>> column(n);
    for (std::size_t f : features) {
      for (std::size_t i = 0; i < n; ++i)
        column[i] = {data_[rows[i]].values[f], index_of(data_[rows[i]].label)};
      std::sort(column.begin(), column.end());

      std::array<std::size_t, kNumModes> left{}, right{};
      for (const auto& [v, c] : column) ++right[c];
      for (std::size_t i = 0; i + 1 < n; ++i) {
        ++left[column[i].second];
        --right[column[i].second];
        const double a = column[i].first, b = column[i + 1].first;
        if (!(a < b)) continue;
        const std::size_t nl = i + 1, nr = n - nl;
        if (nl < p_.min_leaf || nr < p_.min_leaf) continue;
        const double imp = (static_cast<double>(nl) * node_impurity(left, nl, p_.impurity) +
                            static_cast<double>(nr) * node_impurity(right, nr, p_.impurity)) /
                           static_cast<double>(n);
        if (imp < best.impurity) {
          double mid = a + (b - a) / 2.0;
          if (!(mid > a)) mid = b;
          best = {static_cast<int>(f), mid, imp};
        }
      }
    }
    return best;
  }

  const Dataset& data_;
  const TreeParams& p_;
  std::vector<std::size_t> features_;
  Rng* split_rng_;
  std::size_t per_split_count_;
  std::vector<TreeNode> nodes_;
};

std::vector<std::size_t> all_features(std::size_t width) {
  std::vector<std::size_t> f(width);
  std::iota(f.begin(), f.end(), std::size_t{0});
  return f;
}

Forest train_ensemble(const Dataset& train, const EnsembleParams& e, const TreeParams& p, std::size_t n_f) {
  p.validate();
  if (e.n_trees == 0) throw ConfigError("ensemble: n_trees must be at least 1");
  if (train.empty()) throw TrainingError("cannot train on an empty dataset");
  const std::size_t width = train.width();
  const std::size_t n = train.size();

  Forest forest;
  forest.trees.reserve(e.n_trees);
  forest.feature_subsets.reserve(e.n_trees);
  for (std::size_t t = 0; t < e.n_trees; ++t) {
    const RngSeed tree_seed = derive_seed(e.seed, static_cast<std::uint64_t>(t));
    std::vector<std::size_t> rows;
    if (e.identity_sample) {
      rows.resize(n);
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    } else {
      Rng boot(derive_seed(tree_seed, "bootstrap"));
      rows = bootstrap_sample(n, boot);
    }

    std::vector<std::size_t> subset = all_features(width);
    if (!e.per_split_features && n_f < width) {
      Rng pick(derive_seed(tree_seed, "features"));
      for (std::size_t i = 0; i < n_f; ++i) std::swap(subset[i], subset[i + pick.uniform_index(width - i)]);
      subset.resize(n_f);
      std::sort(subset.begin(), subset.end());
    }

    Rng split_rng(derive_seed(tree_seed, "split"));
    Rng* per_split = e.per_split_features && n_f < width ? &split_rng : nullptr;
    TreeBuilder builder(train, p, subset, per_split, n_f);
    forest.trees.emplace_back(builder.build(std::move(rows)));
    forest.feature_subsets.push_back(std::move(subset));
  }
  return forest;
}

}  // namespace

void TreeParams::validate() const {
  if (min_leaf == 0 || min_branch == 0) throw ConfigError("tree: min_leaf and min_branch must be positive");
  if (min_leaf > min_branch) throw ConfigError("tree: min_leaf must not exceed min_branch");
}

DecisionTree::DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw DataError("tree has no nodes");
  const int n = static_cast<int>(nodes_.size());
  for (const auto& node : nodes_) {
    if (node.is_leaf()) continue;
    if (node.left <= 0 || node.left >= n || node.right <= 0 || node.right >= n)
      throw DataError("tree node has an invalid child index");
  }
}

Mode DecisionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& node = nodes_[i];
    if (static_cast<std::size_t>(node.feature) >= x.size())
      throw DataError("tree tests feature " + std::to_string(node.feature + 1) + " but input has " +
                      std::to_string(x.size()));
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left : node.right);
  }
  return nodes_[i].prediction;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t deepest = 0;
  // Children always follow their parent in the array.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, d[i]);
    if (nodes_[i].is_leaf()) continue;
    d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
    d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
  }
  return deepest;
}

Mode majority(const std::array<std::size_t, kNumModes>& counts) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < kNumModes; ++c)
    if (counts[c] > counts[best]) best = c;
  return mode_from_index(best);
}

DecisionTree train_tree_on_rows(const Dataset& train, std::span<const std::size_t> rows, const TreeParams& p,
                                std::span<const std::size_t> feature_subset) {
  p.validate();
  if (rows.empty()) throw TrainingError("cannot train a tree on an empty dataset");
  if (feature_subset.empty()) throw ConfigError("tree: feature subset is empty");
  for (std::size_t f : feature_subset)
    if (f >= train.width()) throw ConfigError("tree: feature index " + std::to_string(f) + " out of range");
  std::vector<std::size_t> sorted(feature_subset.begin(), feature_subset.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  TreeBuilder builder(train, p, sorted, nullptr, sorted.size());
  return DecisionTree(builder.build({rows.begin(), rows.end()}));
}

DecisionTree train_tree(const Dataset& train, const TreeParams& p, std::span<const std::size_t> feature_subset) {
  std::vector<std::size_t> rows(train.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return train_tree_on_rows(train, rows, p, feature_subset);
}

DecisionTree train_tree(const Dataset& train, const TreeParams& p) {
  return train_tree(train, p, all_features(train.width()));
}

Mode Forest::predict(std::span<const double> x) const {
  if (trees.empty()) throw DataError("forest has no trees");
  std::array<std::size_t, kNumModes> votes{};
  for (const auto& t : trees) ++votes[index_of(t.predict(x))];
  return majority(votes);
}

std::vector<std::size_t> bootstrap_sample(std::size_t n, Rng& rng) {
  std::vector<std::size_t> rows(n);
  for (auto& r : rows) r = rng.uniform_index(n);
  return rows;
}

Forest train_bagged(const Dataset& train, const EnsembleParams& e, const TreeParams& p) {
  if (e.features_per_tree != 0 && e.features_per_tree != train.width())
    throw ConfigError("bagging uses every feature; features_per_tree must be 'all'");
  return train_ensemble(train, e, p, train.width());
}

Forest train_forest(const Dataset& train, const EnsembleParams& e, const TreeParams& p) {
  const std::size_t n_f = e.features_per_tree == 0 ? train.width() : e.features_per_tree;
  if (n_f > train.width())
    throw ConfigError("random forest: features_per_tree " + std::to_string(n_f) + " exceeds " +
                      std::to_string(train.width()) + " features");
  return train_ensemble(train, e, p, n_f);
}

Mode predict_tree(const DecisionTree& tree, const FeatureVector& x) { return tree.predict(x); }
Mode predict_forest(const Forest& forest, const FeatureVector& x) { return forest.predict(x); }

}  // namespace wifimode
