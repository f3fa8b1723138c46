#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "wifimode/mlp.hpp"
#include "wifimode/trees.hpp"
#include "wifimode/types.hpp"

namespace wifimode {

enum class ModelKind { DecisionTree, BaggedTrees, RandomForest, Mlp };

std::string_view to_string(ModelKind k);  // "dt", "bdt", "rf", "mlp"
std::optional<ModelKind> parse_model_kind(std::string_view s);

struct ModelConfig {
  ModelKind kind = ModelKind::DecisionTree;
  TreeParams tree;
  // n_trees / features_per_tree; the seed is always derived from the master seed.
  EnsembleParams ensemble;
  MlpParams mlp;

  static ModelConfig defaults(ModelKind kind);
};

// Parameter documents, e.g. {"min_leaf":1,"min_branch":10,"impurity":"gini"}
// for dt, plus n_trees (bdt, rf), features_per_tree and per_split (rf), or
// the MLP fields. Missing keys keep their defaults; unknown keys are a ConfigError.
ModelConfig model_config_from_json(ModelKind kind, std::string_view text);
std::string model_config_to_json(const ModelConfig& cfg);

struct TrainedModel {
  ModelKind kind = ModelKind::DecisionTree;
  std::variant<DecisionTree, Forest, MlpModel> model;
  // Parameter echo carried into reports, "{}" when unknown.
  std::string params_json = "{}";

  Mode predict(const FeatureVector& x) const;
};

struct TrainOutput {
  TrainedModel model;
  TrainingTrace trace;  // MLP only
};

// Seeds the model from derive_seed(master_seed, to_string(kind)), so the same
// master seed trains the same model whether run alone or inside an experiment.
TrainOutput train_model(const Dataset& train, const ModelConfig& cfg, RngSeed master_seed);

// Trees: per-tree node arrays (1-based feature_id, 0 at leaves; threshold;
// left/right child indexes, -1 at leaves; class counts). MLP: layer widths,
// activation, row-major weights, biases and input scaling constants.
std::string model_to_json(const TrainedModel& m);
TrainedModel model_from_json(std::string_view text);

}  // namespace wifimode
