#include "wifimode/model.hpp"

#include <algorithm>
#include <initializer_list>
#include <type_traits>

#include <nlohmann/json.hpp>

#include "wifimode/errors.hpp"
#include "wifimode/rng.hpp"

namespace wifimode {
namespace {

using nlohmann::json;

json tree_to_json(const DecisionTree& tree) {
  json feature = json::array(), threshold = json::array(), left = json::array(), right = json::array(),
       counts = json::array();
  for (const auto& n : tree.nodes()) {
    feature.push_back(n.feature + 1);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    counts.push_back(n.class_counts);
  }
  return {{"feature_id", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"class_counts", counts}};
}

DecisionTree tree_from_json(const json& j) {
  const auto& feature = j.at("feature_id");
  const std::size_t n = feature.size();
  if (j.at("threshold").size() != n || j.at("left").size() != n || j.at("right").size() != n ||
      j.at("class_counts").size() != n)
    throw DataError("model: tree node arrays differ in length");
  std::vector<TreeNode> nodes(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = nodes[i];
    node.feature = feature[i].get<int>() - 1;
    node.threshold = j["threshold"][i].get<double>();
    node.left = j["left"][i].get<int>();
    node.right = j["right"][i].get<int>();
    node.class_counts = j["class_counts"][i].get<std::array<std::size_t, kNumModes>>();
    node.prediction = majority(node.class_counts);
  }
  return DecisionTree(std::move(nodes));
}

json mlp_to_json(const MlpModel& m) {
  json layers = json::array();
  for (const auto& l : m.layers) {
    layers.push_back({{"input_width", l.input_width},
                      {"output_width", l.output_width},
                      {"activation", l.activation == Activation::ReLU ? "relu" : "softmax"},
                      {"weights", l.weights},
                      {"bias", l.bias}});
  }
  return {{"layers", layers}, {"input_mean", m.input_mean}, {"input_scale", m.input_scale}};
}

MlpModel mlp_from_json(const json& j) {
  MlpModel m;
  for (const auto& lj : j.at("layers")) {
    LayerSpec l;
    l.input_width = lj.at("input_width").get<std::size_t>();
    l.output_width = lj.at("output_width").get<std::size_t>();
    const auto act = lj.at("activation").get<std::string>();
    if (act == "relu") l.activation = Activation::ReLU;
    else if (act == "softmax") l.activation = Activation::Softmax;
    else throw DataError("model: unknown activation '" + act + "'");
    l.weights = lj.at("weights").get<std::vector<double>>();
    l.bias = lj.at("bias").get<std::vector<double>>();
    m.layers.push_back(std::move(l));
  }
  m.input_mean = j.at("input_mean").get<std::vector<double>>();
  m.input_scale = j.at("input_scale").get<std::vector<double>>();
  m.validate();
  return m;
}

void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(std::string(what) + ": unknown key '" + key + "'");
  }
}

// nlohmann converts -1 to a huge size_t without complaint, so counts are checked first.
std::size_t unsigned_value(const json& v, std::string_view key) {
  if (!v.is_number_unsigned()) throw ConfigError(std::string(key) + ": expected a non-negative integer");
  return v.get<std::size_t>();
}

template <class T>
void read_key(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  if constexpr (std::is_same_v<T, std::size_t>) out = unsigned_value(j.at(key), key);
  else out = j.at(key).get<T>();
}

}  // namespace

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::DecisionTree: return "dt";
    case ModelKind::BaggedTrees: return "bdt";
    case ModelKind::RandomForest: return "rf";
    case ModelKind::Mlp: return "mlp";
  }
  return "unknown";
}

std::optional<ModelKind> parse_model_kind(std::string_view s) {
  for (auto k : {ModelKind::DecisionTree, ModelKind::BaggedTrees, ModelKind::RandomForest, ModelKind::Mlp})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

ModelConfig ModelConfig::defaults(ModelKind kind) {
  ModelConfig c;
  c.kind = kind;
  switch (kind) {
    case ModelKind::BaggedTrees:
      c.ensemble.n_trees = 200;
      c.ensemble.features_per_tree = 0;
      break;
    case ModelKind::RandomForest:
      c.ensemble.n_trees = 400;
      c.ensemble.features_per_tree = 5;
      break;
    default:
      break;
  }
  return c;
}

ModelConfig model_config_from_json(ModelKind kind, std::string_view text) {
  ModelConfig c = ModelConfig::defaults(kind);
  const std::string what = "params for " + std::string(to_string(kind));
  try {
    const json j = text.empty() ? json::object() : json::parse(text);
    if (kind == ModelKind::Mlp) {
      reject_unknown_keys(j,
                          {"hidden_layers", "hidden_width", "epochs", "batch_size", "step_size", "beta1", "beta2",
                           "epsilon", "validation_fraction"},
                          what);
      read_key(j, "hidden_layers", c.mlp.hidden_layers);
      read_key(j, "hidden_width", c.mlp.hidden_width);
      read_key(j, "epochs", c.mlp.epochs);
      read_key(j, "batch_size", c.mlp.batch_size);
      read_key(j, "step_size", c.mlp.adam.step_size);
      read_key(j, "beta1", c.mlp.adam.beta1);
      read_key(j, "beta2", c.mlp.adam.beta2);
      read_key(j, "epsilon", c.mlp.adam.epsilon);
      read_key(j, "validation_fraction", c.mlp.validation_fraction);
      c.mlp.validate();
      return c;
    }
    switch (kind) {
      case ModelKind::DecisionTree:
        reject_unknown_keys(j, {"min_leaf", "min_branch", "impurity"}, what);
        break;
      case ModelKind::BaggedTrees:
        reject_unknown_keys(j, {"min_leaf", "min_branch", "impurity", "n_trees"}, what);
        break;
      default:
        reject_unknown_keys(j, {"min_leaf", "min_branch", "impurity", "n_trees", "features_per_tree", "per_split"},
                            what);
        break;
    }
    read_key(j, "min_leaf", c.tree.min_leaf);
    read_key(j, "min_branch", c.tree.min_branch);
    if (j.contains("impurity")) {
      const auto imp = j.at("impurity").get<std::string>();
      if (imp == "gini") c.tree.impurity = Impurity::Gini;
      else if (imp == "entropy") c.tree.impurity = Impurity::Entropy;
      else throw ConfigError(what + ": impurity must be 'gini' or 'entropy'");
    }
    read_key(j, "n_trees", c.ensemble.n_trees);
    if (j.contains("features_per_tree")) {
      const auto& f = j.at("features_per_tree");
      c.ensemble.features_per_tree = f.is_string() && f.get<std::string>() == "all" ? 0 : unsigned_value(f, "features_per_tree");
    }
    read_key(j, "per_split", c.ensemble.per_split_features);
    c.tree.validate();
    if (c.ensemble.n_trees == 0) throw ConfigError(what + ": n_trees must be at least 1");
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

std::string model_config_to_json(const ModelConfig& c) {
  json j;
  if (c.kind == ModelKind::Mlp) {
    j = {{"hidden_layers", c.mlp.hidden_layers}, {"hidden_width", c.mlp.hidden_width},
         {"epochs", c.mlp.epochs},               {"batch_size", c.mlp.batch_size},
         {"step_size", c.mlp.adam.step_size},    {"beta1", c.mlp.adam.beta1},
         {"beta2", c.mlp.adam.beta2},            {"epsilon", c.mlp.adam.epsilon},
         {"validation_fraction", c.mlp.validation_fraction}};
    return j.dump();
  }
  j["min_leaf"] = c.tree.min_leaf;
  j["min_branch"] = c.tree.min_branch;
  j["impurity"] = c.tree.impurity == Impurity::Gini ? "gini" : "entropy";
  if (c.kind != ModelKind::DecisionTree) j["n_trees"] = c.ensemble.n_trees;
  if (c.kind == ModelKind::RandomForest) {
    if (c.ensemble.features_per_tree == 0) j["features_per_tree"] = "all";
    else j["features_per_tree"] = c.ensemble.features_per_tree;
    j["per_split"] = c.ensemble.per_split_features;
  }
  return j.dump();
}

Mode TrainedModel::predict(const FeatureVector& x) const {
  return std::visit(
      [&](const auto& m) -> Mode {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, MlpModel>) return predict_mlp(m, x);
        else return m.predict(x);
      },
      model);
}

TrainOutput train_model(const Dataset& train, const ModelConfig& cfg, RngSeed master_seed) {
  const RngSeed seed = derive_seed(master_seed, to_string(cfg.kind));
  TrainOutput out;
  out.model.kind = cfg.kind;
  out.model.params_json = model_config_to_json(cfg);
  switch (cfg.kind) {
    case ModelKind::DecisionTree:
      out.model.model = train_tree(train, cfg.tree);
      break;
    case ModelKind::BaggedTrees: {
      EnsembleParams e = cfg.ensemble;
      e.seed = seed;
      out.model.model = train_bagged(train, e, cfg.tree);
      break;
    }
    case ModelKind::RandomForest: {
      EnsembleParams e = cfg.ensemble;
      e.seed = seed;
      out.model.model = train_forest(train, e, cfg.tree);
      break;
    }
    case ModelKind::Mlp: {
      MlpParams p = cfg.mlp;
      p.seed = seed;
      auto res = train_mlp(train, p);
      out.model.model = std::move(res.model);
      out.trace = std::move(res.trace);
      break;
    }
  }
  return out;
}

std::string model_to_json(const TrainedModel& m) {
  json j;
  j["kind"] = std::string(to_string(m.kind));
  j["params"] = json::parse(m.params_json.empty() ? "{}" : m.params_json);
  if (const auto* tree = std::get_if<DecisionTree>(&m.model)) {
    j["trees"] = json::array({tree_to_json(*tree)});
  } else if (const auto* forest = std::get_if<Forest>(&m.model)) {
    json trees = json::array();
    for (const auto& t : forest->trees) trees.push_back(tree_to_json(t));
    j["trees"] = trees;
    json subsets = json::array();
    for (const auto& s : forest->feature_subsets) {
      json ids = json::array();
      for (std::size_t f : s) ids.push_back(f + 1);
      subsets.push_back(ids);
    }
    j["feature_subsets"] = subsets;
  } else {
    j["mlp"] = mlp_to_json(std::get<MlpModel>(m.model));
  }
  return j.dump(1) + "\n";
}

TrainedModel model_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    TrainedModel m;
    const auto kind = parse_model_kind(j.at("kind").get<std::string>());
    if (!kind) throw DataError("model: unknown kind");
    m.kind = *kind;
    if (j.contains("params")) m.params_json = j["params"].dump();
    if (m.kind == ModelKind::Mlp) {
      m.model = mlp_from_json(j.at("mlp"));
    } else if (m.kind == ModelKind::DecisionTree) {
      if (j.at("trees").size() != 1) throw DataError("model: decision tree must hold exactly one tree");
      m.model = tree_from_json(j["trees"][0]);
    } else {
      Forest f;
      for (const auto& t : j.at("trees")) f.trees.push_back(tree_from_json(t));
      for (const auto& s : j.at("feature_subsets")) {
        std::vector<std::size_t> ids;
        for (const auto& id : s) ids.push_back(id.get<std::size_t>() - 1);
        f.feature_subsets.push_back(std::move(ids));
      }
      if (f.trees.empty()) throw DataError("model: forest has no trees");
      m.model = std::move(f);
    }
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("model: malformed JSON: ") + e.what());
  }
}

}  // namespace wifimode
