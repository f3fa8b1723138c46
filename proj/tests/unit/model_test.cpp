#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "test_support.hpp"
#include "wifimode/errors.hpp"
#include "wifimode/model.hpp"

using namespace wifimode;

namespace {

ModelConfig quick(ModelKind kind) {
  ModelConfig c = ModelConfig::defaults(kind);
  c.ensemble.n_trees = 12;
  if (kind == ModelKind::RandomForest) c.ensemble.features_per_tree = 2;
  c.mlp.epochs = 5;
  return c;
}

}  // namespace

TEST(ModelKind, NamesRoundTrip) {
  for (auto k : {ModelKind::DecisionTree, ModelKind::BaggedTrees, ModelKind::RandomForest, ModelKind::Mlp})
    EXPECT_EQ(parse_model_kind(to_string(k)), k);
  EXPECT_EQ(to_string(ModelKind::BaggedTrees), "bdt");
  EXPECT_FALSE(parse_model_kind("svm").has_value());
  EXPECT_FALSE(parse_model_kind("DT").has_value());
}

class ModelRoundTrip : public ::testing::TestWithParam<ModelKind> {};

TEST_P(ModelRoundTrip, JsonPreservesPredictionsAndText) {
  const Dataset train = wifimode::testing::blobs(30, 6, 1.2, 20);
  const Dataset probe = wifimode::testing::blobs(40, 6, 2.0, 21);
  const auto trained = train_model(train, quick(GetParam()), 5).model;
  const std::string text = model_to_json(trained);
  const TrainedModel back = model_from_json(text);
  EXPECT_EQ(back.kind, trained.kind);
  EXPECT_EQ(back.params_json, trained.params_json);
  for (const auto& r : probe.rows()) ASSERT_EQ(back.predict(r), trained.predict(r));
  EXPECT_EQ(model_to_json(back), text);
}

INSTANTIATE_TEST_SUITE_P(AllKinds, ModelRoundTrip,
                         ::testing::Values(ModelKind::DecisionTree, ModelKind::BaggedTrees, ModelKind::RandomForest,
                                           ModelKind::Mlp),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(TrainModel, SeedDerivesFromKindAndMaster) {
  const Dataset train = wifimode::testing::blobs(30, 6, 1.5, 22);
  const auto a = model_to_json(train_model(train, quick(ModelKind::RandomForest), 7).model);
  const auto b = model_to_json(train_model(train, quick(ModelKind::RandomForest), 7).model);
  const auto c = model_to_json(train_model(train, quick(ModelKind::RandomForest), 8).model);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  // The forest is exactly what train_forest builds from the derived seed.
  EnsembleParams e = quick(ModelKind::RandomForest).ensemble;
  e.seed = derive_seed(7, "rf");
  const Forest f = train_forest(train, e, TreeParams{});
  const auto trained = train_model(train, quick(ModelKind::RandomForest), 7).model;
  EXPECT_EQ(std::get<Forest>(trained.model).feature_subsets, f.feature_subsets);
}

TEST(ModelParams, DefaultsAndOverrides) {
  const auto dt = model_config_from_json(ModelKind::DecisionTree, "");
  EXPECT_EQ(dt.tree.min_branch, 10u);
  const auto rf = model_config_from_json(ModelKind::RandomForest,
                                         R"({"n_trees": 50, "features_per_tree": "all", "impurity": "entropy"})");
  EXPECT_EQ(rf.ensemble.n_trees, 50u);
  EXPECT_EQ(rf.ensemble.features_per_tree, 0u);
  EXPECT_EQ(rf.tree.impurity, Impurity::Entropy);
  const auto mlp = model_config_from_json(ModelKind::Mlp, R"({"epochs": 3, "step_size": 0.01})");
  EXPECT_EQ(mlp.mlp.epochs, 3u);
  EXPECT_EQ(mlp.mlp.adam.step_size, 0.01);
  EXPECT_EQ(mlp.mlp.hidden_layers, 4u);
}

TEST(ModelParams, ConfigRoundTrip) {
  for (auto k : {ModelKind::DecisionTree, ModelKind::BaggedTrees, ModelKind::RandomForest, ModelKind::Mlp}) {
    const auto text = model_config_to_json(ModelConfig::defaults(k));
    EXPECT_EQ(model_config_to_json(model_config_from_json(k, text)), text);
  }
}

TEST(ModelParams, Errors) {
  EXPECT_THROW(model_config_from_json(ModelKind::DecisionTree, R"({"n_trees": 5})"), ConfigError);
  EXPECT_THROW(model_config_from_json(ModelKind::DecisionTree, R"({"impurity": "variance"})"), ConfigError);
  EXPECT_THROW(model_config_from_json(ModelKind::BaggedTrees, R"({"features_per_tree": "all"})"), ConfigError);
  EXPECT_THROW(model_config_from_json(ModelKind::RandomForest, R"({"features_per_tree": "some"})"), ConfigError);
  EXPECT_THROW(model_config_from_json(ModelKind::RandomForest, R"({"n_trees": 0})"), ConfigError);
  EXPECT_THROW(model_config_from_json(ModelKind::Mlp, R"({"epochs": "ten"})"), ConfigError);
  EXPECT_THROW(model_config_from_json(ModelKind::Mlp, R"({"batch_size": 0})"), ConfigError);
  EXPECT_THROW(model_config_from_json(ModelKind::Mlp, R"({"epochs": -1})"), ConfigError);
  EXPECT_THROW(model_config_from_json(ModelKind::RandomForest, R"({"features_per_tree": -2})"), ConfigError);
  EXPECT_THROW(model_config_from_json(ModelKind::Mlp, R"({"dropout": 0.5})"), ConfigError);
  EXPECT_THROW(model_config_from_json(ModelKind::Mlp, "[1, 2]"), ConfigError);
  EXPECT_THROW(model_config_from_json(ModelKind::Mlp, "{"), ConfigError);
}

TEST(ModelJson, MalformedDocuments) {
  EXPECT_THROW(model_from_json("not json"), DataError);
  EXPECT_THROW(model_from_json(R"({"kind": "svm"})"), DataError);
  EXPECT_THROW(model_from_json(R"({"kind": "dt", "trees": []})"), DataError);
  const auto bad_child = R"({"kind":"dt","trees":[{"feature_id":[1,0],"threshold":[0.5,0],"left":[1,-1],
      "right":[5,-1],"class_counts":[[1,1,0],[1,0,0]]}]})";
  EXPECT_THROW(model_from_json(bad_child), DataError);
}
