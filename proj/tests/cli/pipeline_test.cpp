#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "pipeline.hpp"
#include "wifimode/errors.hpp"
#include "wifimode/io.hpp"

using namespace wifimode;
using namespace wifimode::pipeline;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const char* root = std::getenv("WIFIMODE_TEST_TMP");
  fs::path p = fs::path(root ? root : fs::temp_directory_path().string()) / ("pipeline_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

PipelineConfig fast_config(RngSeed seed) {
  PipelineConfig cfg;
  cfg.seed = seed;
  for (auto& m : cfg.models) {
    m.ensemble.n_trees = 15;
    m.mlp.epochs = 8;
  }
  return cfg;
}

}  // namespace

TEST(PipelineConfig, DefaultsRoundTrip) {
  const PipelineConfig cfg;
  const auto text = pipeline_config_to_json(cfg);
  EXPECT_EQ(pipeline_config_to_json(pipeline_config_from_json(text)), text);
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_EQ(cfg.test_fraction, 0.4);
  EXPECT_EQ(cfg.model(ModelKind::RandomForest).ensemble.features_per_tree, 5u);
}

TEST(PipelineConfig, PartialDocumentsKeepDefaults) {
  const auto cfg = pipeline_config_from_json(
      R"({"seed": 7, "simulation": {"trips_per_mode": {"biking": 20}, "radio": {"shadowing_sd_db": 2.0}},
          "relieff": {"k_neighbors": 5, "sample_count": "all"}, "models": {"rf": {"n_trees": 30}}})");
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.simulation.trips_per_mode, (std::array<std::size_t, 3>{142, 20, 150}));
  EXPECT_EQ(cfg.simulation.radio.shadowing_sd_db, 2.0);
  EXPECT_EQ(cfg.simulation.radio.path_loss_exponent, 2.5);
  EXPECT_EQ(cfg.relieff.k_neighbors, 5u);
  EXPECT_EQ(cfg.relieff.sample_count, 0u);
  EXPECT_EQ(cfg.model(ModelKind::RandomForest).ensemble.n_trees, 30u);
  EXPECT_EQ(cfg.model(ModelKind::BaggedTrees).ensemble.n_trees, 200u);
}

TEST(PipelineConfig, RejectsUnknownKeysAtEveryLevel) {
  for (const char* doc : {R"({"sead": 1})", R"({"simulation": {"geometry": {"radius": 3}}})",
                          R"({"simulation": {"kinematics": {"walking": {"speed": 1}}}})",
                          R"({"simulation": {"kinematics": {"running": {}}}})", R"({"relieff": {"k": 3}})",
                          R"({"models": {"svm": {}}})", R"({"models": {"dt": {"n_trees": 3}}})",
                          R"({"test_fraction": 1.5})", R"({"simulation": {"trips_per_mode": [1, 2]}})", R"({"simulation": {"trips_per_mode": {"biking": -1}}})",
                          R"({"simulation": {"trips_per_mode": [1, -2, 3]}})", R"({"seed": -5})",
                          R"({"relieff": {"sample_count": -1}})", R"({"models": {"rf": {"n_trees": -3}}})", "[]",
                          "{"}) {
    EXPECT_THROW(pipeline_config_from_json(doc), ConfigError) << doc;
  }
}

TEST(PipelineConfig, JsonArgumentIsInlineOrPath) {
  EXPECT_EQ(read_json_argument(R"({"a": 1})"), R"({"a": 1})");
  const auto dir = scratch("json_arg");
  write_text_file(dir / "cfg.json", R"({"seed": 3})");
  EXPECT_EQ(pipeline_config_from_json(read_json_argument((dir / "cfg.json").string())).seed, 3u);
  EXPECT_THROW(read_json_argument((dir / "missing.json").string()), ConfigError);
}

TEST(PipelineConfig, GeometryRoundTrip) {
  LoopGeometry g;
  g.coverage_radius_m = 40.0;
  const auto text = geometry_to_json(g);
  const auto back = geometry_from_json(text);
  EXPECT_EQ(back.coverage_radius_m, 40.0);
  EXPECT_EQ(back.pod_positions_m, g.pod_positions_m);
  EXPECT_THROW(geometry_from_json(R"({"coverage_radius_m": 200})"), ConfigError);
}

TEST(StageSeeds, DerivedFromMaster) {
  EXPECT_EQ(stage_seed(42, "simulate"), derive_seed(42, "simulate"));
  EXPECT_NE(stage_seed(42, "simulate"), stage_seed(42, "relieff"));
  EXPECT_NE(stage_seed(42, "simulate"), stage_seed(43, "simulate"));
}

TEST(Pipeline, StagesAgreeWithInMemoryExperiment) {
  const auto dir = scratch("stages");
  const PipelineConfig cfg = fast_config(11);
  const auto sim = run_simulate(cfg.simulation, cfg.seed, dir / "d.csv", dir / "t.csv");
  EXPECT_EQ(load_detections(dir / "d.csv"), sim.detections);
  EXPECT_EQ(load_truth(dir / "t.csv"), sim.truth);

  const auto built = run_extract(sim.detections, sim.truth, cfg.simulation.geometry, dir / "f.csv");
  EXPECT_TRUE(fs::exists(meta_path_for(dir / "f.csv")));
  const Dataset loaded = load_dataset(dir / "f.csv");
  ASSERT_EQ(loaded.size(), built.dataset.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) ASSERT_EQ(loaded[i], built.dataset[i]);

  const auto experiment = run_experiment(built.dataset, cfg.models, cfg.test_fraction, cfg.seed);
  for (std::size_t m = 0; m < cfg.models.size(); ++m) {
    const std::string name(to_string(cfg.models[m].kind));
    const auto trained =
        run_train(loaded, cfg.models[m], cfg.test_fraction, cfg.seed, dir / ("m_" + name + ".json"),
                  cfg.models[m].kind == ModelKind::Mlp ? dir / "trace.csv" : fs::path{});
    const TrainedModel reread = model_from_json(read_text_file(dir / ("m_" + name + ".json")));
    const auto report = run_evaluate(reread, loaded, cfg.test_fraction, cfg.seed, dir / ("r_" + name + ".json"));
    EXPECT_EQ(report.matrix.counts, experiment.outcomes[m].report.matrix.counts) << name;
    EXPECT_EQ(report_to_json(report), report_to_json(experiment.outcomes[m].report)) << name;
    if (cfg.models[m].kind == ModelKind::Mlp)
      EXPECT_EQ(read_text_file(dir / "trace.csv"), trace_to_csv(trained.trace));
  }
}

TEST(Pipeline, RankingJsonListsEveryFeature) {
  const auto dir = scratch("rank");
  const PipelineConfig cfg = fast_config(5);
  const auto sim = simulate_experiment([&] {
    SimConfig s = cfg.simulation;
    s.seed = stage_seed(cfg.seed, "simulate");
    return s;
  }());
  const auto built = build_dataset(segment_trips(sim.detections, sim.truth), GapTable::from_geometry(LoopGeometry{}));
  const auto w = run_rank(built.dataset, cfg.relieff, cfg.seed, dir / "ranking.json");
  const std::string text = read_text_file(dir / "ranking.json");
  EXPECT_EQ(text, ranking_to_json(w, built.dataset));
  for (const auto& info : feature_schema()) EXPECT_NE(text.find(std::string(info.name)), std::string::npos) << info.name;
}
