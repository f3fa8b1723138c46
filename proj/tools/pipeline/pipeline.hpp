#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "wifimode/eval.hpp"
#include "wifimode/features.hpp"
#include "wifimode/model.hpp"
#include "wifimode/relieff.hpp"
#include "wifimode/simulator.hpp"
#include "wifimode/types.hpp"

namespace wifimode::pipeline {

inline constexpr std::array<ModelKind, 4> kAllModelKinds{ModelKind::DecisionTree, ModelKind::BaggedTrees,
                                                         ModelKind::RandomForest, ModelKind::Mlp};

// Whole-run configuration. Every stage seed is derived from `seed` by a
// fixed label, so a stage run on its own with the same master seed makes the
// same bytes as the full run.
struct PipelineConfig {
  RngSeed seed = 42;
  double test_fraction = 0.4;
  SimConfig simulation;  // simulation.seed is ignored; see stage_seed
  ReliefFParams relieff;  // relieff.seed is ignored
  std::array<ModelConfig, 4> models{ModelConfig::defaults(ModelKind::DecisionTree),
                                    ModelConfig::defaults(ModelKind::BaggedTrees),
                                    ModelConfig::defaults(ModelKind::RandomForest),
                                    ModelConfig::defaults(ModelKind::Mlp)};

  const ModelConfig& model(ModelKind k) const;
  void validate() const;
};

// Labels: "simulate", "relieff". Model and split seeds are derived inside
// run_experiment / train_model from the master seed itself.
RngSeed stage_seed(RngSeed master, std::string_view stage);

// Strict JSON readers; unknown keys and bad values are ConfigErrors.
PipelineConfig pipeline_config_from_json(std::string_view text);
std::string pipeline_config_to_json(const PipelineConfig& cfg);
SimConfig sim_config_from_json(std::string_view text, SimConfig base = {});
LoopGeometry geometry_from_json(std::string_view text, LoopGeometry base = {});
std::string geometry_to_json(const LoopGeometry& geo);

// A CLI JSON argument is either an inline object (starts with '{') or a file path.
std::string read_json_argument(const std::string& arg);

// Stage functions. Each writes its artifacts and returns what later stages need.
SimulationResult run_simulate(const SimConfig& sim, RngSeed master, const std::filesystem::path& detections_out,
                              const std::filesystem::path& truth_out);

BuildResult run_extract(const std::vector<DetectionRecord>& detections, const TruthMap& truth, const LoopGeometry& geo,
                        const std::filesystem::path& features_out);
// Sidecar holding speed_norm and the skipped trips: `<features>.meta.json`.
std::filesystem::path meta_path_for(const std::filesystem::path& features);

FeatureWeights run_rank(const Dataset& features, ReliefFParams p, RngSeed master, const std::filesystem::path& out);
std::string ranking_to_json(const FeatureWeights& w, const Dataset& ds);

TrainOutput run_train(const Dataset& features, const ModelConfig& cfg, double test_fraction, RngSeed master,
                      const std::filesystem::path& model_out, const std::filesystem::path& trace_out);
std::string trace_to_csv(const TrainingTrace& trace);

MetricsReport run_evaluate(const TrainedModel& model, const Dataset& features, double test_fraction, RngSeed master,
                           const std::filesystem::path& report_out);

// Writes summary.txt, metrics.json and confusion_<model>.csv into `dir`;
// with plot data also plot_accuracy.csv and, given the MLP trace CSV, plot_epochs.csv.
void run_report(const std::vector<MetricsReport>& reports, const std::filesystem::path& dir, bool emit_plot_data,
                const std::string* trace_csv);
std::string summary_table(const std::vector<MetricsReport>& reports);

// Full pipeline into `dir`. Returns the reports in model order.
std::vector<MetricsReport> run_reproduce(const PipelineConfig& cfg, const std::filesystem::path& dir);

// Throws DataError unless `dir` exists (creating it) and accepts a file.
void ensure_writable_directory(const std::filesystem::path& dir);

}  // namespace wifimode::pipeline
