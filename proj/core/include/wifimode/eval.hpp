#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wifimode/model.hpp"
#include "wifimode/split.hpp"
#include "wifimode/types.hpp"

namespace wifimode {

// Rows are the actual mode, columns the predicted mode.
struct ConfusionMatrix {
  std::array<std::array<std::size_t, kNumModes>, kNumModes> counts{};

  std::size_t row_sum(std::size_t actual) const;
  std::size_t col_sum(std::size_t predicted) const;
  std::size_t trace() const;
  std::size_t total() const;
};

ConfusionMatrix confusion(std::span<const Mode> actual, std::span<const Mode> predicted);

// A percentage kept both exactly (as a ratio) and in its reported form.
struct Percentage {
  std::size_t numerator = 0;
  std::size_t denominator = 1;

  double exact() const { return 100.0 * static_cast<double>(numerator) / static_cast<double>(denominator); }
  // Round-half-up to 2 decimals, computed in integer arithmetic.
  double rounded() const;
  // rounded() formatted with exactly two decimals.
  std::string text() const;
};

struct MetricsReport {
  std::string model;  // "dt", "bdt", "rf", "mlp" or a free label
  RngSeed seed = 0;
  std::string params_json;  // parameter echo, "{}" when unknown
  ConfusionMatrix matrix;
  // Absent when the class never occurs (recall) or is never predicted (precision).
  std::array<std::optional<Percentage>, kNumModes> recall;
  std::array<std::optional<Percentage>, kNumModes> precision;
  Percentage accuracy;
};

// Throws DataError for an empty matrix.
MetricsReport metrics(const ConfusionMatrix& cm);

std::string report_to_json(const MetricsReport& r);
MetricsReport report_from_json(std::string_view text);
// Aligned table: actual modes on rows, predictions on columns, with totals,
// recall column, precision row and overall accuracy.
std::string format_report_table(const MetricsReport& r);

struct ModelOutcome {
  ModelConfig config;
  TrainedModel model;
  TrainingTrace trace;
  std::vector<Mode> predictions;  // on the test rows, in test order
  MetricsReport report;
};

struct ExperimentResult {
  SplitIndices split;
  std::vector<ModelOutcome> outcomes;  // in config order
};

// One stratified split (seeded by derive_seed(seed, "split")) shared by every
// model; each model trains via train_model with the same master seed.
ExperimentResult run_experiment(const Dataset& features, std::span<const ModelConfig> models, double test_fraction,
                                RngSeed seed);

// Scores a trained model on labeled rows.
MetricsReport evaluate_model(const TrainedModel& model, const Dataset& test, std::vector<Mode>* predictions = nullptr);

}  // namespace wifimode
