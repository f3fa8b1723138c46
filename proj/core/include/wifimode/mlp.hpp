#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wifimode/types.hpp"

namespace wifimode {

enum class Activation { ReLU, Softmax };

// y = act(W x + b), W stored row-major as output_width x input_width.
struct LayerSpec {
  std::size_t input_width = 0;
  std::size_t output_width = 0;
  Activation activation = Activation::ReLU;
  std::vector<double> weights;
  std::vector<double> bias;

  double& w(std::size_t out, std::size_t in) { return weights[out * input_width + in]; }
  double w(std::size_t out, std::size_t in) const { return weights[out * input_width + in]; }
};

struct MlpModel {
  std::vector<LayerSpec> layers;
  // Inputs are standardized as (x - input_mean) / input_scale before the first layer.
  std::vector<double> input_mean;
  std::vector<double> input_scale;

  std::size_t input_width() const { return input_mean.size(); }
  std::size_t output_width() const { return layers.empty() ? 0 : layers.back().output_width; }
  std::size_t parameter_count() const;
  // Shape, activation placement and finiteness checks; throws DataError.
  void validate() const;

  // Zero-initialized network with the given layer widths (input first),
  // ReLU hidden layers, softmax output and identity standardization.
  static MlpModel zeros(std::span<const std::size_t> widths);
};

struct AdamParams {
  double step_size = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct MlpParams {
  std::size_t hidden_layers = 4;
  std::size_t hidden_width = 15;
  std::size_t epochs = 200;
  std::size_t batch_size = 20;
  AdamParams adam;
  double validation_fraction = 0.2;
  RngSeed seed = 0;

  void validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_accuracy = 0.0;
  double validation_accuracy = 0.0;  // NaN without a validation split
  double train_loss = 0.0;
  double validation_loss = 0.0;
};

using TrainingTrace = std::vector<EpochStats>;

struct MlpGradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;
};

// Class probabilities; throws DataError on non-finite or wrong-width input.
std::vector<double> forward(const MlpModel& model, std::span<const double> x);
Mode predict_mlp(const MlpModel& model, const FeatureVector& x);
// Argmax, ties to the lowest index.
Mode argmax_mode(std::span<const double> probabilities);

// Mean categorical cross-entropy over the batch and its exact gradient.
double loss_and_gradient(const MlpModel& model, const Dataset& batch, MlpGradients* grad);
double mean_loss(const MlpModel& model, const Dataset& batch);

// He-style uniform initialization, limit sqrt(6 / fan_in), zero biases.
MlpModel init_mlp(std::size_t input_width, std::size_t output_width, const MlpParams& p, RngSeed seed);

// Standardization constants from the data; zero spread maps to scale 1.
void fit_standardization(MlpModel& model, const Dataset& data);

struct MlpTrainResult {
  MlpModel model;
  TrainingTrace trace;
};

// Mini-batch ADAM on mean cross-entropy. A stratified validation split is
// held out and scored every epoch; the returned model is the last epoch's.
MlpTrainResult train_mlp(const Dataset& train, const MlpParams& p);

// Largest |analytic - numeric| / max(|analytic|, |numeric|, 1e-6) over every
// parameter, numeric gradients by central differences with step h.
double gradient_check(const MlpModel& model, const Dataset& batch, double h);

}  // namespace wifimode
