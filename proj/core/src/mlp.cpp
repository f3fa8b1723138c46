#include "wifimode/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "wifimode/errors.hpp"
#include "wifimode/rng.hpp"
#include "wifimode/split.hpp"

namespace wifimode {
namespace {

// Per-example activations kept for backprop: inputs[l] feeds layer l, pre[l] is its W x + b.
struct Tape {
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> pre;
  std::vector<double> probs;
};

void standardize(const MlpModel& m, std::span<const double> x, std::vector<double>& out) {
  if (x.size() != m.input_width())
    throw DataError("mlp: input has " + std::to_string(x.size()) + " values, model expects " +
                    std::to_string(m.input_width()));
  out.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) throw DataError("mlp: non-finite input value");
    out[i] = (x[i] - m.input_mean[i]) / m.input_scale[i];
  }
}

// Returns log-sum-exp of the final pre-activations (for the loss).
double run(const MlpModel& m, std::span<const double> x, Tape& tape) {
  tape.inputs.resize(m.layers.size());
  tape.pre.resize(m.layers.size());
  standardize(m, x, tape.inputs[0]);
  double lse = 0.0;
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const auto& layer = m.layers[l];
    const auto& in = tape.inputs[l];
    auto& z = tape.pre[l];
    z.assign(layer.output_width, 0.0);
    for (std::size_t o = 0; o < layer.output_width; ++o) {
      double acc = layer.bias[o];
      const double* row = &layer.weights[o * layer.input_width];
      for (std::size_t i = 0; i < layer.input_width; ++i) acc += row[i] * in[i];
      z[o] = acc;
    }
    if (layer.activation == Activation::ReLU) {
      auto& next = tape.inputs[l + 1];
      next.resize(z.size());
      for (std::size_t o = 0; o < z.size(); ++o) next[o] = z[o] > 0.0 ? z[o] : 0.0;
    } else {
      const double mx = *std::max_element(z.begin(), z.end());
      double sum = 0.0;
      tape.probs.resize(z.size());
      for (std::size_t o = 0; o < z.size(); ++o) {
        tape.probs[o] = std::exp(z[o] - mx);
        sum += tape.probs[o];
      }
      for (double& p : tape.probs) p /= sum;
      lse = mx + std::log(sum);
    }
  }
  return lse;
}

std::vector<std::size_t> iota_n(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

double accuracy(const MlpModel& m, const Dataset& data) {
  if (data.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t correct = 0;
  for (const auto& row : data.rows()) correct += predict_mlp(m, row) == row.label ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

void MlpModel::validate() const {
  if (layers.empty()) throw DataError("mlp: model has no layers");
  if (input_mean.size() != input_scale.size()) throw DataError("mlp: scaling constants disagree in width");
  std::size_t width = input_mean.size();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.input_width == 0 || layer.output_width == 0) throw DataError("mlp: layer widths must be positive");
    if (layer.input_width != width) throw DataError("mlp: layer " + std::to_string(l) + " input width mismatch");
    if (layer.weights.size() != layer.input_width * layer.output_width || layer.bias.size() != layer.output_width)
      throw DataError("mlp: layer " + std::to_string(l) + " parameter shape mismatch");
    const bool last = l + 1 == layers.size();
    if ((layer.activation == Activation::Softmax) != last)
      throw DataError("mlp: softmax must be the final layer's activation, and only its");
    for (double v : layer.weights)
      if (!std::isfinite(v)) throw DataError("mlp: non-finite weight");
    for (double v : layer.bias)
      if (!std::isfinite(v)) throw DataError("mlp: non-finite bias");
    width = layer.output_width;
  }
  for (double s : input_scale)
    if (!(s > 0.0) || !std::isfinite(s)) throw DataError("mlp: input scale must be positive");
  for (double v : input_mean)
    if (!std::isfinite(v)) throw DataError("mlp: non-finite input mean");
}

MlpModel MlpModel::zeros(std::span<const std::size_t> widths) {
  if (widths.size() < 2) throw ConfigError("mlp: need at least input and output widths");
  MlpModel m;
  m.input_mean.assign(widths[0], 0.0);
  m.input_scale.assign(widths[0], 1.0);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    LayerSpec layer;
    layer.input_width = widths[l];
    layer.output_width = widths[l + 1];
    layer.activation = l + 2 == widths.size() ? Activation::Softmax : Activation::ReLU;
    layer.weights.assign(layer.input_width * layer.output_width, 0.0);
    layer.bias.assign(layer.output_width, 0.0);
    m.layers.push_back(std::move(layer));
  }
  return m;
}

void MlpParams::validate() const {
  if (hidden_width == 0 || batch_size == 0) throw ConfigError("mlp: hidden_width and batch_size must be positive");
  if (!(adam.step_size > 0.0) || !(adam.epsilon > 0.0)) throw ConfigError("mlp: ADAM step and epsilon must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0))
    throw ConfigError("mlp: ADAM betas must lie in [0, 1)");
  if (!(validation_fraction >= 0.0 && validation_fraction < 0.5))
    throw ConfigError("mlp: validation_fraction must lie in [0, 0.5)");
}

std::vector<double> forward(const MlpModel& model, std::span<const double> x) {
  Tape tape;
  run(model, x, tape);
  return tape.probs;
}

Mode argmax_mode(std::span<const double> probabilities) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probabilities.size(); ++i)
    if (probabilities[i] > probabilities[best]) best = i;
  return mode_from_index(best);
}

Mode predict_mlp(const MlpModel& model, const FeatureVector& x) { return argmax_mode(forward(model, x.values)); }

double loss_and_gradient(const MlpModel& model, const Dataset& batch, MlpGradients* grad) {
  if (batch.empty()) throw DataError("mlp: empty batch");
  const std::size_t L = model.layers.size();
  if (grad != nullptr) {
    grad->weights.resize(L);
    grad->bias.resize(L);
    for (std::size_t l = 0; l < L; ++l) {
      grad->weights[l].assign(model.layers[l].weights.size(), 0.0);
      grad->bias[l].assign(model.layers[l].bias.size(), 0.0);
    }
  }

  Tape tape;
  std::vector<double> delta, prev;
  double loss = 0.0;
  for (const auto& row : batch.rows()) {
    const std::size_t y = index_of(row.label);
    if (y >= model.output_width()) throw DataError("mlp: label outside the output layer");
    const double lse = run(model, row.values, tape);
    loss += lse - tape.pre[L - 1][y];
    if (grad == nullptr) continue;

    delta = tape.probs;
    delta[y] -= 1.0;
    for (std::size_t l = L; l-- > 0;) {
      const auto& layer = model.layers[l];
      const auto& in = tape.inputs[l];
      auto& gw = grad->weights[l];
      auto& gb = grad->bias[l];
      for (std::size_t o = 0; o < layer.output_width; ++o) {
        gb[o] += delta[o];
        double* row_g = &gw[o * layer.input_width];
        for (std::size_t i = 0; i < layer.input_width; ++i) row_g[i] += delta[o] * in[i];
      }
      if (l == 0) break;
      prev.assign(layer.input_width, 0.0);
      for (std::size_t o = 0; o < layer.output_width; ++o) {
        const double* row_w = &layer.weights[o * layer.input_width];
        for (std::size_t i = 0; i < layer.input_width; ++i) prev[i] += row_w[i] * delta[o];
      }
      const auto& z = tape.pre[l - 1];
      for (std::size_t i = 0; i < prev.size(); ++i) prev[i] = z[i] > 0.0 ? prev[i] : 0.0;
      delta.swap(prev);
    }
  }

  const double n = static_cast<double>(batch.size());
  if (grad != nullptr) {
    for (std::size_t l = 0; l < L; ++l) {
      for (double& g : grad->weights[l]) g /= n;
      for (double& g : grad->bias[l]) g /= n;
    }
  }
  return loss / n;
}

double mean_loss(const MlpModel& model, const Dataset& batch) { return loss_and_gradient(model, batch, nullptr); }

MlpModel init_mlp(std::size_t input_width, std::size_t output_width, const MlpParams& p, RngSeed seed) {
  std::vector<std::size_t> widths{input_width};
  for (std::size_t h = 0; h < p.hidden_layers; ++h) widths.push_back(p.hidden_width);
  widths.push_back(output_width);
  MlpModel m = MlpModel::zeros(widths);
  Rng rng(seed);
  for (auto& layer : m.layers) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.input_width));
    for (double& w : layer.weights) w = rng.uniform(-limit, limit);
  }
  return m;
}

void fit_standardization(MlpModel& model, const Dataset& data) {
  const std::size_t width = data.width();
  model.input_mean.assign(width, 0.0);
  model.input_scale.assign(width, 1.0);
  if (data.empty()) return;
  const double n = static_cast<double>(data.size());
  for (std::size_t f = 0; f < width; ++f) {
    double mean = 0.0;
    for (const auto& row : data.rows()) mean += row.values[f];
    mean /= n;
    double ss = 0.0;
    for (const auto& row : data.rows()) ss += (row.values[f] - mean) * (row.values[f] - mean);
    const double sd = std::sqrt(ss / n);
    model.input_mean[f] = mean;
    model.input_scale[f] = sd > 0.0 ? sd : 1.0;
  }
}

MlpTrainResult train_mlp(const Dataset& train, const MlpParams& p) {
  p.validate();
  if (train.size() < p.batch_size)
    throw TrainingError("mlp: " + std::to_string(train.size()) + " rows is fewer than one batch of " +
                        std::to_string(p.batch_size));
  const auto counts = train.class_counts();
  if (std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) < 2)
    throw TrainingError("mlp: training data needs at least two classes");

  Dataset fit = train;
  Dataset validation;
  if (p.validation_fraction > 0.0) {
    auto parts = stratified_split(train, p.validation_fraction, derive_seed(p.seed, "validation"));
    fit = std::move(parts.train);
    validation = std::move(parts.test);
  }

  MlpTrainResult result;
  result.model = init_mlp(train.width(), kNumModes, p, derive_seed(p.seed, "init"));
  fit_standardization(result.model, fit);
  MlpModel& model = result.model;

  const std::size_t L = model.layers.size();
  MlpGradients m1, m2, grad;
  m1.weights.resize(L);
  m1.bias.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    m1.weights[l].assign(model.layers[l].weights.size(), 0.0);
    m1.bias[l].assign(model.layers[l].bias.size(), 0.0);
  }
  m2 = m1;

  const auto& a = p.adam;
  double beta1_t = 1.0, beta2_t = 1.0;
  auto adam_update = [&](std::vector<double>& theta, const std::vector<double>& g, std::vector<double>& m,
                         std::vector<double>& v) {
    const double c1 = 1.0 - beta1_t, c2 = 1.0 - beta2_t;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = a.beta1 * m[i] + (1.0 - a.beta1) * g[i];
      v[i] = a.beta2 * v[i] + (1.0 - a.beta2) * g[i] * g[i];
      theta[i] -= a.step_size * (m[i] / c1) / (std::sqrt(v[i] / c2) + a.epsilon);
    }
  };

  Rng shuffle_rng(derive_seed(p.seed, "shuffle"));
  for (std::size_t epoch = 1; epoch <= p.epochs; ++epoch) {
    auto order = iota_n(fit.size());
    shuffle_rng.shuffle(order);
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += p.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + p.batch_size);
      const Dataset batch = fit.select(std::span<const std::size_t>(order).subspan(start, end - start));
      const double loss = loss_and_gradient(model, batch, &grad);
      if (!std::isfinite(loss))
        throw TrainingError("mlp: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batch_index));
      beta1_t *= a.beta1;
      beta2_t *= a.beta2;
      for (std::size_t l = 0; l < L; ++l) {
        adam_update(model.layers[l].weights, grad.weights[l], m1.weights[l], m2.weights[l]);
        adam_update(model.layers[l].bias, grad.bias[l], m1.bias[l], m2.bias[l]);
      }
    }

    EpochStats s;
    s.epoch = epoch;
    s.train_loss = mean_loss(model, fit);
    s.train_accuracy = accuracy(model, fit);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.validation_loss = validation.empty() ? nan : mean_loss(model, validation);
    s.validation_accuracy = accuracy(model, validation);
    result.trace.push_back(s);
  }
  return result;
}

double gradient_check(const MlpModel& model, const Dataset& batch, double h) {
  if (!(h > 0.0)) throw ConfigError("gradient_check: step must be positive");
  MlpGradients analytic;
  loss_and_gradient(model, batch, &analytic);

  MlpModel probe = model;
  double worst = 0.0;
  auto check = [&](double& param, double g) {
    const double saved = param;
    param = saved + h;
    const double up = mean_loss(probe, batch);
    param = saved - h;
    const double down = mean_loss(probe, batch);
    param = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(g), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(g - numeric) / denom);
  };
  for (std::size_t l = 0; l < probe.layers.size(); ++l) {
    for (std::size_t i = 0; i < probe.layers[l].weights.size(); ++i)
      check(probe.layers[l].weights[i], analytic.weights[l][i]);
    for (std::size_t i = 0; i < probe.layers[l].bias.size(); ++i) check(probe.layers[l].bias[i], analytic.bias[l][i]);
  }
  return worst;
}

}  // namespace wifimode
