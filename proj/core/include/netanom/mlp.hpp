#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "netanom/frame.hpp"
#include "netanom/matrix.hpp"

namespace netanom {

/// Fully connected layer; weights are out x in, row-major.
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> biases;

  DenseLayer() = default;
  DenseLayer(std::size_t n_in, std::size_t n_out)
      : in(n_in), out(n_out), weights(n_in * n_out, 0.0), biases(n_out, 0.0) {}

  double& weight(std::size_t o, std::size_t i) noexcept { return weights[o * in + i]; }
  double weight(std::size_t o, std::size_t i) const noexcept { return weights[o * in + i]; }
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Feedforward binary classifier: ReLU on every hidden layer, one sigmoid
/// output unit. The detector uses dims [n, 2n, 2n, 1].
struct MlpModel {
  std::vector<DenseLayer> layers;

  std::vector<std::size_t> layer_dims() const;
  std::size_t n_inputs() const { return layers.front().in; }
  std::size_t parameter_count() const;
  friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

/// Same shapes as the model's parameters.
struct MlpGradients {
  std::vector<DenseLayer> layers;
};

struct AdamState {
  std::uint64_t step = 0;
  std::vector<DenseLayer> first_moment;
  std::vector<DenseLayer> second_moment;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  std::size_t epochs = 60;
  std::size_t batch_size = 256;
  bool shuffle_each_epoch = true;
  std::uint64_t seed = 0;
  double learning_rate = 0.001;
};

struct EpochStats {
  std::size_t epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;
};

struct TrainResult {
  MlpModel model;
  std::vector<EpochStats> history;
};

/// n*2n + 2n + (2n)^2 + 2n + 2n + 1.
std::size_t count_params(std::size_t n_series);

/// Dims [n, 2n, 2n, 1]; weights ~ N(0, 2/fan_in) for ReLU layers and
/// N(0, 1/fan_in) for the output, biases zero.
MlpModel init_mlp(std::size_t n_series, std::uint64_t seed);
MlpModel init_mlp(std::span<const std::size_t> dims, std::uint64_t seed);

/// Zero-initialized parameters with the given dims.
MlpModel make_mlp(std::span<const std::size_t> dims);

/// Sigmoid output in (0, 1). Throws std::invalid_argument on width mismatch.
double forward(const MlpModel& model, std::span<const double> row);
std::vector<double> forward_batch(const MlpModel& model, const Matrix& x);

/// Mean binary cross-entropy with predictions clamped to [1e-7, 1 - 1e-7].
double bce_loss(std::span<const double> predicted, std::span<const std::uint8_t> actual);

/// Gradient of the mean cross-entropy over the batch with respect to every
/// weight and bias.
MlpGradients backward(const MlpModel& model, const Matrix& batch_x,
                      std::span<const std::uint8_t> batch_y);

AdamState make_adam(const MlpModel& model, double learning_rate = 0.001);

/// One bias-corrected Adam update in place.
void adam_step(AdamState& state, MlpModel& model, const MlpGradients& grads);

/// Minibatch Adam on the train rows; history holds test loss and accuracy
/// after every epoch. Throws std::invalid_argument on single-class training data.
TrainResult train(MlpModel model, const LabeledSplit& split, const TrainConfig& config);

/// Share of rows where (p > 0.5) equals the label.
double binary_accuracy(std::span<const double> predicted, std::span<const std::uint8_t> actual);

/// Writes `epoch,loss,accuracy` rows.
void write_history_csv(std::span<const EpochStats> history, const std::filesystem::path& path);

}  // namespace netanom
