#include "netanom/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "netanom/errors.hpp"
#include "netanom/rng.hpp"

namespace netanom {
namespace {

constexpr double kLossClamp = 1e-7;
// Keeps the sigmoid strictly inside (0, 1) once exp() saturates.
constexpr double kOutputFloor = std::numeric_limits<double>::min();
constexpr double kOutputCeil = 1.0 - 0x1.0p-53;

double sigmoid(double z) noexcept {
  double s;
  if (z >= 0.0) {
    s = 1.0 / (1.0 + std::exp(-z));
  } else {
    const double e = std::exp(z);
    s = e / (1.0 + e);
  }
  return std::clamp(s, kOutputFloor, kOutputCeil);
}

std::vector<DenseLayer> zeros_like(const std::vector<DenseLayer>& layers) {
  std::vector<DenseLayer> out;
  out.reserve(layers.size());
  for (const auto& l : layers) out.emplace_back(l.in, l.out);
  return out;
}

// Activations of every layer for a batch; acts[0] is the input.
std::vector<Matrix> forward_all(const MlpModel& model, const Matrix& x) {
  if (model.layers.empty()) throw std::invalid_argument("forward: empty model");
  if (x.cols() != model.n_inputs()) throw std::invalid_argument("forward: input width mismatch");
  std::vector<Matrix> acts;
  acts.reserve(model.layers.size() + 1);
  acts.push_back(x);
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    const bool output = l + 1 == model.layers.size();
    const Matrix& a = acts.back();
    Matrix z(a.rows(), layer.out);
    for (std::size_t r = 0; r < a.rows(); ++r) {
      const auto in = a.row(r);
      auto dst = z.row(r);
      for (std::size_t o = 0; o < layer.out; ++o) {
        const double* w = layer.weights.data() + o * layer.in;
        double sum = layer.biases[o];
        for (std::size_t i = 0; i < layer.in; ++i) sum += w[i] * in[i];
        dst[o] = output ? sigmoid(sum) : std::max(0.0, sum);
      }
    }
    acts.push_back(std::move(z));
  }
  return acts;
}

}  // namespace

std::vector<std::size_t> MlpModel::layer_dims() const {
  std::vector<std::size_t> dims;
  if (layers.empty()) return dims;
  dims.push_back(layers.front().in);
  for (const auto& l : layers) dims.push_back(l.out);
  return dims;
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.biases.size();
  return n;
}

std::size_t count_params(std::size_t n_series) {
  if (n_series == 0) throw std::invalid_argument("count_params: need at least one series");
  const std::size_t n = n_series;
  const std::size_t h = 2 * n;
  return n * h + h + h * h + h + h + 1;
}

MlpModel make_mlp(std::span<const std::size_t> dims) {
  if (dims.size() < 2 || dims.back() != 1) {
    throw std::invalid_argument("make_mlp: dims must end with a single output unit");
  }
  MlpModel model;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    if (dims[l] == 0) throw std::invalid_argument("make_mlp: zero-width layer");
    model.layers.emplace_back(dims[l], dims[l + 1]);
  }
  return model;
}

MlpModel init_mlp(std::span<const std::size_t> dims, std::uint64_t seed) {
  MlpModel model = make_mlp(dims);
  Rng rng(seed);
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    auto& layer = model.layers[l];
    const bool output = l + 1 == model.layers.size();
    const double scale = std::sqrt((output ? 1.0 : 2.0) / static_cast<double>(layer.in));
    for (double& w : layer.weights) w = rng.normal(0.0, scale);
  }
  return model;
}

MlpModel init_mlp(std::size_t n_series, std::uint64_t seed) {
  if (n_series == 0) throw std::invalid_argument("init_mlp: need at least one series");
  const std::size_t dims[] = {n_series, 2 * n_series, 2 * n_series, 1};
  return init_mlp(dims, seed);
}

double forward(const MlpModel& model, std::span<const double> row) {
  if (model.layers.empty() || row.size() != model.n_inputs()) {
    throw std::invalid_argument("forward: input width mismatch");
  }
  std::vector<double> a(row.begin(), row.end());
  std::vector<double> next;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    const bool output = l + 1 == model.layers.size();
    next.assign(layer.out, 0.0);
    for (std::size_t o = 0; o < layer.out; ++o) {
      double sum = layer.biases[o];
      for (std::size_t i = 0; i < layer.in; ++i) sum += layer.weight(o, i) * a[i];
      next[o] = output ? sigmoid(sum) : std::max(0.0, sum);
    }
    a.swap(next);
  }
  return a.front();
}

std::vector<double> forward_batch(const MlpModel& model, const Matrix& x) {
  const auto acts = forward_all(model, x);
  const auto out = acts.back().data();
  return {out.begin(), out.end()};
}

double bce_loss(std::span<const double> predicted, std::span<const std::uint8_t> actual) {
  if (predicted.size() != actual.size()) throw std::invalid_argument("bce_loss: length mismatch");
  if (predicted.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double p = std::clamp(predicted[i], kLossClamp, 1.0 - kLossClamp);
    sum -= actual[i] ? std::log(p) : std::log1p(-p);
  }
  return sum / static_cast<double>(predicted.size());
}

MlpGradients backward(const MlpModel& model, const Matrix& batch_x,
                      std::span<const std::uint8_t> batch_y) {
  if (batch_x.rows() == 0) throw std::invalid_argument("backward: empty batch");
  if (batch_y.size() != batch_x.rows()) throw std::invalid_argument("backward: label count mismatch");
  const auto acts = forward_all(model, batch_x);
  const std::size_t batch = batch_x.rows();

  MlpGradients grads{zeros_like(model.layers)};

  // d(mean BCE)/d(output pre-activation) = (p - y) / B.
  Matrix delta(batch, 1);
  for (std::size_t r = 0; r < batch; ++r) {
    delta(r, 0) = (acts.back()(r, 0) - static_cast<double>(batch_y[r])) / static_cast<double>(batch);
  }

  for (std::size_t l = model.layers.size(); l-- > 0;) {
    const auto& layer = model.layers[l];
    auto& g = grads.layers[l];
    const Matrix& a_in = acts[l];
    for (std::size_t r = 0; r < batch; ++r) {
      const auto in = a_in.row(r);
      const auto d = delta.row(r);
      for (std::size_t o = 0; o < layer.out; ++o) {
        if (d[o] == 0.0) continue;
        double* gw = g.weights.data() + o * layer.in;
        for (std::size_t i = 0; i < layer.in; ++i) gw[i] += d[o] * in[i];
        g.biases[o] += d[o];
      }
    }
    if (l == 0) break;
    // Propagate through W and the ReLU of the layer below.
    Matrix prev(batch, layer.in);
    for (std::size_t r = 0; r < batch; ++r) {
      const auto d = delta.row(r);
      const auto a = a_in.row(r);
      auto p = prev.row(r);
      for (std::size_t o = 0; o < layer.out; ++o) {
        if (d[o] == 0.0) continue;
        const double* w = layer.weights.data() + o * layer.in;
        for (std::size_t i = 0; i < layer.in; ++i) p[i] += d[o] * w[i];
      }
      for (std::size_t i = 0; i < layer.in; ++i) {
        if (!(a[i] > 0.0)) p[i] = 0.0;
      }
    }
    delta = std::move(prev);
  }
  return grads;
}

AdamState make_adam(const MlpModel& model, double learning_rate) {
  AdamState state;
  state.first_moment = zeros_like(model.layers);
  state.second_moment = zeros_like(model.layers);
  state.learning_rate = learning_rate;
  return state;
}

void adam_step(AdamState& state, MlpModel& model, const MlpGradients& grads) {
  const auto n_layers = model.layers.size();
  if (grads.layers.size() != n_layers || state.first_moment.size() != n_layers ||
      state.second_moment.size() != n_layers) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);

  auto update = [&](std::vector<double>& params, const std::vector<double>& g, std::vector<double>& m,
                    std::vector<double>& v) {
    if (params.size() != g.size() || m.size() != g.size() || v.size() != g.size()) {
      throw std::invalid_argument("adam_step: shape mismatch");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      params[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  };
  for (std::size_t l = 0; l < n_layers; ++l) {
    update(model.layers[l].weights, grads.layers[l].weights, state.first_moment[l].weights,
           state.second_moment[l].weights);
    update(model.layers[l].biases, grads.layers[l].biases, state.first_moment[l].biases,
           state.second_moment[l].biases);
  }
}

double binary_accuracy(std::span<const double> predicted, std::span<const std::uint8_t> actual) {
  if (predicted.size() != actual.size()) throw std::invalid_argument("binary_accuracy: length mismatch");
  if (predicted.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if ((predicted[i] > 0.5) == (actual[i] != 0)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(predicted.size());
}

TrainResult train(MlpModel model, const LabeledSplit& split, const TrainConfig& config) {
  if (config.epochs == 0 || config.batch_size == 0) {
    throw std::invalid_argument("train: epochs and batch_size must be positive");
  }
  const std::size_t n = split.train_x.rows();
  const auto n_pos = std::count(split.train_y.begin(), split.train_y.end(), std::uint8_t{1});
  if (n == 0 || n_pos == 0 || static_cast<std::size_t>(n_pos) == n) {
    throw std::invalid_argument("train: training data holds a single class");
  }
  if (split.train_x.cols() != model.n_inputs()) throw std::invalid_argument("train: width mismatch");

  Rng rng(config.seed);
  AdamState adam = make_adam(model, config.learning_rate);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  const std::size_t width = split.train_x.cols();
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle_each_epoch) rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t begin = 0; begin < n; begin += config.batch_size) {
      const std::size_t end = std::min(n, begin + config.batch_size);
      Matrix batch_x(end - begin, width);
      Labels batch_y(end - begin);
      for (std::size_t k = begin; k < end; ++k) {
        const auto src = split.train_x.row(order[k]);
        std::copy(src.begin(), src.end(), batch_x.row(k - begin).begin());
        batch_y[k - begin] = split.train_y[order[k]];
      }
      adam_step(adam, model, backward(model, batch_x, batch_y));
    }
    if (split.test_x.rows() > 0) {
      const auto predicted = forward_batch(model, split.test_x);
      result.history.push_back(
          {epoch + 1, bce_loss(predicted, split.test_y), binary_accuracy(predicted, split.test_y)});
    }
  }
  result.model = std::move(model);
  return result;
}

void write_history_csv(std::span<const EpochStats> history, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "epoch,loss,accuracy\n";
  char buf[96];
  for (const auto& h : history) {
    std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g\n", h.epoch, h.loss, h.accuracy);
    out << buf;
  }
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace netanom
