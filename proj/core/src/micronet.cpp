#include "heston_deepcal/micronet.hpp"

#include <cmath>
#include <numeric>

#include "heston_deepcal/error.hpp"
#include "heston_deepcal/random.hpp"

namespace hdc::nn {

Activation parse_activation(const std::string& name) {
  if (name == "identity" || name == "linear") return Activation::Identity;
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  if (name == "sigmoid") return Activation::Sigmoid;
  fail(ErrorCode::InvalidConfig, "unknown activation '" + name + "' (identity|tanh|relu|sigmoid)");
}

std::string to_string(Activation activation) {
  switch (activation) {
    case Activation::Identity: return "identity";
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
    case Activation::Sigmoid: return "sigmoid";
  }
  return "identity";
}

Matrix activate(Activation activation, const Matrix& z) {
  switch (activation) {
    case Activation::Identity: return z;
    case Activation::Tanh: return z.array().tanh().matrix();
    case Activation::Relu: return z.array().max(0.0).matrix();
    case Activation::Sigmoid: return (1.0 / (1.0 + (-z.array()).exp())).matrix();
  }
  return z;
}

Matrix activate_derivative(Activation activation, const Matrix& z) {
  switch (activation) {
    case Activation::Identity: return Matrix::Ones(z.rows(), z.cols());
    case Activation::Tanh: return (1.0 - z.array().tanh().square()).matrix();
    case Activation::Relu: return (z.array() > 0.0).cast<double>().matrix();
    case Activation::Sigmoid: {
      const Eigen::ArrayXXd s = 1.0 / (1.0 + (-z.array()).exp());
      return (s * (1.0 - s)).matrix();
    }
  }
  return Matrix::Ones(z.rows(), z.cols());
}

std::size_t Network::input_dim() const { return layers.empty() ? 0 : layers.front().n_in(); }
std::size_t Network::output_dim() const { return layers.empty() ? 0 : layers.back().n_out(); }

std::size_t Network::parameter_count() const {
  std::size_t count = 0;
  for (const auto& layer : layers) count += static_cast<std::size_t>(layer.weights.size() + layer.bias.size());
  return count;
}

void Network::validate() const {
  if (layers.empty()) fail(ErrorCode::ShapeMismatch, "network has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.weights.rows() == 0 || layer.weights.cols() == 0)
      fail(ErrorCode::ShapeMismatch, "layer " + std::to_string(l) + " has an empty weight matrix");
    if (layer.bias.size() != layer.weights.cols())
      fail(ErrorCode::ShapeMismatch, "layer " + std::to_string(l) + " bias length differs from n_out");
    if (l > 0 && layer.n_in() != layers[l - 1].n_out())
      fail(ErrorCode::ShapeMismatch, "layer " + std::to_string(l) + " input width differs from previous output");
    if (!layer.weights.allFinite() || !layer.bias.allFinite())
      fail(ErrorCode::ShapeMismatch, "layer " + std::to_string(l) + " has non-finite parameters");
  }
}

void Dataset::validate() const {
  if (inputs.rows() < 1) fail(ErrorCode::EmptyInput, "dataset is empty");
  if (inputs.rows() != targets.rows())
    fail(ErrorCode::LengthMismatch, "dataset inputs and targets differ in row count");
}

DenseLayer kaiming_init(std::size_t n_in, std::size_t n_out, std::uint64_t seed, std::uint64_t stream,
                        Activation activation_in) {
  if (n_in == 0) fail(ErrorCode::ZeroFanIn, "Kaiming initialization needs n_in >= 1");
  if (n_out == 0) fail(ErrorCode::ShapeMismatch, "layer needs n_out >= 1");
  const double std_dev = std::sqrt(2.0 / static_cast<double>(n_in));
  CounterRng rng(seed, stream);
  DenseLayer layer;
  layer.weights.resize(static_cast<Eigen::Index>(n_in), static_cast<Eigen::Index>(n_out));
  for (Eigen::Index i = 0; i < layer.weights.size(); ++i) layer.weights.data()[i] = std_dev * rng.normal();
  layer.bias = RowVector::Zero(static_cast<Eigen::Index>(n_out));
  layer.activation_in = activation_in;
  return layer;
}

Network make_network(const std::vector<std::size_t>& dims, const std::vector<Activation>& activations,
                     std::uint64_t seed) {
  if (dims.size() < 2) fail(ErrorCode::ShapeMismatch, "network needs at least input and output widths");
  if (activations.size() != dims.size() - 1)
    fail(ErrorCode::ShapeMismatch, "need one activation per layer");
  Network net;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l)
    net.layers.push_back(kaiming_init(dims[l], dims[l + 1], seed, l, activations[l]));
  return net;
}

ForwardCache forward(const Network& net, const Matrix& inputs) {
  net.validate();
  if (static_cast<std::size_t>(inputs.cols()) != net.input_dim())
    fail(ErrorCode::ShapeMismatch, "input has " + std::to_string(inputs.cols()) + " columns, network expects " +
                                       std::to_string(net.input_dim()));
  ForwardCache cache;
  cache.z.reserve(net.layers.size() + 1);
  cache.z.push_back(inputs);
  for (const auto& layer : net.layers) {
    Matrix next = activate(layer.activation_in, cache.z.back()) * layer.weights;
    next.rowwise() += layer.bias;
    cache.z.push_back(std::move(next));
  }
  return cache;
}

Matrix predict(const Network& net, const Matrix& inputs) { return forward(net, inputs).output(); }

double mse_loss(const Matrix& pred, const Matrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    fail(ErrorCode::LengthMismatch, "prediction and target shapes differ");
  if (pred.rows() == 0) fail(ErrorCode::EmptyInput, "loss of an empty batch");
  return (target - pred).squaredNorm() / static_cast<double>(pred.rows());
}

double mse_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) fail(ErrorCode::LengthMismatch, "prediction and target lengths differ");
  if (pred.empty()) fail(ErrorCode::EmptyInput, "loss of an empty batch");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += (target[i] - pred[i]) * (target[i] - pred[i]);
  return sum / static_cast<double>(pred.size());
}

Gradients backward(const Network& net, const ForwardCache& cache, const Matrix& target) {
  const std::size_t depth = net.layers.size();
  if (cache.z.size() != depth + 1) fail(ErrorCode::StaleCache, "cache depth does not match the network");
  for (std::size_t l = 0; l < depth; ++l) {
    if (static_cast<std::size_t>(cache.z[l].cols()) != net.layers[l].n_in() ||
        static_cast<std::size_t>(cache.z[l + 1].cols()) != net.layers[l].n_out())
      fail(ErrorCode::StaleCache, "cache widths do not match layer " + std::to_string(l));
  }
  const Matrix& output = cache.output();
  if (target.rows() != output.rows() || target.cols() != output.cols())
    fail(ErrorCode::LengthMismatch, "target shape differs from network output");

  const double m = static_cast<double>(output.rows());
  Gradients grads;
  grads.d_weights.resize(depth);
  grads.d_bias.resize(depth);
  Matrix delta = 2.0 / m * (output - target);  // dLoss / dz_L
  for (std::size_t l = depth; l-- > 0;) {
    const auto& layer = net.layers[l];
    const Matrix& z_in = cache.z[l];
    const Matrix a = activate(layer.activation_in, z_in);
    grads.d_weights[l] = a.transpose() * delta;
    grads.d_bias[l] = delta.colwise().sum();
    if (l > 0) {
      Matrix upstream = delta * layer.weights.transpose();
      delta = upstream.cwiseProduct(activate_derivative(layer.activation_in, z_in));
    }
  }
  return grads;
}

std::vector<double> flatten_parameters(const Network& net) {
  std::vector<double> flat;
  flat.reserve(net.parameter_count());
  for (const auto& layer : net.layers) {
    flat.insert(flat.end(), layer.weights.data(), layer.weights.data() + layer.weights.size());
    flat.insert(flat.end(), layer.bias.data(), layer.bias.data() + layer.bias.size());
  }
  return flat;
}

void assign_parameters(Network& net, std::span<const double> flat) {
  if (flat.size() != net.parameter_count())
    fail(ErrorCode::ShapeMismatch, "parameter vector length differs from the network");
  std::size_t offset = 0;
  for (auto& layer : net.layers) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), layer.weights.size(), layer.weights.data());
    offset += static_cast<std::size_t>(layer.weights.size());
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), layer.bias.size(), layer.bias.data());
    offset += static_cast<std::size_t>(layer.bias.size());
  }
}

std::vector<double> flatten_gradients(const Gradients& grads) {
  std::vector<double> flat;
  for (std::size_t l = 0; l < grads.d_weights.size(); ++l) {
    const auto& dw = grads.d_weights[l];
    const auto& db = grads.d_bias[l];
    flat.insert(flat.end(), dw.data(), dw.data() + dw.size());
    flat.insert(flat.end(), db.data(), db.data() + db.size());
  }
  return flat;
}

void sgd_update(std::span<double> params, std::span<const double> grads, double lr) {
  if (params.size() != grads.size()) fail(ErrorCode::ShapeMismatch, "SGD parameter/gradient lengths differ");
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grads[i];
}

void sgd_step(Network& net, const Gradients& grads, double lr) {
  auto params = flatten_parameters(net);
  sgd_update(params, flatten_gradients(grads), lr);
  assign_parameters(net, params);
}

void adam_update(std::span<double> params, std::span<const double> grads, AdamState& state,
                 const AdamConfig& cfg) {
  if (params.size() != grads.size()) fail(ErrorCode::ShapeMismatch, "Adam parameter/gradient lengths differ");
  if (state.m1.empty() && state.m2.empty() && state.t == 0) {
    state.m1.assign(params.size(), 0.0);
    state.m2.assign(params.size(), 0.0);
  }
  if (state.m1.size() != params.size() || state.m2.size() != params.size())
    fail(ErrorCode::ShapeMismatch, "Adam state does not match the parameter count");

  ++state.t;
  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m1[i] = cfg.beta1 * state.m1[i] + (1.0 - cfg.beta1) * g;
    state.m2[i] = cfg.beta2 * state.m2[i] + (1.0 - cfg.beta2) * g * g;
    const double m1_hat = state.m1[i] / correction1;
    const double m2_hat = state.m2[i] / correction2;
    params[i] -= cfg.lr * m1_hat / (std::sqrt(m2_hat) + cfg.epsilon);
  }
}

void adam_step(Network& net, const Gradients& grads, AdamState& state, const AdamConfig& cfg) {
  auto params = flatten_parameters(net);
  adam_update(params, flatten_gradients(grads), state, cfg);
  assign_parameters(net, params);
}

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "sgd") return OptimizerKind::Sgd;
  if (name == "adam") return OptimizerKind::Adam;
  fail(ErrorCode::InvalidConfig, "unknown optimizer '" + name + "' (sgd|adam)");
}

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::Sgd ? "sgd" : "adam"; }

void TrainConfig::validate() const {
  if (!(lr > 0.0)) fail(ErrorCode::InvalidConfig, "learning rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    fail(ErrorCode::InvalidConfig, "Adam betas must lie in [0, 1)");
  if (!(epsilon > 0.0)) fail(ErrorCode::InvalidConfig, "Adam epsilon must be > 0");
  if (batch_size == 0) fail(ErrorCode::InvalidConfig, "batch_size must be >= 1");
  if (epochs == 0) fail(ErrorCode::InvalidConfig, "epochs must be >= 1");
}

TrainResult train(Network net, const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  data.validate();
  net.validate();
  if (static_cast<std::size_t>(data.inputs.cols()) != net.input_dim() ||
      static_cast<std::size_t>(data.targets.cols()) != net.output_dim())
    fail(ErrorCode::ShapeMismatch, "dataset widths do not match the network");

  const std::size_t m = data.size();
  const AdamConfig adam{cfg.lr, cfg.beta1, cfg.beta2, cfg.epsilon};
  AdamState state;
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const bool full_batch = cfg.batch_size >= m;

  TrainResult result;
  result.loss_history.reserve(cfg.epochs);
  Matrix batch_x, batch_y;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle && !full_batch) {
      CounterRng rng(cfg.seed, epoch);
      for (std::size_t i = m - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    }
    for (std::size_t start = 0; start < m; start += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, m - start);
      const Matrix* x = &data.inputs;
      const Matrix* y = &data.targets;
      if (!full_batch) {
        batch_x.resize(static_cast<Eigen::Index>(count), data.inputs.cols());
        batch_y.resize(static_cast<Eigen::Index>(count), data.targets.cols());
        for (std::size_t r = 0; r < count; ++r) {
          const auto src = static_cast<Eigen::Index>(order[start + r]);
          batch_x.row(static_cast<Eigen::Index>(r)) = data.inputs.row(src);
          batch_y.row(static_cast<Eigen::Index>(r)) = data.targets.row(src);
        }
        x = &batch_x;
        y = &batch_y;
      }
      const auto cache = forward(net, *x);
      const auto grads = backward(net, cache, *y);
      if (cfg.optimizer == OptimizerKind::Adam)
        adam_step(net, grads, state, adam);
      else
        sgd_step(net, grads, cfg.lr);
      ++result.steps;
    }
    result.loss_history.push_back(mse_loss(predict(net, data.inputs), data.targets));
  }
  result.net = std::move(net);
  return result;
}

Scaler Scaler::fit(std::span<const double> values) {
  if (values.empty()) fail(ErrorCode::EmptyInput, "cannot fit a scaler to no data");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double std_dev = std::sqrt(var / n);
  const double scale = std::max(std::fabs(mean), 1.0);
  return {mean, std_dev > 1e-12 * scale ? std_dev : 1.0};
}

std::vector<double> ScaledNetwork::predict(const Matrix& raw_inputs) const {
  if (static_cast<std::size_t>(raw_inputs.cols()) != input_scalers.size())
    fail(ErrorCode::ShapeMismatch, "input width differs from the scaler count");
  Matrix scaled = raw_inputs;
  for (Eigen::Index c = 0; c < scaled.cols(); ++c) {
    const auto& s = input_scalers[static_cast<std::size_t>(c)];
    scaled.col(c) = ((scaled.col(c).array() - s.mean) / s.std).matrix();
  }
  const Matrix out = nn::predict(net, scaled);
  std::vector<double> result(static_cast<std::size_t>(out.rows()));
  for (Eigen::Index r = 0; r < out.rows(); ++r) result[static_cast<std::size_t>(r)] = output_scaler.inverse(out(r, 0));
  return result;
}

double ScaledNetwork::predict_one(std::span<const double> raw_input) const {
  Matrix row(1, static_cast<Eigen::Index>(raw_input.size()));
  for (std::size_t i = 0; i < raw_input.size(); ++i) row(0, static_cast<Eigen::Index>(i)) = raw_input[i];
  return predict(row).front();
}

}  // namespace hdc::nn
