#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hdc::nn {

// Row-major so a layer's n_in x n_out weights multiply from the right: z W.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::RowVectorXd;

enum class Activation { Identity, Tanh, Relu, Sigmoid };

Activation parse_activation(const std::string& name);
std::string to_string(Activation activation);

Matrix activate(Activation activation, const Matrix& z);
// Elementwise derivative at z. relu'(0) = 0.
Matrix activate_derivative(Activation activation, const Matrix& z);

// z_out = act(z_in) W + b: the activation applies to the layer INPUT, so the
// first layer normally carries Identity and the network output is affine.
struct DenseLayer {
  Matrix weights;  // n_in x n_out
  RowVector bias;  // n_out
  Activation activation_in = Activation::Identity;

  std::size_t n_in() const noexcept { return static_cast<std::size_t>(weights.rows()); }
  std::size_t n_out() const noexcept { return static_cast<std::size_t>(weights.cols()); }
};

struct Network {
  std::vector<DenseLayer> layers;

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t parameter_count() const;
  // At least one layer, chained shapes, finite entries. Throws ShapeMismatch.
  void validate() const;
};

struct Dataset {
  Matrix inputs;   // m x n
  Matrix targets;  // m x k

  std::size_t size() const noexcept { return static_cast<std::size_t>(inputs.rows()); }
  void validate() const;
};

// Weights i.i.d. normal(0, 2 / n_in); bias zero. Throws ZeroFanIn for n_in = 0.
DenseLayer kaiming_init(std::size_t n_in, std::size_t n_out, std::uint64_t seed, std::uint64_t stream = 0,
                        Activation activation_in = Activation::Identity);

// dims = {n_0, ..., n_L}; activations[l] is applied to the input of layer l.
Network make_network(const std::vector<std::size_t>& dims, const std::vector<Activation>& activations,
                     std::uint64_t seed);

// z[0] = inputs, z[l] = act_l(z[l-1]) W_l + b_l; z.back() is the output.
struct ForwardCache {
  std::vector<Matrix> z;

  const Matrix& output() const { return z.back(); }
};

ForwardCache forward(const Network& net, const Matrix& inputs);
Matrix predict(const Network& net, const Matrix& inputs);

// (1/m) ||target - pred||^2 with m the number of rows.
double mse_loss(const Matrix& pred, const Matrix& target);
double mse_loss(std::span<const double> pred, std::span<const double> target);

struct Gradients {
  std::vector<Matrix> d_weights;
  std::vector<RowVector> d_bias;
};

// Exact gradient of mse_loss(forward(net, x).output(), target) with respect to
// every weight and bias. Throws StaleCache if the cache does not match net.
Gradients backward(const Network& net, const ForwardCache& cache, const Matrix& target);

// Parameters in layer order: weights (row-major) then bias, per layer.
std::vector<double> flatten_parameters(const Network& net);
void assign_parameters(Network& net, std::span<const double> flat);
std::vector<double> flatten_gradients(const Gradients& grads);

// w <- w - lr * g
void sgd_update(std::span<double> params, std::span<const double> grads, double lr);
void sgd_step(Network& net, const Gradients& grads, double lr);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<double> m1;
  std::vector<double> m2;
  std::uint64_t t = 0;
};

// t <- t + 1; m1 <- b1 m1 + (1-b1) g; m2 <- b2 m2 + (1-b2) g^2;
// x <- x - lr * m1_hat / (sqrt(m2_hat) + eps), hats bias-corrected with t.
// An empty state is sized on first use.
void adam_update(std::span<double> params, std::span<const double> grads, AdamState& state,
                 const AdamConfig& cfg);
void adam_step(Network& net, const Gradients& grads, AdamState& state, const AdamConfig& cfg);

enum class OptimizerKind { Sgd, Adam };

OptimizerKind parse_optimizer(const std::string& name);
std::string to_string(OptimizerKind kind);

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::Adam;
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch_size = 32;
  std::size_t epochs = 100;
  std::uint64_t seed = 1;
  bool shuffle = true;

  void validate() const;
};

struct TrainResult {
  Network net;
  std::vector<double> loss_history;  // full-dataset MSE after each epoch
  std::size_t steps = 0;
};

// One forward/backward/update per mini-batch; the last batch of an epoch may
// be short. Order is reshuffled per epoch from (seed, epoch) when enabled.
TrainResult train(Network net, const Dataset& data, const TrainConfig& cfg);

// z-score transform for one feature.
struct Scaler {
  double mean = 0.0;
  double std = 1.0;

  double transform(double x) const noexcept { return (x - mean) / std; }
  double inverse(double z) const noexcept { return z * std + mean; }

  // Population statistics; a (near-)constant sample gets std = 1.
  static Scaler fit(std::span<const double> values);
  friend bool operator==(const Scaler&, const Scaler&) = default;
};

// Network plus the frozen scalers that map raw features/targets to and from
// the network's standardized space. Single-output.
struct ScaledNetwork {
  Network net;
  std::vector<Scaler> input_scalers;
  Scaler output_scaler;

  // raw m x n inputs -> raw m outputs
  std::vector<double> predict(const Matrix& raw_inputs) const;
  double predict_one(std::span<const double> raw_input) const;
};

}  // namespace hdc::nn
