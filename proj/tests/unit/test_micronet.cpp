#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include <heston_deepcal/error.hpp>
#include <heston_deepcal/micronet.hpp>
#include <heston_deepcal/random.hpp>

#include "oracles.hpp"

using namespace hdc;
using namespace hdc::nn;

namespace {

Matrix rows(std::initializer_list<std::initializer_list<double>> values) {
  Matrix m(values.size(), values.begin()->size());
  Eigen::Index i = 0;
  for (const auto& r : values) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

// Inputs kept clear of relu kinks: every pre-activation at least 1e-6 from 0.
Matrix random_inputs(std::size_t m, std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  Matrix x(m, n);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = 2.0 * rng.uniform() - 1.0;
  return x;
}

bool near_kink(const Network& net, const Matrix& x) {
  const auto cache = forward(net, x);
  for (std::size_t l = 0; l < net.layers.size(); ++l)
    if (net.layers[l].activation_in == Activation::Relu && (cache.z[l].array().abs() < 1e-6).any()) return true;
  return false;
}

}  // namespace

TEST(Kaiming, TargetStd) {
  const auto layer = kaiming_init(8, 20000, 3);
  const double n = static_cast<double>(layer.weights.size());
  const double mean = layer.weights.sum() / n;
  const double var = (layer.weights.array() - mean).square().sum() / n;
  EXPECT_NEAR(std::sqrt(var), 0.5, 0.01);
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_TRUE(layer.bias.isZero());
}

TEST(Kaiming, SampleVarianceForTwoInputs) {
  const auto layer = kaiming_init(2, 50000, 5);
  const double n = static_cast<double>(layer.weights.size());
  const double mean = layer.weights.sum() / n;
  const double var = (layer.weights.array() - mean).square().sum() / (n - 1.0);
  EXPECT_NEAR(var, 1.0, 0.03);
}

TEST(Kaiming, ZeroFanIn) {
  try {
    kaiming_init(0, 3, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroFanIn);
  }
}

TEST(Kaiming, Deterministic) {
  EXPECT_EQ(kaiming_init(4, 4, 9).weights, kaiming_init(4, 4, 9).weights);
  EXPECT_NE(kaiming_init(4, 4, 9).weights, kaiming_init(4, 4, 10).weights);
}

TEST(Forward, ZeroNetworkOutputsZero) {
  auto net = make_network({3, 5, 2}, {Activation::Identity, Activation::Tanh}, 1);
  for (auto& l : net.layers) {
    l.weights.setZero();
    l.bias.setZero();
  }
  EXPECT_TRUE(predict(net, random_inputs(4, 3, 2)).isZero());
}

TEST(Forward, SingleAffineLayer) {
  Network net{{DenseLayer{rows({{2.0}}), RowVector::Constant(1, 3.0), Activation::Identity}}};
  EXPECT_EQ(predict(net, rows({{1.0}}))(0, 0), 5.0);
}

TEST(Forward, PanShapeByHand) {
  const auto net = make_network({1, 8, 8, 1}, {Activation::Identity, Activation::Tanh, Activation::Relu}, 17);
  const double x = 0.7;
  std::vector<double> h1(8), h2(8);
  for (int j = 0; j < 8; ++j) h1[j] = x * net.layers[0].weights(0, j) + net.layers[0].bias(j);
  for (int j = 0; j < 8; ++j) {
    double s = net.layers[1].bias(j);
    for (int i = 0; i < 8; ++i) s += std::tanh(h1[i]) * net.layers[1].weights(i, j);
    h2[j] = s;
  }
  double y = net.layers[2].bias(0);
  for (int i = 0; i < 8; ++i) y += std::max(h2[i], 0.0) * net.layers[2].weights(i, 0);
  EXPECT_NEAR(predict(net, rows({{x}}))(0, 0), y, 1e-12);
}

TEST(Forward, IdentityNetworkCollapsesToAffineMap) {
  const auto net = make_network({3, 4, 5, 2}, {Activation::Identity, Activation::Identity, Activation::Identity}, 4);
  Matrix w = net.layers[0].weights;
  RowVector b = net.layers[0].bias;
  for (std::size_t l = 1; l < net.layers.size(); ++l) {
    b = b * net.layers[l].weights + net.layers[l].bias;
    w = w * net.layers[l].weights;
  }
  const Matrix x = random_inputs(6, 3, 8);
  const Matrix collapsed = (x * w).rowwise() + b;
  EXPECT_LT((predict(net, x) - collapsed).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Forward, ShapeMismatch) {
  const auto net = make_network({3, 2, 1}, {Activation::Identity, Activation::Relu}, 1);
  try {
    predict(net, Matrix::Zero(2, 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
  }
}

TEST(Activations, DerivativesAndNames) {
  const Matrix z = rows({{-1.0, 0.0, 2.0}});
  EXPECT_EQ(activate_derivative(Activation::Relu, z), rows({{0.0, 0.0, 1.0}}));
  EXPECT_NEAR(activate_derivative(Activation::Sigmoid, z)(0, 1), 0.25, 1e-15);
  EXPECT_NEAR(activate_derivative(Activation::Tanh, z)(0, 1), 1.0, 1e-15);
  for (auto a : {Activation::Identity, Activation::Tanh, Activation::Relu, Activation::Sigmoid})
    EXPECT_EQ(parse_activation(to_string(a)), a);
  EXPECT_THROW(parse_activation("softplus"), Error);
}

TEST(Loss, Examples) {
  const std::vector<double> a{1.0, 2.0}, b{3.0, 2.0};
  EXPECT_EQ(mse_loss(a, a), 0.0);
  EXPECT_EQ(mse_loss(a, b), 2.0);
  const std::vector<double> c{4.0, 5.0, 6.0}, d{1.5, 2.5, 3.5};
  EXPECT_DOUBLE_EQ(mse_loss(c, d), 6.25);
  const std::vector<double> e{1.0};
  try {
    mse_loss(a, e);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::LengthMismatch);
  }
}

TEST(Loss, NonNegativeAndZeroOnlyAtEquality) {
  CounterRng rng(3, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p(5), t(5);
    for (int i = 0; i < 5; ++i) {
      p[i] = rng.normal();
      t[i] = rng.normal();
    }
    EXPECT_GT(mse_loss(p, t), 0.0);
  }
}

TEST(Backward, TwoWeightNeuron) {
  // C = 2 (w1 x1 + w2 x2)^2 is twice the MSE of the one-neuron net against 0.
  const double w1 = 0.3, w2 = -1.1, x1 = 1.7, x2 = 0.4;
  Network net{{DenseLayer{rows({{w1}, {w2}}), RowVector::Zero(1), Activation::Identity}}};
  const Matrix x = rows({{x1, x2}});
  const auto g = backward(net, forward(net, x), Matrix::Zero(1, 1));
  const double z = w1 * x1 + w2 * x2;
  EXPECT_NEAR(2.0 * g.d_weights[0](0, 0), 4.0 * x1 * z, 1e-14);
  EXPECT_NEAR(2.0 * g.d_weights[0](1, 0), 4.0 * x2 * z, 1e-14);
}

TEST(Backward, ZeroResidualZeroGradient) {
  const auto net = make_network({2, 4, 1}, {Activation::Identity, Activation::Tanh}, 6);
  const Matrix x = random_inputs(5, 2, 1);
  const auto cache = forward(net, x);
  for (double g : flatten_gradients(backward(net, cache, cache.output()))) EXPECT_EQ(g, 0.0);
}

TEST(Backward, StaleCache) {
  const auto a = make_network({2, 4, 1}, {Activation::Identity, Activation::Tanh}, 6);
  const auto b = make_network({2, 3, 1}, {Activation::Identity, Activation::Tanh}, 6);
  const Matrix x = random_inputs(3, 2, 1);
  try {
    backward(b, forward(a, x), Matrix::Zero(3, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StaleCache);
  }
}

TEST(Backward, PanShapeFiniteDifferences) {
  const auto net = make_network({1, 8, 8, 1}, {Activation::Identity, Activation::Tanh, Activation::Relu}, 23);
  const Matrix x = random_inputs(16, 1, 4);
  ASSERT_FALSE(near_kink(net, x));
  const Matrix y = random_inputs(16, 1, 5);
  EXPECT_LT(oracle::gradient_check(net, x, y, 1e-6), 1e-5);
}

TEST(Backward, EveryActivationCombination) {
  const std::vector<Activation> acts{Activation::Identity, Activation::Tanh, Activation::Relu, Activation::Sigmoid};
  std::uint64_t seed = 100;
  for (auto a1 : acts)
    for (auto a2 : acts) {
      Network net;
      Matrix x;
      do {
        net = make_network({3, 6, 5, 2}, {Activation::Identity, a1, a2}, ++seed);
        x = random_inputs(8, 3, seed);
      } while (near_kink(net, x));
      const Matrix y = random_inputs(8, 2, seed + 1000);
      EXPECT_LT(oracle::gradient_check(net, x, y, 1e-6), 1e-5) << to_string(a1) << "/" << to_string(a2);
    }
}

TEST(Sgd, Examples) {
  std::vector<double> w{1.0, -2.0};
  const std::vector<double> zero{0.0, 0.0};
  sgd_update(w, zero, 0.1);
  EXPECT_EQ(w, (std::vector<double>{1.0, -2.0}));

  std::vector<double> one{1.0};
  const std::vector<double> g{2.0};
  sgd_update(one, g, 0.1);
  EXPECT_DOUBLE_EQ(one[0], 0.8);

  // gradient of w^2 / 2 is w
  std::vector<double> q{1.0};
  for (int i = 0; i < 2; ++i) {
    const std::vector<double> grad{q[0]};
    sgd_update(q, grad, 0.5);
  }
  EXPECT_EQ(q[0], 0.25);
}

TEST(Adam, FirstStep) {
  const AdamConfig cfg{0.01, 0.9, 0.999, 1e-8};
  for (double dx : {3.0, -0.2, 1e-3}) {
    std::vector<double> x{0.0};
    const std::vector<double> g{dx};
    AdamState st;
    adam_update(x, g, st, cfg);
    const double expected = cfg.lr * std::abs(dx) / (std::abs(dx) + cfg.epsilon);
    EXPECT_NEAR(std::abs(x[0]), expected, 1e-15);
    EXPECT_EQ(st.t, 1u);
  }
}

TEST(Adam, ZeroGradient) {
  std::vector<double> x{1.5, -2.0};
  const std::vector<double> g{0.0, 0.0};
  AdamState st;
  adam_update(x, g, st, {});
  EXPECT_EQ(x, (std::vector<double>{1.5, -2.0}));
  EXPECT_EQ(st.t, 1u);
}

TEST(Adam, ThreeUnrolledSteps) {
  const AdamConfig cfg{0.1, 0.9, 0.999, 1e-8};
  std::vector<double> x{0.0};
  const std::vector<double> g{1.0};
  AdamState st;
  double ref = 0.0, m1 = 0.0, m2 = 0.0;
  for (int t = 1; t <= 3; ++t) {
    adam_update(x, g, st, cfg);
    m1 = 0.9 * m1 + 0.1;
    m2 = 0.999 * m2 + 0.001;
    const double m1_hat = m1 / (1.0 - std::pow(0.9, t));
    const double m2_hat = m2 / (1.0 - std::pow(0.999, t));
    ref -= 0.1 * m1_hat / (std::sqrt(m2_hat) + 1e-8);
  }
  EXPECT_NEAR(x[0], ref, 1e-12);
  EXPECT_EQ(st.t, 3u);
}

TEST(Adam, SecondMomentStaysNonNegative) {
  CounterRng rng(1, 2);
  std::vector<double> x(10, 0.0);
  AdamState st;
  for (int step = 0; step < 50; ++step) {
    std::vector<double> g(10);
    for (auto& v : g) v = rng.normal();
    adam_update(x, g, st, {});
    ASSERT_EQ(st.m2.size(), x.size());
    for (double v : st.m2) EXPECT_GE(v, 0.0);
  }
}

TEST(Parameters, FlattenRoundTrip) {
  auto net = make_network({3, 4, 2}, {Activation::Identity, Activation::Sigmoid}, 2);
  const auto flat = flatten_parameters(net);
  EXPECT_EQ(flat.size(), net.parameter_count());
  EXPECT_EQ(flat.size(), 3u * 4 + 4 + 4 * 2 + 2);
  std::vector<double> bumped = flat;
  for (auto& v : bumped) v += 1.0;
  assign_parameters(net, bumped);
  EXPECT_EQ(flatten_parameters(net), bumped);
}

TEST(Train, ConstantTargetConverges) {
  Dataset data{random_inputs(20, 2, 3), Matrix::Constant(20, 1, 4.0)};
  TrainConfig cfg;
  cfg.lr = 0.1;
  cfg.epochs = 500;
  cfg.batch_size = 20;
  const auto r = train(make_network({2, 1}, {Activation::Identity}, 1), data, cfg);
  ASSERT_EQ(r.loss_history.size(), 500u);
  EXPECT_LT(r.loss_history.back(), 1e-6);
}

TEST(Train, FullBatchIsOneStepPerEpoch) {
  Dataset data{random_inputs(10, 2, 3), random_inputs(10, 1, 4)};
  TrainConfig cfg;
  cfg.epochs = 7;
  cfg.batch_size = 64;
  EXPECT_EQ(train(make_network({2, 3, 1}, {Activation::Identity, Activation::Tanh}, 1), data, cfg).steps, 7u);
  cfg.batch_size = 3;
  EXPECT_EQ(train(make_network({2, 3, 1}, {Activation::Identity, Activation::Tanh}, 1), data, cfg).steps, 28u);
}

TEST(Train, Deterministic) {
  Dataset data{random_inputs(50, 2, 3), random_inputs(50, 1, 4)};
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.batch_size = 8;
  const auto net = make_network({2, 6, 1}, {Activation::Identity, Activation::Relu}, 1);
  const auto a = train(net, data, cfg);
  const auto b = train(net, data, cfg);
  EXPECT_EQ(a.loss_history, b.loss_history);
  cfg.seed = 2;
  EXPECT_NE(a.loss_history, train(net, data, cfg).loss_history);
}

TEST(Train, SgdDescends) {
  Dataset data{random_inputs(30, 1, 3), Matrix::Zero(30, 1)};
  data.targets = 2.0 * data.inputs.array() + 1.0;
  TrainConfig cfg;
  cfg.optimizer = OptimizerKind::Sgd;
  cfg.lr = 0.1;
  cfg.epochs = 300;
  cfg.batch_size = 30;
  const auto r = train(make_network({1, 1}, {Activation::Identity}, 1), data, cfg);
  for (std::size_t i = 1; i < r.loss_history.size(); ++i) EXPECT_LE(r.loss_history[i], r.loss_history[i - 1]);
  EXPECT_NEAR(r.net.layers[0].weights(0, 0), 2.0, 1e-3);
  EXPECT_NEAR(r.net.layers[0].bias(0), 1.0, 1e-3);
}

TEST(Train, ConfigValidation) {
  TrainConfig cfg;
  cfg.lr = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.beta1 = 1.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Scaler, FitAndInverse) {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const auto s = Scaler::fit(v);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.std, std::sqrt(1.25));
  EXPECT_DOUBLE_EQ(s.inverse(s.transform(3.7)), 3.7);
  const std::vector<double> flat{5.0, 5.0, 5.0};
  EXPECT_EQ(Scaler::fit(flat).std, 1.0);
}
