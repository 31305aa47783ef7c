#include <doctest.h>

#include <cmath>

#include "soc/neural.hpp"
#include "soc/rng.hpp"
#include "test_support.hpp"

using namespace soc;

namespace {

MlpSpec random_spec(Engine& rng) {
  std::uniform_int_distribution<int> width(1, 6), depth(1, 3);
  MlpSpec spec;
  const int hidden = depth(rng);
  for (int l = 0; l <= hidden + 1; ++l) spec.layer_dims.push_back(width(rng));
  return spec;
}

Mlp<double> random_net(const MlpSpec& spec, Engine& rng) {
  Mlp<double> net(spec);
  std::normal_distribution<double> normal(0.0, 0.8);
  for (Eigen::Index i = 0; i < net.num_params(); ++i) net.params()(i) = normal(rng);
  return net;
}

}  // namespace

TEST_CASE("parameter layout") {
  MlpSpec spec{{2, 3, 1}};
  CHECK(spec.num_params() == 3 * 3 + 1 * 4);
  Mlp<double> net(spec);
  for (Eigen::Index i = 0; i < net.num_params(); ++i) net.params()(i) = static_cast<double>(i);
  CHECK(net.weights(0)(0, 0) == 0);
  CHECK(net.weights(0)(2, 0) == 2);
  CHECK(net.weights(0)(0, 1) == 3);
  CHECK(net.bias(0)(0) == 6);
  CHECK(net.weights(1)(0, 2) == 11);
  CHECK(net.bias(1)(0) == 12);
  CHECK_THROWS_AS(Mlp<double>(MlpSpec{{1}}), std::invalid_argument);
  CHECK_THROWS_AS(Mlp<double>(MlpSpec{{1, 0, 1}}), std::invalid_argument);
}

TEST_CASE("tanh through exp") {
  Eigen::ArrayXd z(7);
  z << -800, -20, -1, 0, 0.3, 20, 800;
  Eigen::ArrayXd t = z;
  tanh_inplace(t);
  for (Eigen::Index i = 0; i < z.size(); ++i) CHECK(t(i) == doctest::Approx(std::tanh(z(i))).epsilon(1e-15));
}

TEST_CASE("forward examples") {
  Mlp<double> lin(MlpSpec{{2, 3}});
  lin.weights(0) << 1, 2, 3, 4, 5, 6;
  lin.bias(0) << -1, 0, 1;
  Eigen::MatrixXd x(2, 1);
  x << 0.5, -2;
  CHECK((lin.forward(x) - (lin.weights(0) * x + lin.bias(0))).norm() < 1e-15);

  Mlp<double> constant(MlpSpec{{1, 4, 1}});
  constant.bias(1)(0) = 0.37;
  for (double s : {-3.0, 0.0, 9.0}) CHECK(constant(s) == 0.37);

  Engine rng = make_stream(1, StreamTag::kInit);
  const auto net = random_net(MlpSpec{{3, 5, 4, 2}}, rng);
  Eigen::MatrixXd batch = Eigen::MatrixXd::Random(3, 9);
  const Eigen::MatrixXd out = net.forward(batch);
  for (Eigen::Index j = 0; j < 9; ++j) CHECK((net.forward(batch.col(j)) - out.col(j)).norm() < 1e-14);
  CHECK((net.record(batch).outputs - out).norm() == 0.0);

  // Hidden activations at x = 0 are tanh of the bias.
  Mlp<double> h(MlpSpec{{1, 2, 1}});
  h.weights(0) << 3, -7;
  h.bias(0) << 0.2, -0.4;
  h.weights(1) << 1, 1;
  CHECK(h(0.0) == doctest::Approx(std::tanh(0.2) + std::tanh(-0.4)));

  CHECK_THROWS_AS(net.forward(Eigen::MatrixXd::Zero(2, 1)), std::invalid_argument);
}

TEST_CASE("backward matches finite differences on random nets") {
  Engine rng = make_stream(2, StreamTag::kInit);
  double worst_param = 0, worst_input = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const MlpSpec spec = random_spec(rng);
    const Mlp<double> net = random_net(spec, rng);
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(spec.input_dim(), 3);
    const Eigen::MatrixXd up = Eigen::MatrixXd::Random(spec.output_dim(), 3);
    const auto grads = net.backward(x, up);

    auto loss_params = [&](const Eigen::VectorXd& p) {
      return (up.array() * Mlp<double>(spec, p).forward(x).array()).sum();
    };
    worst_param = std::max(worst_param,
                           testing::relative_error(grads.params, testing::central_difference(loss_params, net.params(), 1e-5)));

    const Eigen::Map<const Eigen::VectorXd> flat(x.data(), x.size());
    auto loss_inputs = [&](const Eigen::VectorXd& v) {
      const Eigen::Map<const Eigen::MatrixXd> xi(v.data(), x.rows(), x.cols());
      return (up.array() * net.forward(xi).array()).sum();
    };
    const Eigen::Map<const Eigen::VectorXd> gin(grads.inputs.data(), grads.inputs.size());
    worst_input = std::max(worst_input, testing::relative_error(gin, testing::central_difference(loss_inputs, flat, 1e-5)));
  }
  MESSAGE("worst relative errors " << worst_param << " " << worst_input);
  CHECK(worst_param < 1e-4);
  CHECK(worst_input < 1e-4);
}

TEST_CASE("backward special cases") {
  Mlp<double> lin(MlpSpec{{2, 3}});
  lin.weights(0) << 1, 2, 3, 4, 5, 6;
  Eigen::MatrixXd x(2, 1), up(3, 1);
  x << 0.1, 0.2;
  up << 1, -1, 2;
  CHECK((lin.backward(x, up).inputs - lin.weights(0).transpose() * up).norm() < 1e-15);

  Engine rng = make_stream(3, StreamTag::kInit);
  const auto net = random_net(MlpSpec{{1, 8, 8, 1}}, rng);
  const auto zero = net.backward(Eigen::MatrixXd::Random(1, 4), Eigen::MatrixXd::Zero(1, 4));
  CHECK(zero.params.cwiseAbs().maxCoeff() == 0.0);
  CHECK(zero.inputs.cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(net.backward(Eigen::MatrixXd::Zero(1, 4), Eigen::MatrixXd::Zero(1, 3)), std::invalid_argument);
}

TEST_CASE("initialization") {
  const MlpSpec spec{{1, 32, 32, 1}};
  Engine a = make_stream(7, StreamTag::kInit), b = make_stream(7, StreamTag::kInit), c = make_stream(8, StreamTag::kInit);
  const auto na = init_params<double>(spec, 1e-2, a);
  const auto nb = init_params<double>(spec, 1e-2, b);
  const auto nc = init_params<double>(spec, 1e-2, c);
  CHECK(na.params() == nb.params());
  CHECK(na.params() != nc.params());

  CHECK(na.weights(0).cwiseAbs().maxCoeff() <= 1.0);
  CHECK(na.weights(1).cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(32.0));
  CHECK(na.bias(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(na.bias(1).cwiseAbs().maxCoeff() == 0.0);
  CHECK(na.weights(2).cwiseAbs().maxCoeff() <= 1e-2);
  CHECK(std::abs(na.bias(2)(0)) <= 1e-2);

  const Eigen::MatrixXd x = 50.0 * Eigen::MatrixXd::Random(1, 1000);
  CHECK(na.forward(x).cwiseAbs().maxCoeff() <= 1e-2 * 33);
  CHECK_THROWS_AS(init_params<double>(spec, 0.0, a), std::invalid_argument);
}

TEST_CASE("Adam") {
  Eigen::VectorXd p = Eigen::VectorXd::LinSpaced(4, -1, 1);
  const Eigen::VectorXd p0 = p;
  AdamState<double> st(4, 1e-3);
  adam_update(p, Eigen::VectorXd(Eigen::VectorXd::Zero(4)), st);
  CHECK(p == p0);

  Eigen::VectorXd g(4);
  g << 3, -0.5, 1e-2, -200;
  AdamState<double> st2(4, 1e-3);
  adam_update(p, g, st2);
  for (int i = 0; i < 4; ++i) {
    const double step = p(i) - p0(i);
    CHECK(step == doctest::Approx(-1e-3 * (g(i) > 0 ? 1 : -1)).epsilon(1e-5));
  }

  // Identical sequences give identical parameters.
  Eigen::VectorXd q1 = p0, q2 = p0;
  AdamState<double> s1(4, 1e-2), s2(4, 1e-2);
  for (int k = 0; k < 50; ++k) {
    const Eigen::VectorXd gk = Eigen::VectorXd::Constant(4, std::sin(k));
    adam_update(q1, gk, s1);
    adam_update(q2, gk, s2);
  }
  CHECK(q1 == q2);

  // Minimizes a quadratic.
  Eigen::VectorXd x = Eigen::VectorXd::Constant(3, 5.0);
  AdamState<double> sq(3, 0.05);
  for (int k = 0; k < 3000; ++k) {
    const Eigen::VectorXd grad = 2 * x;
    adam_update(x, grad, sq);
  }
  CHECK(x.norm() < 1e-2);
  CHECK_THROWS_AS(adam_update(x, Eigen::VectorXd(Eigen::VectorXd::Zero(2)), sq), std::invalid_argument);
}

TEST_CASE("Polyak averaging") {
  Mlp<double> target(MlpSpec{{1, 1}}), online(MlpSpec{{1, 1}});
  online.params().setOnes();
  polyak_average(target, online, 0.995);
  CHECK(target.params()(0) == doctest::Approx(0.005));
  Mlp<double> same = online;
  polyak_average(same, online, 0.995);
  CHECK(same.params() == online.params());
}
