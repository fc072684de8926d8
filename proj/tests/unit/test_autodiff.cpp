#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "pinnctl/autodiff/derivatives.hpp"
#include "pinnctl/autodiff/jet.hpp"
#include "pinnctl/autodiff/tape.hpp"
#include "pinnctl/network/mlp.hpp"

using namespace pinnctl;
using ad::Jet;

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-12); }

Jet random_jet(std::mt19937_64& rng, int order) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Jet j(order);
  for (int k = 0; k <= order; ++k) j[k] = u(rng);
  return j;
}

// Symbolic derivatives of tanh written out by hand.
std::array<double, 5> tanh_derivs(double x) {
  const double t = std::tanh(x);
  const double s = 1.0 - t * t;
  return {t, s, -2.0 * t * s, (-2.0 + 6.0 * t * t) * s, s * (16.0 * t - 24.0 * t * t * t)};
}

}  // namespace

TEST(Jet, LiftSeeds) {
  const Jet a = ad::jet_lift(2.0, 2);
  EXPECT_EQ(a.order(), 2);
  EXPECT_EQ(a[0], 2.0);
  EXPECT_EQ(a[1], 1.0);
  EXPECT_EQ(a[2], 0.0);
  const Jet b = ad::jet_lift(0.0, 0);
  EXPECT_EQ(b.order(), 0);
  EXPECT_EQ(b[0], 0.0);
  const Jet c = ad::jet_lift(-1.5, 4);
  EXPECT_EQ(c[0], -1.5);
  EXPECT_EQ(c[1], 1.0);
  for (int k = 2; k <= 4; ++k) EXPECT_EQ(c[k], 0.0);
  const Jet d = ad::constant_lift(3.0, 3);
  EXPECT_EQ(d[0], 3.0);
  EXPECT_EQ(d[1], 0.0);
}

TEST(Jet, OrderOutOfRangeThrows) {
  EXPECT_THROW(ad::jet_lift(1.0, 5), std::invalid_argument);
  EXPECT_THROW(ad::jet_lift(1.0, -1), std::invalid_argument);
}

TEST(Jet, MismatchedOrdersThrow) {
  EXPECT_THROW(ad::jet_lift(1.0, 2) + ad::jet_lift(1.0, 3), std::invalid_argument);
  EXPECT_THROW(ad::jet_lift(1.0, 2) * ad::jet_lift(1.0, 1), std::invalid_argument);
}

TEST(Jet, TanhAtZero) {
  const Jet t = ad::jet_tanh(ad::jet_lift(0.0, 4));
  const double expected[] = {0.0, 1.0, 0.0, -2.0, 0.0};
  for (int k = 0; k <= 4; ++k) EXPECT_NEAR(t.derivative(k), expected[k], 1e-14) << "k=" << k;
}

TEST(Jet, TanhMatchesSymbolicDerivatives) {
  for (double x : {-2.3, -0.7, 0.3, 1.1, 2.9}) {
    const Jet t = ad::jet_tanh(ad::jet_lift(x, 4));
    const auto ref = tanh_derivs(x);
    for (int k = 0; k <= 4; ++k) EXPECT_LT(rel_err(t.derivative(k), ref[k]), 1e-12) << "x=" << x << " k=" << k;
  }
}

TEST(Jet, TanhOfConstant) {
  const Jet t = ad::jet_tanh(ad::constant_lift(0.8, 2));
  EXPECT_DOUBLE_EQ(t[0], std::tanh(0.8));
  EXPECT_EQ(t[1], 0.0);
  EXPECT_EQ(t[2], 0.0);
}

TEST(Jet, TanhChainRule) {
  const Jet t = ad::jet_tanh(2.0 * ad::jet_lift(0.0, 3));
  EXPECT_NEAR(t.derivative(1), 2.0, 1e-15);
  EXPECT_NEAR(t.derivative(3), -2.0 * 8.0, 1e-13);
}

TEST(Jet, LeibnizCauchyProduct) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Jet a = random_jet(rng, 4);
    const Jet b = random_jet(rng, 4);
    const Jet c = a * b;
    for (int k = 0; k <= 4; ++k) {
      double ref = 0.0;
      for (int j = 0; j <= k; ++j) ref += a[j] * b[k - j];
      EXPECT_LT(std::abs(c[k] - ref), 1e-12 * std::max(std::abs(ref), 1.0));
    }
  }
}

TEST(Jet, FourthDerivativeOfSine) {
  for (double k : {0.5, 1.0, 2.0 * M_PI / 10.0, 3.0}) {
    for (double x : {0.1, 0.9, 2.5}) {
      const Jet s = ad::sin(k * ad::jet_lift(x, 4));
      const double ref = std::pow(k, 4) * std::sin(k * x);
      EXPECT_LT(rel_err(s.derivative(4), ref), 1e-10) << "k=" << k << " x=" << x;
    }
  }
}

TEST(Jet, DivisionAndPowers) {
  const Jet x = ad::jet_lift(0.7, 4);
  const Jet r = 1.0 / x;
  // d^k/dx^k x^-1 = (-1)^k k! x^-(k+1)
  double fact = 1.0;
  for (int k = 0; k <= 4; ++k) {
    if (k > 0) fact *= k;
    EXPECT_LT(rel_err(r.derivative(k), (k % 2 ? -1.0 : 1.0) * fact * std::pow(0.7, -(k + 1))), 1e-12);
  }
  const Jet p = ad::pow(x, 3);
  EXPECT_LT(rel_err(p.derivative(2), 6.0 * 0.7), 1e-13);
  EXPECT_LT(rel_err(ad::exp(x).derivative(4), std::exp(0.7)), 1e-13);
  EXPECT_LT(rel_err(ad::cosh(x).derivative(3), std::sinh(0.7)), 1e-12);
}

TEST(Tape, PassthroughGradient) {
  ad::Tape tape(5);
  Eigen::MatrixXd theta = Eigen::VectorXd::LinSpaced(5, 0.1, 0.5);
  const ad::NodeId p = tape.parameter(theta, 0);
  const ad::NodeId loss = tape.element(p, 2, 0);
  const Eigen::VectorXd g = tape.grad_params(loss);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(g(i), i == 2 ? 1.0 : 0.0);
}

TEST(Tape, SumOfSquaresGradient) {
  ad::Tape tape(6);
  const ad::NodeId p = tape.parameter(Eigen::MatrixXd::Ones(2, 3), 0);
  const ad::NodeId loss = tape.sum(tape.mul(p, p));
  const Eigen::VectorXd g = ad::grad_params(tape, loss);
  for (int i = 0; i < 6; ++i) EXPECT_EQ(g(i), 2.0);
}

TEST(Tape, UnreachableParametersGetZero) {
  ad::Tape tape(4);
  const ad::NodeId a = tape.parameter(Eigen::MatrixXd::Constant(2, 1, 3.0), 0);
  tape.parameter(Eigen::MatrixXd::Constant(2, 1, 5.0), 2);
  const Eigen::VectorXd g = tape.grad_params(tape.sum(a));
  EXPECT_EQ(g(2), 0.0);
  EXPECT_EQ(g(3), 0.0);
}

TEST(Tape, NodeOutOfRangeThrows) {
  ad::Tape tape(1);
  EXPECT_THROW(tape.grad_params(3), std::out_of_range);
  EXPECT_THROW(tape.value(-1), std::out_of_range);
}

TEST(Tape, InputsPrecedeNodes) {
  const auto params = net::init_glorot({2, 5, 5, 1}, 3);
  ad::Tape tape(params.parameter_count());
  const ad::NodeId out =
      net::mlp_on_tape(tape, params, 0, Eigen::MatrixXd::Random(2, 4), ad::JetLayout{{4, 1}});
  const ad::NodeId loss = tape.mean(tape.coefficient(out, 0, 4));
  for (ad::NodeId i = 0; i <= loss; ++i) {
    for (ad::NodeId in : tape.inputs(i)) EXPECT_LT(in, i);
  }
}

namespace {

// Loss mixing values and high-order jet coefficients of a random MLP.
double jet_loss(const net::MlpParams& p, const Eigen::MatrixXd& pts, ad::Tape* keep = nullptr,
                ad::NodeId* keep_loss = nullptr) {
  ad::Tape local(p.parameter_count());
  ad::Tape& tape = keep ? *keep : local;
  const ad::NodeId out = net::mlp_on_tape(tape, p, 0, pts, ad::JetLayout{{4, 1}});
  const auto nb = ad::derivative_nodes(tape, out, p);
  const ad::NodeId r = tape.add(tape.add(nb.du_dt, tape.mul(nb.u, nb.du_dx)),
                                tape.add(nb.d2u_dx2, tape.scale(nb.d4u_dx4, 0.3)));
  const ad::NodeId loss = tape.mean(tape.mul(r, r));
  if (keep_loss) *keep_loss = loss;
  return tape.scalar(loss);
}

}  // namespace

TEST(Tape, GradParamsMatchesFiniteDifferences) {
  net::MlpParams p = net::init_glorot({2, 8, 8, 1}, 11);
  p.norm.mean = Eigen::Vector2d(0.2, 0.4);
  p.norm.stddev = Eigen::Vector2d(1.3, 0.7);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  Eigen::MatrixXd pts(2, 7);
  for (Eigen::Index i = 0; i < pts.size(); ++i) pts(i) = n01(rng);
  ad::Tape tape(p.parameter_count());
  ad::NodeId loss = -1;
  jet_loss(p, pts, &tape, &loss);
  const Eigen::VectorXd g = tape.grad_params(loss);
  const Eigen::VectorXd theta = p.flat();
  const double eps = 1e-5;
  for (int dir = 0; dir < 10; ++dir) {
    Eigen::VectorXd d(theta.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = n01(rng);
    net::MlpParams pp = p;
    net::MlpParams pm = p;
    pp.set_flat(theta + eps * d);
    pm.set_flat(theta - eps * d);
    const double fd = (jet_loss(pp, pts) - jet_loss(pm, pts)) / (2.0 * eps);
    EXPECT_LT(rel_err(g.dot(d), fd), 1e-6) << "direction " << dir;
  }
}

TEST(Derivatives, LinearNetwork) {
  net::MlpParams p = net::init_glorot({1, 1, 1}, 0);
  // u(x) = 1e-3 * atanh-free linear regime: tiny weights keep tanh linear to 1e-12
  p.layers[0].W(0, 0) = 1e-6;
  p.layers[1].W(0, 0) = 1e6;
  const auto d = ad::pde_derivatives(p, Eigen::VectorXd::Constant(1, 0.3), 2, false);
  EXPECT_NEAR(d.du_dx, 1.0, 1e-10);
  EXPECT_NEAR(d.d2u_dx2, 0.0, 1e-10);
  EXPECT_EQ(d.du_dt, 0.0);
}

TEST(Derivatives, MatchNestedFiniteDifferences) {
  net::MlpParams p = net::init_glorot({2, 20, 20, 1}, 21);
  p.norm.mean = Eigen::Vector2d(1.0, 2.0);
  p.norm.stddev = Eigen::Vector2d(1.5, 1.2);
  const Eigen::Vector2d x0(0.7, 1.6);
  const auto d = ad::pde_derivatives(p, x0, 4, true);
  auto f = [&](double x, double t) { return net::forward(p, Eigen::Vector2d(x, t)); };
  const double h = 1e-4;
  const double fx = (f(x0(0) + h, x0(1)) - f(x0(0) - h, x0(1))) / (2 * h);
  const double fxx = (f(x0(0) + h, x0(1)) - 2 * f(x0(0), x0(1)) + f(x0(0) - h, x0(1))) / (h * h);
  const double ft = (f(x0(0), x0(1) + h) - f(x0(0), x0(1) - h)) / (2 * h);
  EXPECT_LT(rel_err(d.du_dx, fx), 1e-5);
  EXPECT_LT(rel_err(d.du_dt, ft), 1e-5);
  EXPECT_LT(rel_err(d.d2u_dx2, fxx), 1e-5);
  // Fourth derivative: central differences of the jet's own second derivative.
  auto uxx = [&](double x) { return ad::pde_derivatives(p, Eigen::Vector2d(x, x0(1)), 2, false).d2u_dx2; };
  const double h4 = 1e-3;
  const double fxxxx = (uxx(x0(0) + h4) - 2 * uxx(x0(0)) + uxx(x0(0) - h4)) / (h4 * h4);
  EXPECT_LT(rel_err(d.d4u_dx4, fxxxx), 1e-3);
  EXPECT_TRUE(std::isfinite(d.d3u_dx3));
}

TEST(Derivatives, NormalizationChainRule) {
  net::MlpParams p = net::init_glorot({2, 10, 1}, 4);
  const Eigen::Vector2d x(0.0, 0.0);
  const double base = ad::pde_derivatives(p, x, 1, true).du_dx;
  p.norm.stddev(0) *= 2.0;
  EXPECT_NEAR(ad::pde_derivatives(p, x, 1, true).du_dx, 0.5 * base, 1e-15);
}

TEST(Derivatives, ForwardReverseConsistency) {
  net::MlpParams p = net::init_glorot({2, 12, 12, 1}, 9);
  const Eigen::Vector2d x0(0.4, -0.3);
  const double jet_dx = ad::pde_derivatives(p, x0, 1, true).du_dx;
  const double jet_dt = ad::pde_derivatives(p, x0, 1, true).du_dt;
  // Reverse mode with the input itself as the only trainable leaf.
  ad::Tape tape(2);
  ad::NodeId z = tape.parameter(Eigen::MatrixXd(x0), 0);
  for (std::size_t k = 0; k < p.layers.size(); ++k) {
    const ad::NodeId w = tape.constant(p.layers[k].W);
    const ad::NodeId b = tape.constant(Eigen::MatrixXd(p.layers[k].b));
    z = tape.affine(w, b, z);
    if (k + 1 < p.layers.size()) z = tape.tanh(z);
  }
  const Eigen::VectorXd g = tape.grad_params(tape.element(z, 0, 0));
  EXPECT_LT(rel_err(jet_dx, g(0)), 1e-12);
  EXPECT_LT(rel_err(jet_dt, g(1)), 1e-12);
}

TEST(Derivatives, UnsupportedOrderThrows) {
  const auto p = net::init_glorot({2, 4, 1}, 1);
  EXPECT_THROW(ad::pde_derivatives(p, Eigen::Vector2d(0, 0), 5, false), std::invalid_argument);
  EXPECT_THROW(ad::pde_derivatives(p, Eigen::Vector3d(0, 0, 0), 1, false), std::invalid_argument);
}
