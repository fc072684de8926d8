#include "pinnctl/problems/problems.hpp"

#include <cmath>
#include <stdexcept>

#include "pinnctl/autodiff/jet.hpp"

namespace pinnctl::problems {
namespace {

using ad::Jet;
using sampling::Label;

// Closed forms written over a generic scalar so jets give their derivatives.
template <class S>
S burgers_expr(const S& x, const S& t, double nu) {
  using std::cos;
  using std::exp;
  using std::sin;
  using ad::cos;
  using ad::exp;
  using ad::sin;
  const S e = exp(-M_PI * M_PI * nu * (t - 5.0));
  return 2.0 * nu * M_PI * e * sin(M_PI * x) / (2.0 + e * cos(M_PI * x));
}

template <class S>
S laplace_forward_expr(const S& x, const S& y) {
  using std::sin;
  using std::sinh;
  using ad::sin;
  using ad::sinh;
  return sin(M_PI * x) * sinh(M_PI * y) / std::sinh(M_PI);
}

template <class S>
S laplace_optimal_expr(const S& x, const S& y) {
  using std::cos;
  using std::cosh;
  using std::sin;
  using std::sinh;
  using ad::cos;
  using ad::cosh;
  using ad::sin;
  using ad::sinh;
  const double k = 2.0 * M_PI;
  return sin(k * x) * (cosh(k * y) - std::tanh(k) * sinh(k * y)) + cos(k * x) * sinh(k * y) / (k * std::cosh(k));
}

ad::DerivativeBundle jet_bundle(const std::function<Jet(const Jet&, const Jet&)>& f, double x, double t, int ox,
                                int ot) {
  ad::DerivativeBundle d;
  const Jet jx = f(Jet::lift(x, ox), Jet::constant(t, ox));
  d.u = jx.value();
  double* xs[] = {&d.du_dx, &d.d2u_dx2, &d.d3u_dx3, &d.d4u_dx4};
  for (int k = 1; k <= ox; ++k) *xs[k - 1] = jx.derivative(k);
  if (ot > 0) {
    const Jet jt = f(Jet::constant(x, ot), Jet::lift(t, ot));
    d.du_dt = jt.derivative(1);
    if (ot > 1) d.d2u_dt2 = jt.derivative(2);
  }
  return d;
}

ProblemSpec laplace_base() {
  ProblemSpec p;
  p.family = Family::kLaplace;
  p.L = 1.0;
  p.T = 1.0;
  p.spatial_order = 2;
  p.time_order = 2;
  return p;
}

}  // namespace

double laplace_forward_oracle(double x, double y) { return laplace_forward_expr(x, y); }

double laplace_optimal_control(double x) {
  const double k = 2.0 * M_PI;
  return std::sin(k * x) / std::cosh(k) + std::tanh(k) / k * std::cos(k * x);
}

double laplace_optimal_state(double x, double y) { return laplace_optimal_expr(x, y); }

double burgers_analytical(double x, double t, double nu) { return burgers_expr(x, t, nu); }

double ks_initial(double x, double L) {
  return std::cos(2.0 * M_PI * x / 10.0) + 1.0 / std::cosh((x - L / 2.0) / 5.0);
}

ProblemSpec laplace_forward() {
  ProblemSpec p = laplace_base();
  p.name = "laplace-fwd";
  p.boundary = {sampling::BoundaryKind::kPerimeter, 1.0, 1.0, 40, 0};
  p.dirichlet = [](Label l, double x, double) { return l == Label::kTop ? std::sin(M_PI * x) : 0.0; };
  p.oracle = laplace_forward_oracle;
  return p;
}

ProblemSpec laplace_control(LaplaceData data) {
  ProblemSpec p = laplace_base();
  p.name = "laplace-ctl";
  p.is_control = true;
  p.control = ControlKind::kBoundary;
  p.cost = CostKind::kWallFlux;
  p.periodic_order = 1;
  p.laplace_data = data;
  p.boundary = {sampling::BoundaryKind::kPeriodicDirichletY, 1.0, 1.0, 40, 0};
  const double k = data == LaplaceData::kConsistent ? 2.0 * M_PI : M_PI;
  p.dirichlet = [k](Label, double x, double) { return std::sin(k * x); };
  p.target = [k](double x) { return std::cos(k * x); };
  if (data == LaplaceData::kConsistent) {
    p.reference_control = laplace_optimal_control;
    p.oracle = laplace_optimal_state;
  }
  return p;
}

ProblemSpec burgers() {
  ProblemSpec p;
  p.name = "burgers-fwd";
  p.family = Family::kBurgers;
  p.L = 4.0;
  p.T = 5.0;
  p.nu = 0.01;
  p.spatial_order = 2;
  p.time_order = 1;
  p.periodic_order = 1;
  p.boundary = {sampling::BoundaryKind::kPeriodicTime, 4.0, 5.0, 41, 41};
  const double nu = p.nu;
  p.initial = [nu](double x) { return burgers_analytical(x, 0.0, nu); };
  p.oracle = [nu](double x, double t) { return burgers_analytical(x, t, nu); };
  return p;
}

ProblemSpec burgers_control() {
  ProblemSpec p = burgers();
  p.name = "burgers-ctl";
  p.is_control = true;
  p.control = ControlKind::kInitial;
  p.cost = CostKind::kTerminalMismatch;
  const double nu = p.nu;
  const double T = p.T;
  p.target = [nu, T](double x) { return burgers_analytical(x, T, nu); };
  p.reference_control = p.initial;
  return p;
}

ProblemSpec ks() {
  ProblemSpec p;
  p.name = "ks-fwd";
  p.family = Family::kKs;
  p.L = 50.0;
  p.T = 10.0;
  p.spatial_order = 4;
  p.time_order = 1;
  p.periodic_order = 3;
  p.boundary = {sampling::BoundaryKind::kPeriodicTime, 50.0, 10.0, 41, 41};
  const double L = p.L;
  p.initial = [L](double x) { return ks_initial(x, L); };
  return p;
}

ProblemSpec ks_control() {
  ProblemSpec p = ks();
  p.name = "ks-ctl";
  p.is_control = true;
  p.control = ControlKind::kForcing;
  p.cost = CostKind::kQuadraticRegulator;
  p.sigma = 1.0;
  return p;
}

ProblemSpec make_problem(const std::string& name) {
  if (name == "laplace-fwd") return laplace_forward();
  if (name == "laplace-ctl") return laplace_control();
  if (name == "burgers-fwd") return burgers();
  if (name == "burgers-ctl") return burgers_control();
  if (name == "ks-fwd") return ks();
  if (name == "ks-ctl") return ks_control();
  throw std::invalid_argument("unknown problem '" + name + "'");
}

std::vector<std::string> problem_names() {
  return {"laplace-fwd", "laplace-ctl", "burgers-fwd", "burgers-ctl", "ks-fwd", "ks-ctl"};
}

ad::DerivativeBundle oracle_derivatives(const ProblemSpec& p, double x, double t) {
  switch (p.family) {
    case Family::kBurgers: {
      const double nu = p.nu;
      return jet_bundle([nu](const Jet& a, const Jet& b) { return burgers_expr(a, b, nu); }, x, t, p.spatial_order,
                        p.time_order);
    }
    case Family::kLaplace:
      if (p.is_control) {
        if (p.laplace_data != LaplaceData::kConsistent) throw std::invalid_argument("no closed-form state");
        return jet_bundle([](const Jet& a, const Jet& b) { return laplace_optimal_expr(a, b); }, x, t,
                          p.spatial_order, p.time_order);
      }
      return jet_bundle([](const Jet& a, const Jet& b) { return laplace_forward_expr(a, b); }, x, t,
                        p.spatial_order, p.time_order);
    case Family::kKs:
      break;
  }
  throw std::invalid_argument("problem " + p.name + " has no closed-form state");
}

}  // namespace pinnctl::problems
