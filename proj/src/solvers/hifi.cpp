#include "pinnctl/solvers/hifi.hpp"

#include <stdexcept>

namespace pinnctl::solvers {

using problems::ControlField;
using problems::ControlKind;
using problems::Family;
using problems::ProblemSpec;

HifiConfig HifiConfig::fine() {
  HifiConfig h;
  h.ks_N = 256;
  h.ks_dt = 1e-4;
  return h;
}

SpectralConfig spectral_config(const ProblemSpec& p, const HifiConfig& h) {
  SpectralConfig c;
  c.L = p.L;
  c.T = p.T;
  if (p.family == Family::kBurgers) {
    c.N = h.burgers_N;
    c.dt = h.burgers_dt;
  } else if (p.family == Family::kKs) {
    c.N = h.ks_N;
    c.dt = h.ks_dt;
  } else {
    throw std::invalid_argument("no spectral solver for " + p.name);
  }
  return c;
}

LaplaceWallData laplace_wall_data(const ProblemSpec& p, int nx) {
  LaplaceWallData d{Eigen::VectorXd(nx), Eigen::VectorXd(nx)};
  for (int i = 0; i < nx; ++i) {
    const double x = static_cast<double>(i) / nx;
    d.g(i) = p.dirichlet(sampling::Label::kBottom, x, 0.0);
    d.q(i) = p.target(x);
  }
  return d;
}

double terminal_cost(const Trajectory& u, const Eigen::VectorXd& target) {
  const double h = u.L / static_cast<double>(target.size());
  return 0.5 * h * (u.final_state() - target).squaredNorm();
}

double regulator_cost(const Trajectory& u, const Eigen::MatrixXd& f, double sigma) {
  if (u.stride != 1) throw std::invalid_argument("regulator cost needs every time step stored");
  const int steps = static_cast<int>(u.states.size()) - 1;
  const double h = u.L / static_cast<double>(u.states[0].size());
  double J = 0.0;
  for (int n = 0; n <= steps; ++n) {
    double s = u.states[static_cast<std::size_t>(n)].squaredNorm();
    if (f.size() > 0) s += sigma * f.col(n).squaredNorm();
    J += 0.5 * trapezoid_weight(n, steps, u.dt) * h * s;
  }
  return J;
}

Eigen::MatrixXd forcing_on_grid(const ControlField& c, const SpectralConfig& cfg) {
  const int steps = cfg.steps();
  Eigen::MatrixXd f(cfg.N, steps + 1);
  const Eigen::VectorXd x = cfg.grid();
  for (int n = 0; n <= steps; ++n) {
    const double t = n * cfg.dt;
    for (int j = 0; j < cfg.N; ++j) f(j, n) = c(x(j), t);
  }
  return f;
}

namespace {

Eigen::VectorXd sample_on(const std::function<double(double)>& fn, const Eigen::VectorXd& x) {
  Eigen::VectorXd v(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) v(i) = fn(x(i));
  return v;
}

}  // namespace

double evaluate_cost_hifi(const ProblemSpec& p, const ControlField& c, const HifiConfig& h) {
  if (!p.is_control) throw std::invalid_argument(p.name + " is not a control problem");
  if (c.kind() != p.control) {
    throw std::invalid_argument(std::string("control kind '") + problems::control_kind_name(c.kind()) +
                                "' does not match problem " + p.name);
  }
  switch (p.family) {
    case Family::kLaplace: {
      const int n = h.laplace_n;
      PeriodicLaplace pl(n, n);
      const LaplaceWallData d = laplace_wall_data(p, n);
      Eigen::VectorXd f(n);
      for (int i = 0; i < n; ++i) f(i) = c(static_cast<double>(i) / n);
      return pl.cost(d.g, f, d.q);
    }
    case Family::kBurgers: {
      const SpectralConfig cfg = spectral_config(p, h);
      const Eigen::VectorXd x = cfg.grid();
      Eigen::VectorXd u0(cfg.N);
      for (int i = 0; i < cfg.N; ++i) u0(i) = c(x(i));
      return terminal_cost(solve_burgers(u0, p.nu, cfg), sample_on(p.target, x));
    }
    case Family::kKs: {
      const SpectralConfig cfg = spectral_config(p, h);
      const Eigen::VectorXd u0 = sample_on(p.initial, cfg.grid());
      const Eigen::MatrixXd f = forcing_on_grid(c, cfg);
      return regulator_cost(solve_ks(u0, f, cfg), f, p.sigma);
    }
  }
  throw std::invalid_argument("unknown problem family");
}

double baseline_cost_hifi(const ProblemSpec& p, const HifiConfig& h) {
  switch (p.family) {
    case Family::kLaplace:
      return evaluate_cost_hifi(p, ControlField(ControlKind::kBoundary, 0.0, 1.0, Eigen::VectorXd::Zero(h.laplace_n)), h);
    case Family::kBurgers:
      return evaluate_cost_hifi(p, ControlField(ControlKind::kInitial, 0.0, p.L, Eigen::VectorXd::Zero(h.burgers_N)), h);
    case Family::kKs: {
      const SpectralConfig cfg = spectral_config(p, h);
      const Eigen::VectorXd u0 = sample_on(p.initial, cfg.grid());
      return regulator_cost(solve_ks(u0, Eigen::MatrixXd(), cfg), Eigen::MatrixXd(), p.sigma);
    }
  }
  throw std::invalid_argument("unknown problem family");
}

}  // namespace pinnctl::solvers
