#include "pinnctl/adjoint/adjoint.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

namespace pinnctl::adjoint {

using solvers::SpectralConfig;
using solvers::Trajectory;

namespace {

// Transposed step: b = A a, then a_prev = b + dt E_n(b). visit(n, b) sees b
// before the update; source(n) is added to a_prev.
template <class Visit, class Source>
Eigen::VectorXd reverse_sweep(const solvers::Spectral& sp, const Eigen::VectorXd& symbol, const Trajectory& u,
                              Eigen::VectorXd a, int steps, double dt, Visit&& visit, Source&& source) {
  Eigen::VectorXcd ah;
  Eigen::VectorXcd bh;
  Eigen::VectorXd b;
  Eigen::VectorXd pb;
  for (int n = steps - 1; n >= 0; --n) {
    sp.forward(a, ah);
    bh = (ah.array() * symbol.array()).matrix();
    sp.inverse(bh, b);
    visit(n, b);
    bh.array() *= sp.mask().array();
    sp.inverse(bh, pb);
    const Eigen::VectorXd un = u.at_step(n);
    const Eigen::VectorXd du = sp.derivative(un);
    a = b + dt * (sp.derivative(un.cwiseProduct(pb)) - du.cwiseProduct(pb));
    source(n, a);
  }
  return a;
}

void check_trajectory(const Trajectory& u, const SpectralConfig& cfg) {
  const int steps = cfg.steps();
  if (u.states.empty() || u.states[0].size() != cfg.N) throw std::invalid_argument("trajectory/grid mismatch");
  if (static_cast<int>(u.states.size()) != steps / u.stride + 1 || std::abs(u.dt - cfg.dt) > 1e-15) {
    throw std::invalid_argument("trajectory does not cover [0, T] at the configured step");
  }
}

}  // namespace

BurgersAdjoint adjoint_burgers(const Trajectory& u, const Eigen::VectorXd& target, double nu,
                               const SpectralConfig& cfg) {
  check_trajectory(u, cfg);
  const int steps = cfg.steps();
  const double h = cfg.L / cfg.N;
  solvers::Spectral sp(cfg.N, cfg.L, cfg.dealias);
  BurgersAdjoint out;
  const Eigen::VectorXd mis = u.final_state() - target;
  out.J = 0.5 * h * mis.squaredNorm();
  const int stride = u.stride;
  const std::size_t slots = static_cast<std::size_t>(steps / stride + 1);
  out.lambda.slices.resize(slots);
  out.lambda.times.resize(slots);
  out.lambda.slices.back() = -mis;
  out.lambda.times.back() = steps * cfg.dt;
  const Eigen::VectorXd a0 = reverse_sweep(
      sp, solvers::burgers_symbol(sp, nu, cfg.dt), u, h * mis, steps, cfg.dt, [](int, const Eigen::VectorXd&) {},
      [&](int n, const Eigen::VectorXd& a) {
        if (n % stride == 0) {
          out.lambda.slices[static_cast<std::size_t>(n / stride)] = -a / h;
          out.lambda.times[static_cast<std::size_t>(n / stride)] = n * cfg.dt;
        }
      });
  out.nodal = a0;
  out.gradient = a0 / h;
  return out;
}

KsAdjoint adjoint_ks(const Trajectory& u, const Eigen::MatrixXd& f, double sigma, const SpectralConfig& cfg) {
  check_trajectory(u, cfg);
  const int steps = cfg.steps();
  if (f.size() > 0 && (f.rows() != cfg.N || f.cols() != steps + 1)) {
    throw std::invalid_argument("forcing must be N x (steps + 1)");
  }
  const double h = cfg.L / cfg.N;
  const double dt = cfg.dt;
  solvers::Spectral sp(cfg.N, cfg.L, cfg.dealias);
  KsAdjoint out;
  out.J = 0.0;
  out.nodal = Eigen::MatrixXd::Zero(cfg.N, steps + 1);
  const int stride = u.stride;
  const std::size_t slots = static_cast<std::size_t>(steps / stride + 1);
  out.lambda.slices.resize(slots);
  out.lambda.times.resize(slots);
  out.lambda.slices.back() = Eigen::VectorXd::Zero(cfg.N);
  out.lambda.times.back() = steps * dt;
  auto w = [&](int n) { return solvers::trapezoid_weight(n, steps, dt); };
  auto fcol = [&](int n) -> Eigen::VectorXd {
    return f.size() > 0 ? Eigen::VectorXd(f.col(n)) : Eigen::VectorXd::Zero(cfg.N);
  };
  {
    const Eigen::VectorXd uN = u.at_step(steps);
    const Eigen::VectorXd fN = fcol(steps);
    out.J += 0.5 * w(steps) * h * (uN.squaredNorm() + sigma * fN.squaredNorm());
    out.nodal.col(steps) = w(steps) * h * sigma * fN;
  }
  const Eigen::VectorXd aN = w(steps) * h * u.at_step(steps);
  reverse_sweep(
      sp, solvers::ks_symbol(sp, dt), u, aN, steps, dt,
      [&](int n, const Eigen::VectorXd& b) {
        const Eigen::VectorXd fn = fcol(n);
        out.nodal.col(n) = w(n) * h * sigma * fn + dt * b;
        if (n % stride == 0) {
          out.lambda.slices[static_cast<std::size_t>(n / stride)] = -b / h;
          out.lambda.times[static_cast<std::size_t>(n / stride)] = n * dt;
        }
      },
      [&](int n, Eigen::VectorXd& a) {
        const Eigen::VectorXd un = u.at_step(n);
        const Eigen::VectorXd fn = fcol(n);
        out.J += 0.5 * w(n) * h * (un.squaredNorm() + sigma * fn.squaredNorm());
        a += w(n) * h * un;
      });
  out.gradient.resize(cfg.N, steps + 1);
  for (int n = 0; n <= steps; ++n) out.gradient.col(n) = out.nodal.col(n) / (w(n) * h);
  return out;
}

LaplaceAdjoint adjoint_laplace(const solvers::PeriodicLaplace& pl, const Eigen::VectorXd& g, const Eigen::VectorXd& f,
                               const Eigen::VectorXd& q) {
  const int nx = pl.nx();
  const int ny = pl.ny();
  const Eigen::VectorXd r = pl.top_flux(pl.solve(g, f)) - q;
  LaplaceAdjoint out;
  out.J = pl.hx() * r.squaredNorm();
  // dJ/du on the two rows below the wall drives one adjoint solve.
  const double c = pl.hx() / pl.hy();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(nx, ny + 1);
  s.col(ny - 1) = -4.0 * c * r;
  s.col(ny - 2) += c * r;
  const Eigen::MatrixXd mu = pl.solve_source(s);
  out.nodal = 3.0 * c * r + mu.col(ny - 1) / (pl.hy() * pl.hy());
  out.gradient = out.nodal / pl.hx();
  out.lambda.nodal = mu / (pl.hx() * pl.hy());
  return out;
}

problems::ControlField grid_to_field(const problems::ProblemSpec& p, const Eigen::VectorXd& c,
                                     const solvers::HifiConfig& h) {
  switch (p.family) {
    case problems::Family::kLaplace:
      return problems::ControlField(problems::ControlKind::kBoundary, 0.0, 1.0, c);
    case problems::Family::kBurgers:
      return problems::ControlField(problems::ControlKind::kInitial, 0.0, p.L, c);
    case problems::Family::kKs: {
      const SpectralConfig cfg = solvers::spectral_config(p, h);
      return problems::ControlField(problems::ControlKind::kForcing, 0.0, p.L, cfg.N, 0.0, p.T, cfg.steps() + 1, c);
    }
  }
  throw std::invalid_argument("unknown problem family");
}

GridObjective make_objective(const problems::ProblemSpec& p, const solvers::HifiConfig& h) {
  if (!p.is_control) throw std::invalid_argument(p.name + " is not a control problem");
  GridObjective obj;
  switch (p.family) {
    case problems::Family::kLaplace: {
      const int n = h.laplace_n;
      auto pl = std::make_shared<solvers::PeriodicLaplace>(n, n);
      const auto d = solvers::laplace_wall_data(p, n);
      obj.size = n;
      obj.weights = Eigen::VectorXd::Constant(n, pl->hx());
      obj.cost = [pl, d](const Eigen::VectorXd& f) { return pl->cost(d.g, f, d.q); };
      obj.gradient = [pl, d](const Eigen::VectorXd& f, Eigen::VectorXd& nodal, Eigen::VectorXd& dens) {
        const LaplaceAdjoint a = adjoint_laplace(*pl, d.g, f, d.q);
        nodal = a.nodal;
        dens = a.gradient;
        return a.J;
      };
      return obj;
    }
    case problems::Family::kBurgers: {
      const SpectralConfig cfg = solvers::spectral_config(p, h);
      Eigen::VectorXd ud(cfg.N);
      const Eigen::VectorXd x = cfg.grid();
      for (int i = 0; i < cfg.N; ++i) ud(i) = p.target(x(i));
      const double nu = p.nu;
      obj.size = cfg.N;
      obj.weights = Eigen::VectorXd::Constant(cfg.N, cfg.L / cfg.N);
      obj.cost = [cfg, ud, nu](const Eigen::VectorXd& u0) {
        return solvers::terminal_cost(solvers::solve_burgers(u0, nu, cfg), ud);
      };
      obj.gradient = [cfg, ud, nu](const Eigen::VectorXd& u0, Eigen::VectorXd& nodal, Eigen::VectorXd& dens) {
        const BurgersAdjoint a = adjoint_burgers(solvers::solve_burgers(u0, nu, cfg), ud, nu, cfg);
        nodal = a.nodal;
        dens = a.gradient;
        return a.J;
      };
      return obj;
    }
    case problems::Family::kKs: {
      const SpectralConfig cfg = solvers::spectral_config(p, h);
      const int steps = cfg.steps();
      Eigen::VectorXd u0(cfg.N);
      const Eigen::VectorXd x = cfg.grid();
      for (int i = 0; i < cfg.N; ++i) u0(i) = p.initial(x(i));
      const double sigma = p.sigma;
      const Eigen::Index size = static_cast<Eigen::Index>(cfg.N) * (steps + 1);
      obj.size = static_cast<int>(size);
      obj.weights.resize(size);
      for (int n = 0; n <= steps; ++n)
        obj.weights.segment(static_cast<Eigen::Index>(n) * cfg.N, cfg.N)
            .setConstant(solvers::trapezoid_weight(n, steps, cfg.dt) * cfg.L / cfg.N);
      obj.cost = [cfg, u0, sigma, steps](const Eigen::VectorXd& fv) {
        const Eigen::Map<const Eigen::MatrixXd> f(fv.data(), cfg.N, steps + 1);
        return solvers::regulator_cost(solvers::solve_ks(u0, f, cfg), f, sigma);
      };
      obj.gradient = [cfg, u0, sigma, steps](const Eigen::VectorXd& fv, Eigen::VectorXd& nodal, Eigen::VectorXd& dens) {
        const Eigen::Map<const Eigen::MatrixXd> f(fv.data(), cfg.N, steps + 1);
        const KsAdjoint a = adjoint_ks(solvers::solve_ks(u0, f, cfg), f, sigma, cfg);
        nodal = Eigen::Map<const Eigen::VectorXd>(a.nodal.data(), a.nodal.size());
        dens = Eigen::Map<const Eigen::VectorXd>(a.gradient.data(), a.gradient.size());
        return a.J;
      };
      return obj;
    }
  }
  throw std::invalid_argument("unknown problem family");
}

GradientCheckReport fd_gradient_check(const std::function<double(const Eigen::VectorXd&)>& cost,
                                      const Eigen::VectorXd& grad, const Eigen::VectorXd& c, int n_directions,
                                      double eps, std::uint64_t seed) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  GradientCheckReport rep;
  rep.eps = eps;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int k = 0; k < n_directions; ++k) {
    Eigen::VectorXd d(c.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = normal(rng);
    d.normalize();
    const double ad = grad.dot(d);
    const double fd = (cost(c + eps * d) - cost(c - eps * d)) / (2.0 * eps);
    const double err = std::abs(ad - fd) / std::max({std::abs(ad), std::abs(fd), 1e-300});
    rep.adjoint.push_back(ad);
    rep.fd.push_back(fd);
    rep.rel_error.push_back(err);
    rep.max_rel_error = std::max(rep.max_rel_error, err);
  }
  return rep;
}

GradientCheckReport fd_gradient_check(const GridObjective& obj, const Eigen::VectorXd& c, int n_directions,
                                      double eps, std::uint64_t seed) {
  Eigen::VectorXd nodal, dens;
  obj.gradient(c, nodal, dens);
  return fd_gradient_check(obj.cost, nodal, c, n_directions, eps, seed);
}

DalResult dal_optimize(const problems::ProblemSpec& p, const DalConfig& cfg, const solvers::HifiConfig& h,
                       const std::function<void(const DalRecord&)>& on_iteration) {
  if (!(cfg.beta > 0.0)) throw std::invalid_argument("DAL learning rate must be positive");
  if (cfg.max_iterations < 0) throw std::invalid_argument("max iterations must be >= 0");
  const GridObjective obj = make_objective(p, h);
  Eigen::VectorXd c = cfg.initial.size() > 0 ? cfg.initial : Eigen::VectorXd::Zero(obj.size);
  if (c.size() != obj.size) throw std::invalid_argument("initial control has the wrong size");
  std::unique_ptr<solvers::PeriodicLaplace> smoother;
  if (p.family == problems::Family::kLaplace && cfg.sobolev)
    smoother = std::make_unique<solvers::PeriodicLaplace>(h.laplace_n, h.laplace_n);

  DalResult res;
  Eigen::VectorXd nodal, dens;
  for (int it = 0;; ++it) {
    const double J = obj.gradient(c, nodal, dens);
    const double gnorm = std::sqrt(obj.weights.dot(dens.cwiseAbs2()));
    if (!std::isfinite(J) || !std::isfinite(gnorm)) {
      throw solvers::NumericalError("DAL iteration " + std::to_string(it) + ": non-finite cost or gradient");
    }
    res.history.push_back({it, J, gnorm});
    if (on_iteration) on_iteration(res.history.back());
    if (it >= cfg.max_iterations) {
      res.stop_reason = "max-iterations";
      break;
    }
    if (gnorm <= cfg.grad_floor) {
      res.stop_reason = "gradient-floor";
      break;
    }
    if (it >= cfg.plateau_window) {
      const double old = res.history[static_cast<std::size_t>(it - cfg.plateau_window)].J;
      if ((old - J) < cfg.plateau_tol * std::abs(old)) {
        res.stop_reason = "plateau";
        break;
      }
    }
    if (smoother) dens = smoother->sobolev_smooth(dens);
    c -= cfg.beta * dens;
  }
  res.control = c;
  res.field = grid_to_field(p, c, h);
  return res;
}

void write_history_csv(const std::string& path, const std::vector<DalRecord>& history) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  out << "iteration,J,grad_norm\n";
  for (const auto& r : history) out << r.iteration << ',' << r.J << ',' << r.grad_norm << '\n';
}

}  // namespace pinnctl::adjoint
