#include "pinnctl/solvers/spectral.hpp"

#include <cmath>

#include <fftw3.h>

namespace pinnctl::solvers {

struct Spectral::Plans {
  double* real = nullptr;
  fftw_complex* cplx = nullptr;
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;

  explicit Plans(int N) {
    real = fftw_alloc_real(static_cast<std::size_t>(N));
    cplx = fftw_alloc_complex(static_cast<std::size_t>(N / 2 + 1));
    r2c = fftw_plan_dft_r2c_1d(N, real, cplx, FFTW_ESTIMATE);
    c2r = fftw_plan_dft_c2r_1d(N, cplx, real, FFTW_ESTIMATE);
  }
  ~Plans() {
    fftw_destroy_plan(r2c);
    fftw_destroy_plan(c2r);
    fftw_free(real);
    fftw_free(cplx);
  }
};

int SpectralConfig::steps() const { return static_cast<int>(std::lround(T / dt)); }

void SpectralConfig::validate() const {
  if (N < 4 || (N & (N - 1)) != 0) throw std::invalid_argument("spectral N must be a power of two");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(L > 0.0) || !(T > 0.0)) throw std::invalid_argument("L and T must be positive");
  if (std::abs(steps() * dt - T) > 1e-9 * T) throw std::invalid_argument("T/dt is not an integer");
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
}

Eigen::VectorXd SpectralConfig::grid() const {
  Eigen::VectorXd x(N);
  for (int j = 0; j < N; ++j) x(j) = j * L / N;
  return x;
}

Eigen::VectorXd Trajectory::at_step(int n) const {
  if (stride == 1) return states.at(static_cast<std::size_t>(n));
  const int lo = n / stride;
  const int r = n % stride;
  if (r == 0) return states.at(static_cast<std::size_t>(lo));
  const double w = static_cast<double>(r) / stride;
  return (1.0 - w) * states.at(static_cast<std::size_t>(lo)) + w * states.at(static_cast<std::size_t>(lo + 1));
}

Spectral::Spectral(int N, double L, bool dealias) : N_(N), L_(L), plans_(std::make_unique<Plans>(N)) {
  const int M = N / 2 + 1;
  k_.resize(M);
  mask_.resize(M);
  for (int m = 0; m < M; ++m) {
    k_(m) = 2.0 * M_PI * m / L;
    mask_(m) = (!dealias || 3 * m <= N) ? 1.0 : 0.0;
  }
}

Spectral::~Spectral() = default;

void Spectral::forward(const Eigen::VectorXd& u, Eigen::VectorXcd& uh) const {
  std::copy(u.data(), u.data() + N_, plans_->real);
  fftw_execute(plans_->r2c);
  uh.resize(N_ / 2 + 1);
  for (int m = 0; m <= N_ / 2; ++m) uh(m) = {plans_->cplx[m][0], plans_->cplx[m][1]};
}

void Spectral::inverse(const Eigen::VectorXcd& uh, Eigen::VectorXd& u) const {
  for (int m = 0; m <= N_ / 2; ++m) {
    plans_->cplx[m][0] = uh(m).real();
    plans_->cplx[m][1] = uh(m).imag();
  }
  fftw_execute(plans_->c2r);
  u.resize(N_);
  const double inv = 1.0 / N_;
  for (int j = 0; j < N_; ++j) u(j) = plans_->real[j] * inv;
}

Eigen::VectorXd Spectral::derivative(const Eigen::VectorXd& u) const {
  Eigen::VectorXcd uh;
  forward(u, uh);
  for (int m = 0; m <= N_ / 2; ++m) uh(m) *= std::complex<double>(0.0, k_(m));
  uh(N_ / 2) = 0.0;
  Eigen::VectorXd out;
  inverse(uh, out);
  return out;
}

Eigen::VectorXd Spectral::project(const Eigen::VectorXd& u) const { return apply_symbol(u, mask_); }

Eigen::VectorXd Spectral::apply_symbol(const Eigen::VectorXd& u, const Eigen::VectorXd& symbol) const {
  Eigen::VectorXcd uh;
  forward(u, uh);
  uh.array() *= symbol.array();
  Eigen::VectorXd out;
  inverse(uh, out);
  return out;
}

Eigen::VectorXd Spectral::advection(const Eigen::VectorXd& u) const {
  const Eigen::VectorXd prod = u.cwiseProduct(derivative(u));
  return project(prod);
}

Eigen::VectorXd Spectral::advection_adjoint(const Eigen::VectorXd& u, const Eigen::VectorXd& du,
                                            const Eigen::VectorXd& v) const {
  const Eigen::VectorXd pv = project(v);
  return derivative(u.cwiseProduct(pv)) - du.cwiseProduct(pv);
}

Eigen::VectorXd burgers_symbol(const Spectral& s, double nu, double dt) {
  return (1.0 + dt * nu * s.wavenumbers().array().square()).inverse().matrix();
}

Eigen::VectorXd ks_symbol(const Spectral& s, double dt) {
  const Eigen::ArrayXd k2 = s.wavenumbers().array().square();
  return (1.0 - dt * k2 + dt * k2.square()).inverse().matrix();
}

namespace {

void check_state(const Eigen::VectorXd& u, double blowup, int step, const char* what) {
  const double m = u.cwiseAbs().maxCoeff();
  if (!std::isfinite(m) || m > blowup) {
    throw NumericalError(std::string(what) + " solve blew up at step " + std::to_string(step) +
                         " (max|u| = " + std::to_string(m) + ")");
  }
}

// Shared driver: u^{n+1} = A (u^n + dt (f^n - P(u^n Du^n))).
Trajectory integrate(const Eigen::VectorXd& u0, const Eigen::VectorXd& symbol, const Eigen::MatrixXd* forcing,
                     const SpectralConfig& cfg, const Spectral& sp, const char* what) {
  const int steps = cfg.steps();
  if (u0.size() != cfg.N) throw std::invalid_argument("initial state has wrong length");
  if (forcing && forcing->size() > 0 && (forcing->rows() != cfg.N || forcing->cols() != steps + 1)) {
    throw std::invalid_argument("forcing must be N x (steps + 1)");
  }
  Trajectory tr;
  tr.L = cfg.L;
  tr.dt = cfg.dt;
  tr.stride = cfg.stride;
  tr.states.reserve(static_cast<std::size_t>(steps / cfg.stride + 1));
  tr.times.reserve(tr.states.capacity());
  tr.states.push_back(u0);
  tr.times.push_back(0.0);
  Eigen::VectorXd u = u0;
  Eigen::VectorXcd uh;
  Eigen::VectorXcd duh(cfg.N / 2 + 1);
  Eigen::VectorXd du(cfg.N);
  Eigen::VectorXd prod(cfg.N);
  Eigen::VectorXcd ph;
  Eigen::VectorXcd fh;
  const auto& k = sp.wavenumbers();
  const auto& mask = sp.mask();
  sp.forward(u, uh);
  for (int n = 0; n < steps; ++n) {
    for (int m = 0; m <= cfg.N / 2; ++m) duh(m) = uh(m) * std::complex<double>(0.0, k(m));
    duh(cfg.N / 2) = 0.0;
    sp.inverse(duh, du);
    prod = u.cwiseProduct(du);
    sp.forward(prod, ph);
    uh.array() -= cfg.dt * mask.array() * ph.array();
    if (forcing && forcing->size() > 0) {
      sp.forward(forcing->col(n), fh);
      uh += cfg.dt * fh;
    }
    uh.array() *= symbol.array();
    sp.inverse(uh, u);
    if ((n + 1) % 100 == 0 || n + 1 == steps) check_state(u, cfg.blowup, n + 1, what);
    if ((n + 1) % cfg.stride == 0) {
      tr.states.push_back(u);
      tr.times.push_back((n + 1) * cfg.dt);
    }
  }
  return tr;
}

}  // namespace

Trajectory solve_burgers(const Eigen::VectorXd& u0, double nu, const SpectralConfig& cfg) {
  cfg.validate();
  Spectral sp(cfg.N, cfg.L, cfg.dealias);
  return integrate(u0, burgers_symbol(sp, nu, cfg.dt), nullptr, cfg, sp, "Burgers");
}

Trajectory solve_ks(const Eigen::VectorXd& u0, const Eigen::MatrixXd& forcing, const SpectralConfig& cfg) {
  cfg.validate();
  Spectral sp(cfg.N, cfg.L, cfg.dealias);
  return integrate(u0, ks_symbol(sp, cfg.dt), &forcing, cfg, sp, "KS");
}

}  // namespace pinnctl::solvers
