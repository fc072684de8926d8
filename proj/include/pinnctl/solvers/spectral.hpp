#pragma once

#include <complex>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pinnctl::solvers {

/// Raised when a solve blows up or produces non-finite values.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SpectralConfig {
  int N = 256;
  double dt = 1e-3;
  double T = 5.0;
  double L = 4.0;
  bool dealias = true;
  int stride = 1;  // store every stride-th step
  double blowup = 1e6;

  int steps() const;
  void validate() const;
  Eigen::VectorXd grid() const;
};

struct Trajectory {
  double L = 0.0;
  double dt = 0.0;
  int stride = 1;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;

  const Eigen::VectorXd& final_state() const { return states.back(); }
  /// State at step n, linear in time between stored slices.
  Eigen::VectorXd at_step(int n) const;
};

/// Periodic Fourier operators on N points over [0, L) backed by FFTW.
class Spectral {
 public:
  Spectral(int N, double L, bool dealias = true);
  ~Spectral();
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  int size() const { return N_; }
  /// Angular wavenumbers 2 pi m / L for m = 0..N/2.
  const Eigen::VectorXd& wavenumbers() const { return k_; }

  void forward(const Eigen::VectorXd& u, Eigen::VectorXcd& uh) const;
  void inverse(const Eigen::VectorXcd& uh, Eigen::VectorXd& u) const;

  /// Spectral derivative with the Nyquist mode zeroed (antisymmetric).
  Eigen::VectorXd derivative(const Eigen::VectorXd& u) const;
  /// 2/3-rule projection (identity when dealiasing is off).
  Eigen::VectorXd project(const Eigen::VectorXd& u) const;
  /// Multiplies mode m by symbol(m) (real, even symbols give symmetric maps).
  Eigen::VectorXd apply_symbol(const Eigen::VectorXd& u, const Eigen::VectorXd& symbol) const;
  /// P(u * Du).
  Eigen::VectorXd advection(const Eigen::VectorXd& u) const;
  /// Transpose of v -> -(linearized advection at u) v: D(u * Pv) - (Du) * Pv.
  Eigen::VectorXd advection_adjoint(const Eigen::VectorXd& u, const Eigen::VectorXd& du, const Eigen::VectorXd& v) const;
  const Eigen::VectorXd& mask() const { return mask_; }

 private:
  int N_;
  double L_;
  Eigen::VectorXd k_;
  Eigen::VectorXd mask_;
  struct Plans;
  std::unique_ptr<Plans> plans_;
};

/// Implicit-operator symbols for one step.
Eigen::VectorXd burgers_symbol(const Spectral& s, double nu, double dt);
Eigen::VectorXd ks_symbol(const Spectral& s, double dt);

/// Semi-implicit Euler for u_t + u u_x = nu u_xx.
Trajectory solve_burgers(const Eigen::VectorXd& u0, double nu, const SpectralConfig& cfg);

/// Semi-implicit Euler for u_t + u u_x + u_xx + u_xxxx = f. forcing holds f
/// at every step time as columns (N x (steps + 1)) or is empty for f = 0.
/// Step n uses f at t_n.
Trajectory solve_ks(const Eigen::VectorXd& u0, const Eigen::MatrixXd& forcing, const SpectralConfig& cfg);

}  // namespace pinnctl::solvers
