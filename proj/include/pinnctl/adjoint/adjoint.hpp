#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pinnctl/problems/control_field.hpp"
#include "pinnctl/problems/problems.hpp"
#include "pinnctl/solvers/hifi.hpp"

namespace pinnctl::adjoint {

/// Adjoint density lambda. Time-dependent problems store slices at the
/// trajectory stride; Laplace stores one nodal field.
struct AdjointField {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> slices;
  Eigen::MatrixXd nodal;
};

struct BurgersAdjoint {
  double J = 0.0;
  AdjointField lambda;       // lambda(x, T) = u_d - u(x, T)
  Eigen::VectorXd gradient;  // L2 density dJ/du0 = -lambda(x, 0)
  Eigen::VectorXd nodal;     // dJ/du0_j = h * gradient_j
};

/// Reversed semi-implicit sweep for -lambda_t - u lambda_x = nu lambda_xx.
BurgersAdjoint adjoint_burgers(const solvers::Trajectory& u, const Eigen::VectorXd& target, double nu,
                               const solvers::SpectralConfig& cfg);

struct KsAdjoint {
  double J = 0.0;
  AdjointField lambda;       // lambda(x, T) = 0
  Eigen::MatrixXd gradient;  // L2 density in (x, t), N x (steps + 1)
  Eigen::MatrixXd nodal;     // derivative with respect to every grid value of f
};

/// Reversed sweep for -lambda_t - u lambda_x + lambda_xx + lambda_xxxx = -u.
/// f is N x (steps + 1) or empty.
KsAdjoint adjoint_ks(const solvers::Trajectory& u, const Eigen::MatrixXd& f, double sigma,
                     const solvers::SpectralConfig& cfg);

struct LaplaceAdjoint {
  double J = 0.0;
  AdjointField lambda;       // harmonic, zero on both walls
  Eigen::VectorXd gradient;  // L2 density on the top wall
  Eigen::VectorXd nodal;
};

LaplaceAdjoint adjoint_laplace(const solvers::PeriodicLaplace& pl, const Eigen::VectorXd& g, const Eigen::VectorXd& f,
                               const Eigen::VectorXd& q);

/// Cost and nodal gradient of one control problem on the solver grid.
struct GridObjective {
  std::function<double(const Eigen::VectorXd&)> cost;
  // Returns J, fills the nodal gradient and the L2 density.
  std::function<double(const Eigen::VectorXd&, Eigen::VectorXd& nodal, Eigen::VectorXd& density)> gradient;
  // Inner product weights turning densities into nodal gradients.
  Eigen::VectorXd weights;
  int size = 0;
};

GridObjective make_objective(const problems::ProblemSpec& p, const solvers::HifiConfig& h = solvers::HifiConfig{});

struct GradientCheckReport {
  double eps = 0.0;
  std::vector<double> adjoint;     // <grad, d>
  std::vector<double> fd;          // central differences
  std::vector<double> rel_error;
  double max_rel_error = 0.0;
};

/// Central-difference directional derivatives against <grad, d> along n random
/// unit directions.
GradientCheckReport fd_gradient_check(const std::function<double(const Eigen::VectorXd&)>& cost,
                                      const Eigen::VectorXd& grad, const Eigen::VectorXd& c, int n_directions,
                                      double eps, std::uint64_t seed);
GradientCheckReport fd_gradient_check(const GridObjective& obj, const Eigen::VectorXd& c, int n_directions,
                                      double eps, std::uint64_t seed);

struct DalConfig {
  double beta = 1.0;
  int max_iterations = 2000;
  double plateau_tol = 1e-8;
  int plateau_window = 50;
  double grad_floor = 0.0;
  // Laplace only: precondition the wall gradient by (I - d_xx)^{-1}.
  bool sobolev = true;
  Eigen::VectorXd initial;  // zero when empty
};

struct DalRecord {
  int iteration = 0;
  double J = 0.0;
  double grad_norm = 0.0;
};

struct DalResult {
  Eigen::VectorXd control;  // solver-grid values
  problems::ControlField field;
  std::vector<DalRecord> history;
  std::string stop_reason;
};

/// Direct-adjoint looping: forward solve, adjoint solve, c <- c - beta g.
DalResult dal_optimize(const problems::ProblemSpec& p, const DalConfig& cfg,
                       const solvers::HifiConfig& h = solvers::HifiConfig{},
                       const std::function<void(const DalRecord&)>& on_iteration = {});

/// Wraps solver-grid control values into an interchange field.
problems::ControlField grid_to_field(const problems::ProblemSpec& p, const Eigen::VectorXd& c,
                                     const solvers::HifiConfig& h);

void write_history_csv(const std::string& path, const std::vector<DalRecord>& history);

}  // namespace pinnctl::adjoint
