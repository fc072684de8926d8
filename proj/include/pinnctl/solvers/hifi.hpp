#pragma once

#include <Eigen/Dense>

#include "pinnctl/problems/control_field.hpp"
#include "pinnctl/problems/problems.hpp"
#include "pinnctl/solvers/laplace.hpp"
#include "pinnctl/solvers/spectral.hpp"

namespace pinnctl::solvers {

/// Resolution of the classical solvers used for DAL and cost evaluation.
struct HifiConfig {
  int laplace_n = 40;
  int burgers_N = 256;
  double burgers_dt = 1e-3;
  int ks_N = 128;
  double ks_dt = 1e-3;

  /// KS at 256 modes and dt = 1e-4.
  static HifiConfig fine();
};

SpectralConfig spectral_config(const problems::ProblemSpec& p, const HifiConfig& h);

/// Wall data of the Laplace control problem on the periodic grid:
/// bottom values g and target flux q.
struct LaplaceWallData {
  Eigen::VectorXd g;
  Eigen::VectorXd q;
};
LaplaceWallData laplace_wall_data(const problems::ProblemSpec& p, int nx);

/// 1/2 h sum (u^N - u_d)^2.
double terminal_cost(const Trajectory& u, const Eigen::VectorXd& target);
/// 1/2 sum_n w_n h sum (u^n^2 + sigma f^n^2), trapezoid weights in time.
double regulator_cost(const Trajectory& u, const Eigen::MatrixXd& f, double sigma);
/// Trapezoid weight of step n out of steps.
inline double trapezoid_weight(int n, int steps, double dt) { return (n == 0 || n == steps) ? 0.5 * dt : dt; }

/// Forcing sampled on the solver grid, N x (steps + 1).
Eigen::MatrixXd forcing_on_grid(const problems::ControlField& c, const SpectralConfig& cfg);

/// Solve the forward problem for a fixed control with the classical solver and
/// evaluate the problem's cost.
double evaluate_cost_hifi(const problems::ProblemSpec& p, const problems::ControlField& c,
                          const HifiConfig& h = HifiConfig{});

/// Cost of the zero control (KS baseline, Burgers/Laplace from rest).
double baseline_cost_hifi(const problems::ProblemSpec& p, const HifiConfig& h = HifiConfig{});

}  // namespace pinnctl::solvers
