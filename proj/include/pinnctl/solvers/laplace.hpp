#pragma once

#include <functional>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

namespace pinnctl::solvers {

/// Five-point Dirichlet solve on the unit square with n intervals per side.
/// Result U(i, j) is u(i/n, j/n), boundary rows included.
Eigen::MatrixXd solve_laplace_dirichlet(int n, const std::function<double(double)>& bottom,
                                        const std::function<double(double)>& top,
                                        const std::function<double(double)>& left,
                                        const std::function<double(double)>& right);

/// Laplace problem periodic in x on [0, 1) x [0, 1] with u(x, 0) = g and
/// u(x, 1) = f. Grid x_i = i / nx (i < nx), y_j = j / ny (j <= ny).
class PeriodicLaplace {
 public:
  PeriodicLaplace(int nx, int ny);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double hx() const { return 1.0 / nx_; }
  double hy() const { return 1.0 / ny_; }

  /// Full field, nx x (ny + 1).
  Eigen::MatrixXd solve(const Eigen::VectorXd& g, const Eigen::VectorXd& f) const;
  /// One-sided second-order flux u_y(x_i, 1).
  Eigen::VectorXd top_flux(const Eigen::MatrixXd& u) const;
  /// J = hx * sum_i (flux_i - q_i)^2.
  double cost(const Eigen::VectorXd& g, const Eigen::VectorXd& f, const Eigen::VectorXd& q) const;
  /// Solves A mu = s on the interior for a source s given on the full grid;
  /// mu is zero on the walls.
  Eigen::MatrixXd solve_source(const Eigen::MatrixXd& s) const;
  /// (I - d_xx)^{-1} on the periodic x grid.
  Eigen::VectorXd sobolev_smooth(const Eigen::VectorXd& v) const;

 private:
  Eigen::VectorXd interior(const Eigen::MatrixXd& rhs) const;
  int index(int i, int j) const { return (j - 1) * nx_ + i; }

  int nx_;
  int ny_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  Eigen::LDLT<Eigen::MatrixXd> smooth_;
};

}  // namespace pinnctl::solvers
