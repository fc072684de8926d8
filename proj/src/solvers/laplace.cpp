#include "pinnctl/solvers/laplace.hpp"

#include <stdexcept>
#include <vector>

#include "pinnctl/solvers/spectral.hpp"

namespace pinnctl::solvers {

Eigen::MatrixXd solve_laplace_dirichlet(int n, const std::function<double(double)>& bottom,
                                        const std::function<double(double)>& top,
                                        const std::function<double(double)>& left,
                                        const std::function<double(double)>& right) {
  if (n < 2) throw std::invalid_argument("Dirichlet grid needs n >= 2");
  const double h = 1.0 / n;
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int i = 0; i <= n; ++i) {
    U(i, 0) = bottom(i * h);
    U(i, n) = top(i * h);
  }
  for (int j = 1; j < n; ++j) {
    U(0, j) = left(j * h);
    U(n, j) = right(j * h);
  }
  const int m = n - 1;
  auto id = [m](int i, int j) { return (j - 1) * m + (i - 1); };
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m * m);
  for (int j = 1; j < n; ++j) {
    for (int i = 1; i < n; ++i) {
      const int r = id(i, j);
      trips.emplace_back(r, r, 4.0);
      const int ni[4] = {i - 1, i + 1, i, i};
      const int nj[4] = {j, j, j - 1, j + 1};
      for (int q = 0; q < 4; ++q) {
        if (ni[q] == 0 || ni[q] == n || nj[q] == 0 || nj[q] == n) {
          b(r) += U(ni[q], nj[q]);
        } else {
          trips.emplace_back(r, id(ni[q], nj[q]), -1.0);
        }
      }
    }
  }
  Eigen::SparseMatrix<double> A(m * m, m * m);
  A.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw NumericalError("Dirichlet Laplace factorization failed");
  const Eigen::VectorXd x = ldlt.solve(b);
  for (int j = 1; j < n; ++j)
    for (int i = 1; i < n; ++i) U(i, j) = x(id(i, j));
  return U;
}

PeriodicLaplace::PeriodicLaplace(int nx, int ny) : nx_(nx), ny_(ny) {
  if (nx < 3 || ny < 3) throw std::invalid_argument("periodic Laplace grid needs nx, ny >= 3");
  const double ax = 1.0 / (hx() * hx());
  const double ay = 1.0 / (hy() * hy());
  const int n = nx_ * (ny_ - 1);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(5 * n));
  for (int j = 1; j < ny_; ++j) {
    for (int i = 0; i < nx_; ++i) {
      const int r = index(i, j);
      trips.emplace_back(r, r, 2.0 * ax + 2.0 * ay);
      trips.emplace_back(r, index((i + nx_ - 1) % nx_, j), -ax);
      trips.emplace_back(r, index((i + 1) % nx_, j), -ax);
      if (j > 1) trips.emplace_back(r, index(i, j - 1), -ay);
      if (j < ny_ - 1) trips.emplace_back(r, index(i, j + 1), -ay);
    }
  }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trips.begin(), trips.end());
  ldlt_.compute(A);
  if (ldlt_.info() != Eigen::Success) throw NumericalError("periodic Laplace factorization failed");

  Eigen::MatrixXd S = Eigen::MatrixXd::Identity(nx_, nx_);
  for (int i = 0; i < nx_; ++i) {
    S(i, i) += 2.0 * ax;
    S(i, (i + 1) % nx_) -= ax;
    S(i, (i + nx_ - 1) % nx_) -= ax;
  }
  smooth_.compute(S);
}

Eigen::VectorXd PeriodicLaplace::interior(const Eigen::MatrixXd& rhs) const {
  Eigen::VectorXd b(nx_ * (ny_ - 1));
  for (int j = 1; j < ny_; ++j)
    for (int i = 0; i < nx_; ++i) b(index(i, j)) = rhs(i, j);
  return ldlt_.solve(b);
}

Eigen::MatrixXd PeriodicLaplace::solve(const Eigen::VectorXd& g, const Eigen::VectorXd& f) const {
  if (g.size() != nx_ || f.size() != nx_) throw std::invalid_argument("boundary data must have nx values");
  const double ay = 1.0 / (hy() * hy());
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nx_, ny_ + 1);
  rhs.col(1) += ay * g;
  rhs.col(ny_ - 1) += ay * f;
  const Eigen::VectorXd x = interior(rhs);
  Eigen::MatrixXd U(nx_, ny_ + 1);
  U.col(0) = g;
  U.col(ny_) = f;
  for (int j = 1; j < ny_; ++j)
    for (int i = 0; i < nx_; ++i) U(i, j) = x(index(i, j));
  return U;
}

Eigen::VectorXd PeriodicLaplace::top_flux(const Eigen::MatrixXd& u) const {
  return (3.0 * u.col(ny_) - 4.0 * u.col(ny_ - 1) + u.col(ny_ - 2)) / (2.0 * hy());
}

double PeriodicLaplace::cost(const Eigen::VectorXd& g, const Eigen::VectorXd& f, const Eigen::VectorXd& q) const {
  return hx() * (top_flux(solve(g, f)) - q).squaredNorm();
}

Eigen::MatrixXd PeriodicLaplace::solve_source(const Eigen::MatrixXd& s) const {
  const Eigen::VectorXd x = interior(s);
  Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(nx_, ny_ + 1);
  for (int j = 1; j < ny_; ++j)
    for (int i = 0; i < nx_; ++i) mu(i, j) = x(index(i, j));
  return mu;
}

Eigen::VectorXd PeriodicLaplace::sobolev_smooth(const Eigen::VectorXd& v) const { return smooth_.solve(v); }

}  // namespace pinnctl::solvers
