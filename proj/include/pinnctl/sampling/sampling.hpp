#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include <Eigen/Dense>

namespace pinnctl::sampling {

/// Axis-aligned box [lo, hi] in dim dimensions.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Eigen::VectorXd& p, double tol = 0.0) const;
};

Box make_box(double x0, double x1, double t0, double t1);

/// Latin hypercube sample, dim x n. Each of the n slices of every axis holds
/// exactly one point; positions are jittered uniformly inside the slice.
Eigen::MatrixXd lhs_sample(int n, const Box& box, std::uint64_t seed);

/// Random partition of {0..count-1} into M equal batches.
std::vector<std::vector<int>> epoch_minibatches(int count, int M, std::uint64_t epoch_seed);
/// Same partition applied to the columns of a point set.
std::vector<Eigen::MatrixXd> epoch_minibatches(const Eigen::MatrixXd& points, int M, std::uint64_t epoch_seed);

enum class Label { kBottom, kRight, kTop, kLeft, kPeriodicLo, kPeriodicHi, kInitial };
const char* label_name(Label l);

/// Boundary/initial training points of one problem.
struct BoundarySet {
  Eigen::MatrixXd dirichlet;  // 2 x nd
  std::vector<Label> dirichlet_labels;
  Eigen::MatrixXd periodic_lo;  // 2 x np, pairs aligned column by column
  Eigen::MatrixXd periodic_hi;
  Eigen::MatrixXd initial;  // 2 x n0 at t = 0

  /// N_b: Dirichlet points plus both members of every periodic pair.
  int boundary_count() const { return static_cast<int>(dirichlet.cols() + 2 * periodic_lo.cols()); }
  int initial_count() const { return static_cast<int>(initial.cols()); }
  void write_csv(std::ostream& out) const;
};

enum class BoundaryKind {
  kPerimeter,           // Dirichlet on every edge of [0,L] x [0,T]
  kPeriodicTime,        // x-periodic pairs over t, plus initial line t = 0
  kPeriodicDirichletY,  // x-periodic pairs over y, Dirichlet bottom and top
};

struct BoundaryLayout {
  BoundaryKind kind = BoundaryKind::kPerimeter;
  double L = 1.0;
  double T = 1.0;
  int per_edge = 40;  // points per edge (pairs for periodic edges)
  int initial = 0;    // N_0 for kPeriodicTime
};

BoundarySet boundary_points(const BoundaryLayout& layout);

/// n equally spaced points on [a, b] including both ends.
Eigen::VectorXd linspace(double a, double b, int n);
/// Midpoint-rule abscissae (i + 1/2) (b - a) / n + a.
Eigen::VectorXd midpoints(double a, double b, int n);

/// Residual-point plan. Refinement boxes add extra LHS points.
struct SamplingPlan {
  int n_residual = 10000;
  int minibatches = 10;
  Box box;
  std::vector<std::pair<Box, int>> refinement;
  std::uint64_t seed = 0;

  void validate() const;
  Eigen::MatrixXd residual_points() const;
};

void write_points_csv(std::ostream& out, const Eigen::MatrixXd& points, const char* label);

}  // namespace pinnctl::sampling
