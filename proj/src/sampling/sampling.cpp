#include "pinnctl/sampling/sampling.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace pinnctl::sampling {

bool Box::contains(const Eigen::VectorXd& p, double tol) const {
  return p.size() == lo.size() && (p.array() >= lo.array() - tol).all() && (p.array() <= hi.array() + tol).all();
}

Box make_box(double x0, double x1, double t0, double t1) {
  return Box{Eigen::Vector2d(x0, t0), Eigen::Vector2d(x1, t1)};
}

Eigen::MatrixXd lhs_sample(int n, const Box& box, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("lhs_sample needs n >= 1");
  if (box.dim() == 0 || box.hi.size() != box.lo.size() || (box.hi.array() <= box.lo.array()).any()) {
    throw std::invalid_argument("lhs_sample: empty box");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(0.0, 1.0);
  Eigen::MatrixXd pts(box.dim(), n);
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int d = 0; d < box.dim(); ++d) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const double width = (box.hi(d) - box.lo(d)) / n;
    for (int i = 0; i < n; ++i) {
      const double v = box.lo(d) + (perm[static_cast<std::size_t>(i)] + jitter(rng)) * width;
      pts(d, i) = std::min(v, box.hi(d));
    }
  }
  return pts;
}

std::vector<std::vector<int>> epoch_minibatches(int count, int M, std::uint64_t epoch_seed) {
  if (M < 1 || count % M != 0) {
    throw std::invalid_argument(std::to_string(count) + " points cannot be split into " + std::to_string(M) +
                                " equal minibatches");
  }
  std::vector<int> perm(static_cast<std::size_t>(count));
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(epoch_seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  const int size = count / M;
  std::vector<std::vector<int>> batches(static_cast<std::size_t>(M));
  for (int b = 0; b < M; ++b) {
    batches[static_cast<std::size_t>(b)].assign(perm.begin() + b * size, perm.begin() + (b + 1) * size);
  }
  return batches;
}

std::vector<Eigen::MatrixXd> epoch_minibatches(const Eigen::MatrixXd& points, int M, std::uint64_t epoch_seed) {
  const auto idx = epoch_minibatches(static_cast<int>(points.cols()), M, epoch_seed);
  std::vector<Eigen::MatrixXd> out;
  out.reserve(idx.size());
  for (const auto& b : idx) out.emplace_back(points(Eigen::all, b));
  return out;
}

const char* label_name(Label l) {
  switch (l) {
    case Label::kBottom: return "bottom";
    case Label::kRight: return "right";
    case Label::kTop: return "top";
    case Label::kLeft: return "left";
    case Label::kPeriodicLo: return "periodic_lo";
    case Label::kPeriodicHi: return "periodic_hi";
    case Label::kInitial: return "initial";
  }
  return "unknown";
}

Eigen::VectorXd linspace(double a, double b, int n) {
  if (n == 1) return Eigen::VectorXd::Constant(1, a);
  return Eigen::VectorXd::LinSpaced(n, a, b);
}

Eigen::VectorXd midpoints(double a, double b, int n) {
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x(i) = a + (i + 0.5) * (b - a) / n;
  return x;
}

BoundarySet boundary_points(const BoundaryLayout& layout) {
  if (layout.per_edge < 2) throw std::invalid_argument("need at least two points per edge");
  BoundarySet s;
  const int n = layout.per_edge;
  switch (layout.kind) {
    case BoundaryKind::kPerimeter: {
      // Walk the perimeter counter-clockwise from the origin; each edge owns
      // its starting corner.
      s.dirichlet.resize(2, 4 * n);
      const double L = layout.L;
      const double T = layout.T;
      for (int i = 0; i < n; ++i) {
        const double f = static_cast<double>(i) / n;
        s.dirichlet.col(i) << f * L, 0.0;
        s.dirichlet.col(n + i) << L, f * T;
        s.dirichlet.col(2 * n + i) << L - f * L, T;
        s.dirichlet.col(3 * n + i) << 0.0, T - f * T;
      }
      for (Label l : {Label::kBottom, Label::kRight, Label::kTop, Label::kLeft}) {
        s.dirichlet_labels.insert(s.dirichlet_labels.end(), static_cast<std::size_t>(n), l);
      }
      break;
    }
    case BoundaryKind::kPeriodicTime: {
      const Eigen::VectorXd t = linspace(0.0, layout.T, n);
      s.periodic_lo.resize(2, n);
      s.periodic_hi.resize(2, n);
      s.periodic_lo.row(0).setZero();
      s.periodic_lo.row(1) = t.transpose();
      s.periodic_hi.row(0).setConstant(layout.L);
      s.periodic_hi.row(1) = t.transpose();
      if (layout.initial > 0) {
        s.initial.resize(2, layout.initial);
        s.initial.row(0) = linspace(0.0, layout.L, layout.initial).transpose();
        s.initial.row(1).setZero();
      }
      break;
    }
    case BoundaryKind::kPeriodicDirichletY: {
      const Eigen::VectorXd x = linspace(0.0, layout.L, n);
      const Eigen::VectorXd y = linspace(0.0, layout.T, n);
      s.dirichlet.resize(2, 2 * n);
      s.dirichlet.block(0, 0, 1, n) = x.transpose();
      s.dirichlet.block(1, 0, 1, n).setZero();
      s.dirichlet.block(0, n, 1, n) = x.transpose();
      s.dirichlet.block(1, n, 1, n).setConstant(layout.T);
      s.dirichlet_labels.insert(s.dirichlet_labels.end(), static_cast<std::size_t>(n), Label::kBottom);
      s.dirichlet_labels.insert(s.dirichlet_labels.end(), static_cast<std::size_t>(n), Label::kTop);
      s.periodic_lo.resize(2, n);
      s.periodic_hi.resize(2, n);
      s.periodic_lo.row(0).setZero();
      s.periodic_lo.row(1) = y.transpose();
      s.periodic_hi.row(0).setConstant(layout.L);
      s.periodic_hi.row(1) = y.transpose();
      break;
    }
  }
  return s;
}

void write_points_csv(std::ostream& out, const Eigen::MatrixXd& points, const char* label) {
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    out << points(0, i) << ',' << (points.rows() > 1 ? points(1, i) : 0.0) << ',' << label << '\n';
  }
}

void BoundarySet::write_csv(std::ostream& out) const {
  out << "x,t,label\n";
  for (Eigen::Index i = 0; i < dirichlet.cols(); ++i) {
    out << dirichlet(0, i) << ',' << dirichlet(1, i) << ',' << label_name(dirichlet_labels[static_cast<std::size_t>(i)])
        << '\n';
  }
  write_points_csv(out, periodic_lo, label_name(Label::kPeriodicLo));
  write_points_csv(out, periodic_hi, label_name(Label::kPeriodicHi));
  write_points_csv(out, initial, label_name(Label::kInitial));
}

void SamplingPlan::validate() const {
  if (n_residual < 1 || minibatches < 1) throw std::invalid_argument("sampling plan needs positive sizes");
  int total = n_residual;
  for (const auto& [b, c] : refinement) total += c;
  if (total % minibatches != 0) {
    throw std::invalid_argument("N_r = " + std::to_string(total) + " is not divisible by " +
                                std::to_string(minibatches) + " minibatches");
  }
}

Eigen::MatrixXd SamplingPlan::residual_points() const {
  validate();
  Eigen::MatrixXd pts = lhs_sample(n_residual, box, seed);
  std::uint64_t sub = seed;
  for (const auto& [b, c] : refinement) {
    const Eigen::MatrixXd extra = lhs_sample(c, b, ++sub * 0x9E3779B97F4A7C15ULL);
    Eigen::MatrixXd joined(pts.rows(), pts.cols() + extra.cols());
    joined << pts, extra;
    pts = std::move(joined);
  }
  return pts;
}

}  // namespace pinnctl::sampling
