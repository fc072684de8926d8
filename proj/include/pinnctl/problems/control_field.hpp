#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

namespace pinnctl::problems {

enum class ControlKind { kNone, kBoundary, kInitial, kForcing };

const char* control_kind_name(ControlKind k);
ControlKind parse_control_kind(const std::string& s);

/// Discretized control with a fixed interpolation rule.
///
/// 1-D controls live on a periodic grid x_i = x0 + i (x1 - x0) / nx and are
/// interpolated by periodic cubic (Catmull-Rom) segments. Space-time forcing
/// adds nt time slices t_j = t0 + j (t1 - t0) / (nt - 1), bilinear in (x, t).
/// Values are stored x-fastest.
class ControlField {
 public:
  ControlField() = default;
  ControlField(ControlKind kind, double x0, double x1, Eigen::VectorXd values);
  ControlField(ControlKind kind, double x0, double x1, int nx, double t0, double t1, int nt, Eigen::VectorXd values);

  static ControlField sample(ControlKind kind, double x0, double x1, int nx, const std::function<double(double)>& f);
  static ControlField sample(double x0, double x1, int nx, double t0, double t1, int nt,
                             const std::function<double(double, double)>& f);

  ControlKind kind() const { return kind_; }
  bool is_space_time() const { return nt_ > 0; }
  int nx() const { return nx_; }
  int nt() const { return nt_; }
  double x0() const { return x0_; }
  double x1() const { return x1_; }
  double t0() const { return t0_; }
  double t1() const { return t1_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }
  double grid_x(int i) const { return x0_ + i * (x1_ - x0_) / nx_; }
  double grid_t(int j) const { return nt_ > 1 ? t0_ + j * (t1_ - t0_) / (nt_ - 1) : t0_; }

  double operator()(double x) const;
  double operator()(double x, double t) const;
  /// Values at the periodic grid of n points over [x0, x1).
  Eigen::VectorXd on_grid(int n) const;
  /// n x m matrix: n periodic x points, m time slices over [t0, t1].
  Eigen::MatrixXd on_grid(int n, int m) const;

  /// Interchange text: versioned header then one value per line (17 digits).
  std::string serialize() const;
  static ControlField parse(const std::string& text);
  void save(const std::string& path) const;
  static ControlField load(const std::string& path);

 private:
  double interp_x(const double* row, double x) const;

  ControlKind kind_ = ControlKind::kNone;
  double x0_ = 0.0;
  double x1_ = 1.0;
  int nx_ = 0;
  double t0_ = 0.0;
  double t1_ = 0.0;
  int nt_ = 0;
  Eigen::VectorXd values_;
};

}  // namespace pinnctl::problems
