#include "pinnctl/problems/control_field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pinnctl::problems {
namespace {

constexpr const char* kMagic = "pinnctl-control";
constexpr int kVersion = 1;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int wrap(int i, int n) { return ((i % n) + n) % n; }

}  // namespace

const char* control_kind_name(ControlKind k) {
  switch (k) {
    case ControlKind::kNone: return "none";
    case ControlKind::kBoundary: return "boundary";
    case ControlKind::kInitial: return "initial";
    case ControlKind::kForcing: return "forcing";
  }
  return "none";
}

ControlKind parse_control_kind(const std::string& s) {
  if (s == "none") return ControlKind::kNone;
  if (s == "boundary") return ControlKind::kBoundary;
  if (s == "initial") return ControlKind::kInitial;
  if (s == "forcing") return ControlKind::kForcing;
  throw std::invalid_argument("unknown control kind '" + s + "'");
}

ControlField::ControlField(ControlKind kind, double x0, double x1, Eigen::VectorXd values)
    : kind_(kind), x0_(x0), x1_(x1), nx_(static_cast<int>(values.size())), values_(std::move(values)) {
  if (nx_ < 4) throw std::invalid_argument("1-D control needs at least 4 grid values");
  if (!(x1_ > x0_)) throw std::invalid_argument("control interval is empty");
}

ControlField::ControlField(ControlKind kind, double x0, double x1, int nx, double t0, double t1, int nt,
                           Eigen::VectorXd values)
    : kind_(kind), x0_(x0), x1_(x1), nx_(nx), t0_(t0), t1_(t1), nt_(nt), values_(std::move(values)) {
  if (nx_ < 4 || nt_ < 2) throw std::invalid_argument("space-time control needs nx >= 4 and nt >= 2");
  if (values_.size() != static_cast<Eigen::Index>(nx) * nt) {
    throw std::invalid_argument("space-time control has " + std::to_string(values_.size()) + " values, expected " +
                                std::to_string(nx * nt));
  }
  if (!(x1_ > x0_) || !(t1_ > t0_)) throw std::invalid_argument("control domain is empty");
}

ControlField ControlField::sample(ControlKind kind, double x0, double x1, int nx,
                                  const std::function<double(double)>& f) {
  Eigen::VectorXd v(nx);
  for (int i = 0; i < nx; ++i) v(i) = f(x0 + i * (x1 - x0) / nx);
  return ControlField(kind, x0, x1, std::move(v));
}

ControlField ControlField::sample(double x0, double x1, int nx, double t0, double t1, int nt,
                                  const std::function<double(double, double)>& f) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(nx) * nt);
  for (int j = 0; j < nt; ++j) {
    const double t = t0 + j * (t1 - t0) / (nt - 1);
    for (int i = 0; i < nx; ++i) v(static_cast<Eigen::Index>(j) * nx + i) = f(x0 + i * (x1 - x0) / nx, t);
  }
  return ControlField(ControlKind::kForcing, x0, x1, nx, t0, t1, nt, std::move(v));
}

double ControlField::interp_x(const double* row, double x) const {
  const double h = (x1_ - x0_) / nx_;
  const double s = (x - x0_) / h;
  const double fl = std::floor(s);
  const double u = s - fl;
  const int i = wrap(static_cast<int>(fl), nx_);
  const double p0 = row[wrap(i - 1, nx_)];
  const double p1 = row[i];
  const double p2 = row[wrap(i + 1, nx_)];
  const double p3 = row[wrap(i + 2, nx_)];
  // Catmull-Rom: cubic Hermite with centered-difference slopes.
  const double m1 = 0.5 * (p2 - p0);
  const double m2 = 0.5 * (p3 - p1);
  const double u2 = u * u;
  const double u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * p1 + (u3 - 2 * u2 + u) * m1 + (-2 * u3 + 3 * u2) * p2 + (u3 - u2) * m2;
}

double ControlField::operator()(double x) const {
  if (nt_ > 0) throw std::invalid_argument("space-time control evaluated without t");
  return interp_x(values_.data(), x);
}

double ControlField::operator()(double x, double t) const {
  if (nt_ == 0) return (*this)(x);
  const double s = std::clamp((t - t0_) / (t1_ - t0_) * (nt_ - 1), 0.0, static_cast<double>(nt_ - 1));
  const int j = std::min(static_cast<int>(s), nt_ - 2);
  const double w = s - j;
  // Linear in x within each slice (bilinear overall).
  const double h = (x1_ - x0_) / nx_;
  const double r = (x - x0_) / h;
  const double fl = std::floor(r);
  const double u = r - fl;
  const int i = wrap(static_cast<int>(fl), nx_);
  const int i1 = wrap(i + 1, nx_);
  const double* a = values_.data() + static_cast<Eigen::Index>(j) * nx_;
  const double* b = a + nx_;
  return (1 - w) * ((1 - u) * a[i] + u * a[i1]) + w * ((1 - u) * b[i] + u * b[i1]);
}

Eigen::VectorXd ControlField::on_grid(int n) const {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = (*this)(x0_ + i * (x1_ - x0_) / n);
  return v;
}

Eigen::MatrixXd ControlField::on_grid(int n, int m) const {
  Eigen::MatrixXd v(n, m);
  for (int j = 0; j < m; ++j) {
    const double t = m > 1 ? t0_ + j * (t1_ - t0_) / (m - 1) : t0_;
    for (int i = 0; i < n; ++i) v(i, j) = (*this)(x0_ + i * (x1_ - x0_) / n, t);
  }
  return v;
}

std::string ControlField::serialize() const {
  std::ostringstream out;
  out << kMagic << " v" << kVersion << '\n';
  out << "kind " << control_kind_name(kind_) << '\n';
  out << "interpolation " << (nt_ > 0 ? "bilinear" : "cubic-periodic") << '\n';
  out << "x " << fmt17(x0_) << ' ' << fmt17(x1_) << ' ' << nx_ << '\n';
  out << "t " << fmt17(t0_) << ' ' << fmt17(t1_) << ' ' << nt_ << '\n';
  out << "values " << values_.size() << '\n';
  for (Eigen::Index i = 0; i < values_.size(); ++i) out << fmt17(values_(i)) << '\n';
  return out.str();
}

ControlField ControlField::parse(const std::string& text) {
  std::istringstream in(text);
  std::string magic, version, key, kind, interp;
  in >> magic >> version;
  if (magic != kMagic) throw std::invalid_argument("not a control interchange file");
  if (version != "v" + std::to_string(kVersion)) throw std::invalid_argument("unsupported control version " + version);
  double x0, x1, t0, t1;
  int nx, nt;
  Eigen::Index count;
  in >> key >> kind;
  if (key != "kind") throw std::invalid_argument("control file: expected 'kind'");
  in >> key >> interp;
  if (key != "interpolation") throw std::invalid_argument("control file: expected 'interpolation'");
  in >> key >> x0 >> x1 >> nx;
  if (key != "x") throw std::invalid_argument("control file: expected 'x'");
  in >> key >> t0 >> t1 >> nt;
  if (key != "t") throw std::invalid_argument("control file: expected 't'");
  in >> key >> count;
  if (key != "values" || !in) throw std::invalid_argument("control file: malformed header");
  Eigen::VectorXd v(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    if (!(in >> v(i))) throw std::invalid_argument("control file: expected " + std::to_string(count) + " values");
  }
  if (nt > 0) return ControlField(parse_control_kind(kind), x0, x1, nx, t0, t1, nt, std::move(v));
  if (count != nx) throw std::invalid_argument("control file: value count does not match grid");
  return ControlField(parse_control_kind(kind), x0, x1, std::move(v));
}

void ControlField::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write control " + path);
  out << serialize();
}

ControlField ControlField::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read control " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace pinnctl::problems
