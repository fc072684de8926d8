#include "pinnctl/autodiff/jet.hpp"

#include <stdexcept>
#include <string>

namespace pinnctl::ad {
namespace {

void check_order(int order) {
  if (order < 0 || order > kMaxJetOrder) {
    throw std::invalid_argument("jet order " + std::to_string(order) + " outside [0, " +
                                std::to_string(kMaxJetOrder) + "]");
  }
}

void check_same(const Jet& a, const Jet& b) {
  if (a.order() != b.order()) {
    throw std::invalid_argument("jet order mismatch: " + std::to_string(a.order()) + " vs " +
                                std::to_string(b.order()));
  }
}

constexpr double kFactorial[] = {1.0, 1.0, 2.0, 6.0, 24.0};

// Shared recurrence for pairs (p, q) with p' = q a' and q' = sign * p a'.
void paired_series(const Jet& a, Jet& p, Jet& q, double sign) {
  for (int k = 1; k <= a.order(); ++k) {
    double sp = 0.0;
    double sq = 0.0;
    for (int j = 1; j <= k; ++j) {
      sp += j * a[j] * q[k - j];
      sq += j * a[j] * p[k - j];
    }
    p[k] = sp / k;
    q[k] = sign * sq / k;
  }
}

}  // namespace

Jet::Jet(int order) : order_(order) { check_order(order); }

Jet Jet::lift(double x, int order) {
  Jet j(order);
  j.c_[0] = x;
  if (order >= 1) j.c_[1] = 1.0;
  return j;
}

Jet Jet::constant(double x, int order) {
  Jet j(order);
  j.c_[0] = x;
  return j;
}

double Jet::derivative(int k) const {
  if (k < 0 || k > order_) throw std::out_of_range("derivative order beyond jet order");
  return c_[k] * kFactorial[k];
}

Jet& Jet::operator+=(const Jet& o) {
  check_same(*this, o);
  for (int k = 0; k <= order_; ++k) c_[k] += o.c_[k];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  check_same(*this, o);
  for (int k = 0; k <= order_; ++k) c_[k] -= o.c_[k];
  return *this;
}

Jet& Jet::operator*=(const Jet& o) {
  check_same(*this, o);
  std::array<double, kMaxJetOrder + 1> r{};
  for (int k = 0; k <= order_; ++k) {
    for (int j = 0; j <= k; ++j) r[k] += c_[j] * o.c_[k - j];
  }
  c_ = r;
  return *this;
}

Jet& Jet::operator/=(const Jet& o) {
  check_same(*this, o);
  std::array<double, kMaxJetOrder + 1> r{};
  for (int k = 0; k <= order_; ++k) {
    double s = c_[k];
    for (int j = 1; j <= k; ++j) s -= o.c_[j] * r[k - j];
    r[k] = s / o.c_[0];
  }
  c_ = r;
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (int k = 0; k <= order_; ++k) c_[k] *= s;
  return *this;
}

Jet jet_lift(double x, int order) { return Jet::lift(x, order); }
Jet constant_lift(double x, int order) { return Jet::constant(x, order); }

Jet operator-(const Jet& a) { return a * -1.0; }
Jet operator-(double s, const Jet& a) { return -a + s; }
Jet operator/(double s, const Jet& a) { return Jet::constant(s, a.order()) / a; }

Jet jet_tanh(const Jet& a) {
  // t' = (1 - t^2) a', expanded coefficient by coefficient with d = 1 - t^2.
  const int order = a.order();
  Jet t(order);
  std::array<double, kMaxJetOrder + 1> d{};
  t[0] = std::tanh(a[0]);
  d[0] = 1.0 - t[0] * t[0];
  for (int k = 1; k <= order; ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j) s += j * a[j] * d[k - j];
    t[k] = s / k;
    double q = 0.0;
    for (int j = 0; j <= k; ++j) q += t[j] * t[k - j];
    d[k] = -q;
  }
  return t;
}

Jet tanh(const Jet& a) { return jet_tanh(a); }

Jet exp(const Jet& a) {
  Jet e(a.order());
  e[0] = std::exp(a[0]);
  for (int k = 1; k <= a.order(); ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j) s += j * a[j] * e[k - j];
    e[k] = s / k;
  }
  return e;
}

Jet sin(const Jet& a) {
  Jet s(a.order());
  Jet c(a.order());
  s[0] = std::sin(a[0]);
  c[0] = std::cos(a[0]);
  paired_series(a, s, c, -1.0);
  return s;
}

Jet cos(const Jet& a) {
  Jet s(a.order());
  Jet c(a.order());
  s[0] = std::sin(a[0]);
  c[0] = std::cos(a[0]);
  paired_series(a, s, c, -1.0);
  return c;
}

Jet sinh(const Jet& a) {
  Jet s(a.order());
  Jet c(a.order());
  s[0] = std::sinh(a[0]);
  c[0] = std::cosh(a[0]);
  paired_series(a, s, c, 1.0);
  return s;
}

Jet cosh(const Jet& a) {
  Jet s(a.order());
  Jet c(a.order());
  s[0] = std::sinh(a[0]);
  c[0] = std::cosh(a[0]);
  paired_series(a, s, c, 1.0);
  return c;
}

Jet pow(const Jet& a, int n) {
  if (n < 0) return 1.0 / pow(a, -n);
  Jet r = Jet::constant(1.0, a.order());
  Jet base = a;
  while (n > 0) {
    if (n & 1) r *= base;
    base *= base;
    n >>= 1;
  }
  return r;
}

}  // namespace pinnctl::ad
