#pragma once

#include <array>
#include <cmath>
#include <span>

namespace pinnctl::ad {

inline constexpr int kMaxJetOrder = 4;

/// Truncated Taylor series of a scalar along one input direction.
///
/// Coefficient k holds f^(k)/k!, so coefficient 0 is the value. Jets of
/// different order never mix; arithmetic on them throws.
class Jet {
 public:
  explicit Jet(int order = 0);

  /// Seed of the differentiation direction: [x, 1, 0, ...].
  static Jet lift(double x, int order);
  /// Constant with respect to the direction: [x, 0, 0, ...].
  static Jet constant(double x, int order);

  int order() const { return order_; }
  double value() const { return c_[0]; }
  double operator[](int k) const { return c_[k]; }
  double& operator[](int k) { return c_[k]; }

  /// k-th derivative, k! times the stored coefficient.
  double derivative(int k) const;

  std::span<const double> coeffs() const { return {c_.data(), static_cast<std::size_t>(order_ + 1)}; }

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator/=(const Jet& o);
  Jet& operator+=(double s) { c_[0] += s; return *this; }
  Jet& operator-=(double s) { c_[0] -= s; return *this; }
  Jet& operator*=(double s);
  Jet& operator/=(double s) { return *this *= 1.0 / s; }

 private:
  std::array<double, kMaxJetOrder + 1> c_{};
  int order_ = 0;
};

Jet jet_lift(double x, int order);
Jet constant_lift(double x, int order);

Jet operator-(const Jet& a);
inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator*(Jet a, const Jet& b) { return a *= b; }
inline Jet operator/(Jet a, const Jet& b) { return a /= b; }
inline Jet operator+(Jet a, double s) { return a += s; }
inline Jet operator+(double s, Jet a) { return a += s; }
inline Jet operator-(Jet a, double s) { return a -= s; }
Jet operator-(double s, const Jet& a);
inline Jet operator*(Jet a, double s) { return a *= s; }
inline Jet operator*(double s, Jet a) { return a *= s; }
inline Jet operator/(Jet a, double s) { return a /= s; }
Jet operator/(double s, const Jet& a);

Jet jet_tanh(const Jet& a);
Jet tanh(const Jet& a);
Jet exp(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet sinh(const Jet& a);
Jet cosh(const Jet& a);
Jet pow(const Jet& a, int n);

}  // namespace pinnctl::ad
