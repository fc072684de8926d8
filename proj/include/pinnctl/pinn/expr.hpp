#pragma once

#include "pinnctl/autodiff/derivatives.hpp"
#include "pinnctl/autodiff/tape.hpp"

namespace pinnctl::pinn {

/// Tape node handle with arithmetic, so residual<T> can be instantiated on
/// tape expressions as well as on doubles.
struct Expr {
  ad::Tape* tape = nullptr;
  ad::NodeId id = -1;
};

inline Expr operator+(Expr a, Expr b) { return {a.tape, a.tape->add(a.id, b.id)}; }
inline Expr operator-(Expr a, Expr b) { return {a.tape, a.tape->sub(a.id, b.id)}; }
inline Expr operator*(Expr a, Expr b) { return {a.tape, a.tape->mul(a.id, b.id)}; }
inline Expr operator*(double s, Expr a) { return {a.tape, a.tape->scale(a.id, s)}; }
inline Expr operator*(Expr a, double s) { return s * a; }
inline Expr operator+(Expr a, double s) { return {a.tape, a.tape->shift(a.id, s)}; }
inline Expr operator-(Expr a, double s) { return a + (-s); }

inline ad::Bundle<Expr> expr_bundle(ad::Tape& t, const ad::NodeBundle& n) {
  auto e = [&t](ad::NodeId id) { return Expr{&t, id}; };
  return {e(n.u), e(n.du_dx), e(n.d2u_dx2), e(n.d3u_dx3), e(n.d4u_dx4), e(n.du_dt), e(n.d2u_dt2)};
}

}  // namespace pinnctl::pinn
