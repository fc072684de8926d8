#include "pinnctl/autodiff/tape.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <string>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace pinnctl::ad {
namespace {

constexpr double kFactorial[] = {1.0, 1.0, 2.0, 6.0, 24.0};
constexpr int kMaxOrder = 4;

// Coefficient index for term k of direction dir (k = 0 is the shared value).
inline int idx(const JetLayout& l, int dir, int k) { return l.index(dir, k); }

using Coeffs = std::array<double*, kMaxOrder + 1>;

Coeffs coeff_ptrs(double* base, const JetLayout& l, int dir, Eigen::Index S) {
  Coeffs c{};
  for (int k = 0; k <= l.orders[dir]; ++k) c[static_cast<std::size_t>(k)] = base + idx(l, dir, k) * S;
  return c;
}

template <class F>
void dispatch_order(int order, F&& f) {
  switch (order) {
    case 1: f.template operator()<1>(); break;
    case 2: f.template operator()<2>(); break;
    case 3: f.template operator()<3>(); break;
    case 4: f.template operator()<4>(); break;
    default: throw std::invalid_argument("jet order " + std::to_string(order) + " not supported on tape");
  }
}

// tanh through Eigen's vectorized exp; |x| clamped where tanh is 1 in double.
void tanh_value(const double* a, double* t, double* d, Eigen::Index S) {
  Eigen::Map<const Eigen::ArrayXd> x(a, S);
  Eigen::Map<Eigen::ArrayXd> tv(t, S);
  Eigen::Map<Eigen::ArrayXd> dv(d, S);
  dv = (2.0 * x.max(-20.0).min(20.0)).exp();
  tv = (dv - 1.0) / (dv + 1.0);
  dv = 1.0 - tv.square();
}

template <int K>
void tanh_series_forward(const Coeffs& a, Coeffs& t, Coeffs& d, Eigen::Index S) {
#pragma GCC ivdep
  for (Eigen::Index e = 0; e < S; ++e) {
    double av[K + 1], tv[K + 1], dv[K + 1];
    for (int k = 0; k <= K; ++k) av[k] = a[k][e];
    tv[0] = t[0][e];
    dv[0] = d[0][e];
    for (int k = 1; k <= K; ++k) {
      double s = 0.0;
      for (int j = 1; j <= k; ++j) s += (static_cast<double>(j) / k) * av[j] * dv[k - j];
      tv[k] = s;
      if (k < K) {
        double q = 0.0;
        for (int j = 0; j <= k; ++j) q += tv[j] * tv[k - j];
        dv[k] = -q;
      }
    }
    for (int k = 1; k <= K; ++k) t[k][e] = tv[k];
    for (int k = 1; k < K; ++k) d[k][e] = dv[k];
  }
}

// Reverse of the series recurrence for one direction at element e.
// Coefficient k >= 1 of this direction sits at block off + k - 1.
template <int K>
inline void tanh_dir_backward(const double* a, const double* t, const double* d, const double* g, Eigen::Index S,
                              Eigen::Index e, int off, double t0, double d0, double& gt0, double& gd0, double* out) {
  if constexpr (K > 0) {
    double av[K + 1], tv[K + 1], dv[K + 1], gt[K + 1], gd[K + 1], ga[K + 1];
    tv[0] = t0;
    dv[0] = d0;
    gt[0] = 0.0;
    av[0] = 0.0;
    for (int k = 0; k <= K; ++k) {
      gd[k] = 0.0;
      ga[k] = 0.0;
    }
    for (int k = 1; k <= K; ++k) {
      const Eigen::Index c = (off + k - 1) * S + e;
      av[k] = a[c];
      tv[k] = t[c];
      gt[k] = g[c];
      if (k < K) dv[k] = d[c];
    }
    for (int k = K; k >= 1; --k) {
      if (k < K) {
        for (int m = 0; m <= k; ++m) gt[m] -= 2.0 * tv[k - m] * gd[k];
      }
      for (int j = 1; j <= k; ++j) {
        const double c = static_cast<double>(j) / k;
        ga[j] += c * dv[k - j] * gt[k];
        gd[k - j] += c * av[j] * gt[k];
      }
    }
    gt0 += gt[0];
    gd0 += gd[0];
    for (int k = 1; k <= K; ++k) out[off + k - 1] = ga[k];
  }
}

// Full reverse of a tanh node; writes (Fresh) or accumulates into ga.
template <int K0, int K1, bool Fresh>
void tanh_backward(const double* a, const double* t, const double* d, const double* g, double* ga, Eigen::Index S) {
  constexpr int C = 1 + K0 + K1;
#pragma GCC ivdep
  for (Eigen::Index e = 0; e < S; ++e) {
    double out[C];
    const double t0 = t[e];
    const double d0 = d[e];
    double gt0 = g[e];
    double gd0 = 0.0;
    tanh_dir_backward<K0>(a, t, d, g, S, e, 1, t0, d0, gt0, gd0, out);
    tanh_dir_backward<K1>(a, t, d, g, S, e, 1 + K0, t0, d0, gt0, gd0, out);
    out[0] = d0 * (gt0 - 2.0 * t0 * gd0);
    for (int c = 0; c < C; ++c) {
      if constexpr (Fresh) {
        ga[c * S + e] = out[c];
      } else {
        ga[c * S + e] += out[c];
      }
    }
  }
}

template <class F>
void dispatch_layout(const JetLayout& l, F&& f) {
  if (l.orders[0] < 0 || l.orders[0] > 4 || l.orders[1] < 0 || l.orders[1] > 2) {
    throw std::invalid_argument("jet layout not supported on tape");
  }
  switch (l.orders[0] * 3 + l.orders[1]) {
    case 0: f.template operator()<0, 0>(); break;
    case 1: f.template operator()<0, 1>(); break;
    case 2: f.template operator()<0, 2>(); break;
    case 3: f.template operator()<1, 0>(); break;
    case 4: f.template operator()<1, 1>(); break;
    case 5: f.template operator()<1, 2>(); break;
    case 6: f.template operator()<2, 0>(); break;
    case 7: f.template operator()<2, 1>(); break;
    case 8: f.template operator()<2, 2>(); break;
    case 9: f.template operator()<3, 0>(); break;
    case 10: f.template operator()<3, 1>(); break;
    case 11: f.template operator()<3, 2>(); break;
    case 12: f.template operator()<4, 0>(); break;
    case 13: f.template operator()<4, 1>(); break;
    case 14: f.template operator()<4, 2>(); break;
  }
}

}  // namespace

Tape::Tape(std::size_t parameter_count) : parameter_count_(parameter_count) {
  // Node buffers are a few hundred kB; keep them on the heap instead of fresh
  // mmap pages so repeated tapes do not pay page faults.
  static std::once_flag once;
  std::call_once(once, [] {
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 1 << 28);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  });
}

NodeId Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return static_cast<NodeId>(nodes_.size() - 1);
}

const Tape::Node& Tape::at(NodeId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) {
    throw std::out_of_range("tape node " + std::to_string(id) + " out of range");
  }
  return nodes_[static_cast<std::size_t>(id)];
}

void Tape::check_same_shape(const Node& a, const Node& b, const char* what) const {
  if (a.value.rows() != b.value.rows() || a.value.cols != b.value.cols || !(a.value.layout == b.value.layout)) {
    throw std::invalid_argument(std::string("shape or jet layout mismatch in ") + what);
  }
}

const JetBatch& Tape::value(NodeId id) const { return at(id).value; }

double Tape::scalar(NodeId id) const {
  const auto& v = at(id).value;
  if (v.rows() != 1 || v.cols != 1) throw std::invalid_argument("node is not a scalar");
  return v.data(0, 0);
}

Op Tape::op(NodeId id) const { return at(id).op; }

std::vector<NodeId> Tape::inputs(NodeId id) const {
  std::vector<NodeId> out;
  for (NodeId i : at(id).in) {
    if (i >= 0) out.push_back(i);
  }
  return out;
}

NodeId Tape::constant(JetBatch value) {
  Node n{.op = Op::kConstant};
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Tape::parameter(const Eigen::MatrixXd& value, std::size_t offset) {
  if (offset + static_cast<std::size_t>(value.size()) > parameter_count_) {
    throw std::out_of_range("parameter leaf exceeds flat parameter vector");
  }
  Node n{.op = Op::kParameter};
  n.value = JetBatch::plain(value);
  n.offset = offset;
  n.needs_grad = true;
  return push(std::move(n));
}

NodeId Tape::affine(NodeId weight, NodeId bias, NodeId x) {
  const Node& w = at(weight);
  const Node& b = at(bias);
  const Node& xn = at(x);
  if (w.value.cols != xn.value.rows()) {
    throw std::invalid_argument("affine: weight has " + std::to_string(w.value.cols) + " columns but input has " +
                                std::to_string(xn.value.rows()) + " rows");
  }
  if (b.value.rows() != w.value.rows() || b.value.cols != 1) {
    throw std::invalid_argument("affine: bias shape does not match weight rows");
  }
  Node n{.op = Op::kAffine, .in = {weight, bias, x}};
  n.value.layout = xn.value.layout;
  n.value.cols = xn.value.cols;
  n.value.data.resize(w.value.data.rows(), xn.value.data.cols());
  n.value.data.noalias() = w.value.data * xn.value.data;
  n.value.block(0).colwise() += b.value.data.col(0);
  n.needs_grad = w.needs_grad || b.needs_grad || xn.needs_grad;
  return push(std::move(n));
}

NodeId Tape::tanh(NodeId x) {
  const Node& xn = at(x);
  const JetLayout& l = xn.value.layout;
  Node n{.op = Op::kTanh, .in = {x}};
  n.value.layout = l;
  n.value.cols = xn.value.cols;
  n.value.data.resize(xn.value.data.rows(), xn.value.data.cols());
  n.needs_grad = xn.needs_grad;
  // aux holds the series of 1 - t^2 in the same block layout (block 0 = d0).
  n.aux.resize(xn.value.data.rows(), xn.value.data.cols());
  const Eigen::Index S = xn.value.rows() * xn.value.cols;
  tanh_value(xn.value.data.data(), n.value.data.data(), n.aux.data(), S);
  for (int dir = 0; dir < 2; ++dir) {
    const int order = l.orders[dir];
    if (order == 0) continue;
    const Coeffs a = coeff_ptrs(const_cast<double*>(xn.value.data.data()), l, dir, S);
    Coeffs t = coeff_ptrs(n.value.data.data(), l, dir, S);
    Coeffs d = coeff_ptrs(n.aux.data(), l, dir, S);
    dispatch_order(order, [&]<int K>() { tanh_series_forward<K>(a, t, d, S); });
  }
  return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
  const Node& an = at(a);
  const Node& bn = at(b);
  check_same_shape(an, bn, "add");
  Node n{.op = Op::kAdd, .in = {a, b}};
  n.value = an.value;
  n.value.data += bn.value.data;
  n.needs_grad = an.needs_grad || bn.needs_grad;
  return push(std::move(n));
}

NodeId Tape::sub(NodeId a, NodeId b) {
  const Node& an = at(a);
  const Node& bn = at(b);
  check_same_shape(an, bn, "sub");
  Node n{.op = Op::kSub, .in = {a, b}};
  n.value = an.value;
  n.value.data -= bn.value.data;
  n.needs_grad = an.needs_grad || bn.needs_grad;
  return push(std::move(n));
}

NodeId Tape::mul(NodeId a, NodeId b) {
  const Node& an = at(a);
  const Node& bn = at(b);
  check_same_shape(an, bn, "mul");
  const JetLayout& l = an.value.layout;
  Node n{.op = Op::kMul, .in = {a, b}};
  n.value = JetBatch(an.value.rows(), an.value.cols, l);
  n.value.block(0) = (an.value.block(0).array() * bn.value.block(0).array()).matrix();
  for (int dir = 0; dir < 2; ++dir) {
    for (int k = 1; k <= l.orders[dir]; ++k) {
      auto c = n.value.block(idx(l, dir, k));
      for (int j = 0; j <= k; ++j) {
        c.array() += an.value.block(idx(l, dir, j)).array() * bn.value.block(idx(l, dir, k - j)).array();
      }
    }
  }
  n.needs_grad = an.needs_grad || bn.needs_grad;
  return push(std::move(n));
}

NodeId Tape::scale(NodeId a, double s) {
  const Node& an = at(a);
  Node n{.op = Op::kScale, .in = {a}, .s = s};
  n.value = an.value;
  n.value.data *= s;
  n.needs_grad = an.needs_grad;
  return push(std::move(n));
}

NodeId Tape::shift(NodeId a, double s) {
  const Node& an = at(a);
  Node n{.op = Op::kShift, .in = {a}, .s = s};
  n.value = an.value;
  n.value.block(0).array() += s;
  n.needs_grad = an.needs_grad;
  return push(std::move(n));
}

NodeId Tape::coefficient(NodeId a, int dir, int k, double factor) {
  const Node& an = at(a);
  const JetLayout& l = an.value.layout;
  if (dir < 0 || dir > 1 || k < 0 || (k > 0 && k > l.orders[dir])) {
    throw std::out_of_range("coefficient " + std::to_string(k) + " of direction " + std::to_string(dir) +
                            " not carried by jet layout");
  }
  Node n{.op = Op::kCoefficient, .in = {a}, .s = factor * kFactorial[k], .dir = dir, .k = k};
  n.value = JetBatch::plain(n.s * an.value.block(idx(l, dir, k)));
  n.needs_grad = an.needs_grad;
  return push(std::move(n));
}

NodeId Tape::mean(NodeId a) {
  const Node& an = at(a);
  if (an.value.cols == 0 || an.value.rows() == 0) throw std::invalid_argument("mean of empty node");
  Node n{.op = Op::kMean, .in = {a}};
  n.value = JetBatch::plain(Eigen::MatrixXd::Constant(1, 1, an.value.value().mean()));
  n.needs_grad = an.needs_grad;
  return push(std::move(n));
}

NodeId Tape::sum(NodeId a) {
  const Node& an = at(a);
  Node n{.op = Op::kSum, .in = {a}};
  n.value = JetBatch::plain(Eigen::MatrixXd::Constant(1, 1, an.value.value().sum()));
  n.needs_grad = an.needs_grad;
  return push(std::move(n));
}

NodeId Tape::element(NodeId a, Eigen::Index row, Eigen::Index col) {
  const Node& an = at(a);
  if (row < 0 || row >= an.value.rows() || col < 0 || col >= an.value.cols) {
    throw std::out_of_range("element index out of range");
  }
  Node n{.op = Op::kElement, .in = {a}, .row = row, .col = col};
  n.value = JetBatch::plain(Eigen::MatrixXd::Constant(1, 1, an.value.value()(row, col)));
  n.needs_grad = an.needs_grad;
  return push(std::move(n));
}

Eigen::VectorXd Tape::grad_params(NodeId loss) const {
  const Node& ln = at(loss);
  if (ln.value.rows() != 1 || ln.value.cols != 1 || ln.value.layout.coeff_count() != 1) {
    throw std::invalid_argument("grad_params: loss node must be an order-0 scalar");
  }
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(parameter_count_));
  if (!ln.needs_grad) return grad;

  const auto count = static_cast<std::size_t>(loss) + 1;
  std::vector<Eigen::MatrixXd> bar(count);
  auto bar_of = [&](NodeId id) -> Eigen::MatrixXd& {
    auto& b = bar[static_cast<std::size_t>(id)];
    if (b.size() == 0) {
      const auto& v = nodes_[static_cast<std::size_t>(id)].value.data;
      b = Eigen::MatrixXd::Zero(v.rows(), v.cols());
    }
    return b;
  };
  bar_of(loss)(0, 0) = 1.0;

  for (auto i = static_cast<NodeId>(count) - 1; i >= 0; --i) {
    const Node& n = nodes_[static_cast<std::size_t>(i)];
    auto& g = bar[static_cast<std::size_t>(i)];
    if (!n.needs_grad || g.size() == 0) continue;

    switch (n.op) {
      case Op::kConstant:
        break;
      case Op::kParameter: {
        // Flat layout is row-major per matrix.
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> dst(
            grad.data() + n.offset, g.rows(), g.cols());
        dst += g;
        break;
      }
      case Op::kAffine: {
        const Node& w = nodes_[static_cast<std::size_t>(n.in[0])];
        const Node& b = nodes_[static_cast<std::size_t>(n.in[1])];
        const Node& x = nodes_[static_cast<std::size_t>(n.in[2])];
        if (w.needs_grad) bar_of(n.in[0]).noalias() += g * x.value.data.transpose();
        if (b.needs_grad) bar_of(n.in[1]).col(0) += g.middleCols(0, n.value.cols).rowwise().sum();
        if (x.needs_grad) {
          auto& bx = bar[static_cast<std::size_t>(n.in[2])];
          if (bx.size() == 0) {
            bx.resize(x.value.data.rows(), x.value.data.cols());
            bx.noalias() = w.value.data.transpose() * g;
          } else {
            bx.noalias() += w.value.data.transpose() * g;
          }
        }
        break;
      }
      case Op::kTanh: {
        const Node& xn = nodes_[static_cast<std::size_t>(n.in[0])];
        const Eigen::Index S = n.value.rows() * n.value.cols;
        auto& ga = bar[static_cast<std::size_t>(n.in[0])];
        const bool fresh = ga.size() == 0;
        if (fresh) ga.resize(n.value.data.rows(), n.value.data.cols());
        const double* av = xn.value.data.data();
        const double* tv = n.value.data.data();
        const double* dv = n.aux.data();
        dispatch_layout(n.value.layout, [&]<int K0, int K1>() {
          if (fresh) {
            tanh_backward<K0, K1, true>(av, tv, dv, g.data(), ga.data(), S);
          } else {
            tanh_backward<K0, K1, false>(av, tv, dv, g.data(), ga.data(), S);
          }
        });
        break;
      }
      case Op::kAdd:
        if (nodes_[static_cast<std::size_t>(n.in[0])].needs_grad) bar_of(n.in[0]) += g;
        if (nodes_[static_cast<std::size_t>(n.in[1])].needs_grad) bar_of(n.in[1]) += g;
        break;
      case Op::kSub:
        if (nodes_[static_cast<std::size_t>(n.in[0])].needs_grad) bar_of(n.in[0]) += g;
        if (nodes_[static_cast<std::size_t>(n.in[1])].needs_grad) bar_of(n.in[1]) -= g;
        break;
      case Op::kMul: {
        const Node& an = nodes_[static_cast<std::size_t>(n.in[0])];
        const Node& bn = nodes_[static_cast<std::size_t>(n.in[1])];
        const JetLayout& l = n.value.layout;
        const Eigen::Index cols = n.value.cols;
        auto blk = [cols](auto& m, int c) { return m.middleCols(c * cols, cols).array(); };
        const auto& av = an.value.data;
        const auto& bv = bn.value.data;
        if (an.needs_grad) {
          Eigen::MatrixXd& ga = bar_of(n.in[0]);
          blk(ga, 0) += blk(g, 0) * blk(bv, 0);
          for (int dir = 0; dir < 2; ++dir) {
            for (int k = 1; k <= l.orders[dir]; ++k) {
              for (int j = 0; j <= k; ++j) blk(ga, idx(l, dir, j)) += blk(g, idx(l, dir, k)) * blk(bv, idx(l, dir, k - j));
            }
          }
        }
        if (bn.needs_grad) {
          Eigen::MatrixXd& gb = bar_of(n.in[1]);
          blk(gb, 0) += blk(g, 0) * blk(av, 0);
          for (int dir = 0; dir < 2; ++dir) {
            for (int k = 1; k <= l.orders[dir]; ++k) {
              for (int j = 0; j <= k; ++j) blk(gb, idx(l, dir, k - j)) += blk(g, idx(l, dir, k)) * blk(av, idx(l, dir, j));
            }
          }
        }
        break;
      }
      case Op::kScale:
        bar_of(n.in[0]) += n.s * g;
        break;
      case Op::kShift:
        bar_of(n.in[0]) += g;
        break;
      case Op::kCoefficient: {
        const Node& an = nodes_[static_cast<std::size_t>(n.in[0])];
        const int c = idx(an.value.layout, n.dir, n.k);
        bar_of(n.in[0]).middleCols(c * an.value.cols, an.value.cols) += n.s * g;
        break;
      }
      case Op::kMean: {
        const Node& an = nodes_[static_cast<std::size_t>(n.in[0])];
        const double w = g(0, 0) / static_cast<double>(an.value.rows() * an.value.cols);
        bar_of(n.in[0]).middleCols(0, an.value.cols).array() += w;
        break;
      }
      case Op::kSum: {
        const Node& an = nodes_[static_cast<std::size_t>(n.in[0])];
        bar_of(n.in[0]).middleCols(0, an.value.cols).array() += g(0, 0);
        break;
      }
      case Op::kElement:
        bar_of(n.in[0])(n.row, n.col) += g(0, 0);
        break;
    }
    // Each node is visited once; its adjoint is no longer needed.
    g.resize(0, 0);
  }
  return grad;
}

Eigen::VectorXd grad_params(const Tape& tape, NodeId loss_node) { return tape.grad_params(loss_node); }

}  // namespace pinnctl::ad
