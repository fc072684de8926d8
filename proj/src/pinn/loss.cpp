#include "pinnctl/pinn/loss.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "pinnctl/pinn/expr.hpp"

namespace pinnctl::pinn {

using ad::NodeId;
using ad::Tape;
using problems::CostKind;
using problems::Family;
using problems::ProblemSpec;
using sampling::Label;

namespace {

constexpr ad::JetLayout kValues{{0, 0}};

void check_finite(double v, const char* term) {
  if (!std::isfinite(v)) throw NonFiniteLoss(std::string("non-finite ") + term + " loss term");
}

bool controls_top_wall(const ProblemSpec& p) { return p.family == Family::kLaplace && p.is_control; }
bool controls_initial(const ProblemSpec& p) { return p.family == Family::kBurgers && p.is_control; }
bool controls_forcing(const ProblemSpec& p) { return p.family == Family::kKs && p.is_control; }

Eigen::MatrixXd control_inputs(const net::MlpParams& control, const Eigen::MatrixXd& pts) {
  return control.input_dim() == 1 ? Eigen::MatrixXd(pts.topRows(1)) : pts;
}

NodeId sum_of_squares(Tape& t, NodeId d) { return t.sum(t.mul(d, d)); }

Eigen::MatrixXd row_values(const Eigen::MatrixXd& pts, const std::function<double(double, double)>& f) {
  Eigen::MatrixXd v(1, pts.cols());
  for (Eigen::Index i = 0; i < pts.cols(); ++i) v(0, i) = f(pts(0, i), pts(1, i));
  return v;
}

double bundle_order(const ad::DerivativeBundle& b, int k) {
  const std::array<double, 5> xs{b.u, b.du_dx, b.d2u_dx2, b.d3u_dx3, b.d4u_dx4};
  return xs[static_cast<std::size_t>(k)];
}

NodeId bundle_order(const ad::NodeBundle& b, int k) {
  const std::array<NodeId, 5> xs{b.u, b.du_dx, b.d2u_dx2, b.d3u_dx3, b.d4u_dx4};
  return xs[static_cast<std::size_t>(k)];
}

// Cost-term weight in front of the sum over cost points.
double cost_factor(const ProblemSpec& p, int n) {
  return p.cost == CostKind::kWallFlux ? p.L / n : 0.5 * p.L / n;
}

double cost_target(const ProblemSpec& p, double x) { return p.target(x); }

}  // namespace

LossContext::LossContext(ProblemSpec problem, LossWeights weights, int chunk)
    : problem_(std::move(problem)), weights_(weights), chunk_(chunk) {
  if (chunk_ < 1) throw std::invalid_argument("chunk size must be positive");
  boundary_ = sampling::boundary_points(problem_.boundary);
  cost_x_ = sampling::midpoints(0.0, problem_.L, problem_.cost_points);
}

LossComponents LossContext::evaluate(const net::MlpParams& state, const net::MlpParams* control,
                                     const Eigen::MatrixXd& batch, Eigen::VectorXd* grad) const {
  const ProblemSpec& p = problem_;
  const LossWeights& w = weights_;
  if (batch.cols() < 1) throw std::invalid_argument("residual batch is empty");
  if (p.is_control && !control) throw std::invalid_argument(p.name + " needs a control network");
  const std::size_t pu = state.parameter_count();
  const std::size_t np = pu + (control ? control->parameter_count() : 0);
  if (grad) *grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(np));
  const bool use_control = control && p.is_control;

  LossComponents out;
  const double n = static_cast<double>(batch.cols());
  const double volume = 0.5 * p.L * p.T;

  // Residual (and the KS Monte-Carlo cost) chunk by chunk.
  for (Eigen::Index c0 = 0; c0 < batch.cols(); c0 += chunk_) {
    const Eigen::Index m = std::min<Eigen::Index>(chunk_, batch.cols() - c0);
    const Eigen::MatrixXd pts = batch.middleCols(c0, m);
    Tape t(np);
    const NodeId u = net::mlp_on_tape(t, state, 0, pts, p.residual_layout());
    const auto b = expr_bundle(t, ad::derivative_nodes(t, u, state));
    Expr f;
    bool has_f = false;
    if (use_control && controls_forcing(p)) {
      f = {&t, net::mlp_on_tape(t, *control, pu, control_inputs(*control, pts), kValues)};
      has_f = true;
    } else if (p.forcing) {
      f = {&t, t.constant(row_values(pts, p.forcing))};
      has_f = true;
    }
    const Expr r = problems::residual<Expr>(p, b, has_f ? &f : nullptr);
    const NodeId rr = sum_of_squares(t, r.id);
    out.residual += t.scalar(rr) / n;
    NodeId loss = t.scale(rr, w.w_r / n);
    if (use_control && p.cost == CostKind::kQuadraticRegulator) {
      NodeId q = sum_of_squares(t, b.u.id);
      if (has_f) q = t.add(q, t.scale(sum_of_squares(t, f.id), p.sigma));
      out.cost += volume * t.scalar(q) / n;
      loss = t.add(loss, t.scale(q, w.w_J * volume / n));
    }
    if (grad) *grad += t.grad_params(loss);
  }
  check_finite(out.residual, "residual");

  // Boundary, initial and wall/terminal cost share one tape.
  Tape t(np);
  NodeId total = t.constant(Eigen::MatrixXd::Zero(1, 1));
  const sampling::BoundarySet& bs = boundary_;
  double sb = 0.0;
  if (bs.dirichlet.cols() > 0) {
    std::vector<Eigen::Index> fixed, ctl;
    for (Eigen::Index i = 0; i < bs.dirichlet.cols(); ++i) {
      const bool c = use_control && controls_top_wall(p) && bs.dirichlet_labels[static_cast<std::size_t>(i)] == Label::kTop;
      (c ? ctl : fixed).push_back(i);
    }
    if (!fixed.empty()) {
      Eigen::MatrixXd pts(2, static_cast<Eigen::Index>(fixed.size()));
      Eigen::MatrixXd g(1, pts.cols());
      for (Eigen::Index k = 0; k < pts.cols(); ++k) {
        const Eigen::Index i = fixed[static_cast<std::size_t>(k)];
        pts.col(k) = bs.dirichlet.col(i);
        g(0, k) = p.dirichlet(bs.dirichlet_labels[static_cast<std::size_t>(i)], pts(0, k), pts(1, k));
      }
      const NodeId u = net::mlp_on_tape(t, state, 0, pts, kValues);
      const NodeId s = sum_of_squares(t, t.sub(u, t.constant(g)));
      sb += t.scalar(s);
      total = t.add(total, s);
    }
    if (!ctl.empty()) {
      Eigen::MatrixXd pts(2, static_cast<Eigen::Index>(ctl.size()));
      for (Eigen::Index k = 0; k < pts.cols(); ++k) pts.col(k) = bs.dirichlet.col(ctl[static_cast<std::size_t>(k)]);
      const NodeId u = net::mlp_on_tape(t, state, 0, pts, kValues);
      const NodeId c = net::mlp_on_tape(t, *control, pu, control_inputs(*control, pts), kValues);
      const NodeId s = sum_of_squares(t, t.sub(u, c));
      sb += t.scalar(s);
      total = t.add(total, s);
    }
  }
  if (p.periodic() && bs.periodic_lo.cols() > 0) {
    const ad::JetLayout lay{{p.periodic_order, 0}};
    const auto lo = ad::derivative_nodes(t, net::mlp_on_tape(t, state, 0, bs.periodic_lo, lay), state);
    const auto hi = ad::derivative_nodes(t, net::mlp_on_tape(t, state, 0, bs.periodic_hi, lay), state);
    for (int k = 0; k <= p.periodic_order; ++k) {
      const NodeId s = sum_of_squares(t, t.sub(bundle_order(lo, k), bundle_order(hi, k)));
      sb += t.scalar(s);
      total = t.add(total, s);
    }
  }
  const double nb = static_cast<double>(std::max(bs.boundary_count(), 1));
  out.boundary = sb / nb;
  check_finite(out.boundary, "boundary");
  total = t.scale(total, w.w_b / nb);

  if (bs.initial.cols() > 0) {
    const NodeId u = net::mlp_on_tape(t, state, 0, bs.initial, kValues);
    NodeId target;
    if (use_control && controls_initial(p)) {
      target = net::mlp_on_tape(t, *control, pu, control_inputs(*control, bs.initial), kValues);
    } else {
      target = t.constant(row_values(bs.initial, [&p](double x, double) { return p.initial(x); }));
    }
    const NodeId s = sum_of_squares(t, t.sub(u, target));
    const double n0 = static_cast<double>(bs.initial.cols());
    out.initial = t.scalar(s) / n0;
    check_finite(out.initial, "initial");
    total = t.add(total, t.scale(s, w.w_0 / n0));
  }

  if (use_control && (p.cost == CostKind::kWallFlux || p.cost == CostKind::kTerminalMismatch)) {
    const int nc = static_cast<int>(cost_x_.size());
    Eigen::MatrixXd pts(2, nc);
    Eigen::MatrixXd q(1, nc);
    pts.row(0) = cost_x_.transpose();
    pts.row(1).setConstant(p.T);
    for (int i = 0; i < nc; ++i) q(0, i) = cost_target(p, cost_x_(i));
    NodeId val;
    if (p.cost == CostKind::kWallFlux) {
      const NodeId u = net::mlp_on_tape(t, state, 0, pts, ad::JetLayout{{0, 1}});
      val = ad::derivative_nodes(t, u, state).du_dt;
    } else {
      val = net::mlp_on_tape(t, state, 0, pts, kValues);
    }
    const NodeId s = sum_of_squares(t, t.sub(val, t.constant(q)));
    const double fac = cost_factor(p, nc);
    out.cost = fac * t.scalar(s);
    total = t.add(total, t.scale(s, w.w_J * fac));
  }
  check_finite(out.cost, "cost");
  if (grad) *grad += t.grad_params(total);
  if (grad && !grad->allFinite()) throw NonFiniteLoss("non-finite loss gradient");

  out.total = out.fbi(w) + (p.is_control ? w.w_J * out.cost : 0.0);
  return out;
}

LossComponents LossContext::evaluate_values(const BundleFn& state, const ControlFn* control,
                                            const Eigen::MatrixXd& batch) const {
  const ProblemSpec& p = problem_;
  const LossWeights& w = weights_;
  if (batch.cols() < 1) throw std::invalid_argument("residual batch is empty");
  const bool use_control = control && p.is_control;
  LossComponents out;
  const double n = static_cast<double>(batch.cols());
  for (Eigen::Index i = 0; i < batch.cols(); ++i) {
    const double x = batch(0, i), t = batch(1, i);
    const auto d = state(x, t);
    double f = 0.0;
    bool has_f = false;
    if (use_control && controls_forcing(p)) {
      f = (*control)(x, t);
      has_f = true;
    } else if (p.forcing) {
      f = p.forcing(x, t);
      has_f = true;
    }
    const double r = problems::residual<double>(p, d, has_f ? &f : nullptr);
    out.residual += r * r / n;
    if (use_control && p.cost == CostKind::kQuadraticRegulator) out.cost += 0.5 * p.L * p.T * (d.u * d.u + p.sigma * f * f) / n;
  }
  const auto& bs = boundary_;
  double sb = 0.0;
  for (Eigen::Index i = 0; i < bs.dirichlet.cols(); ++i) {
    const Label l = bs.dirichlet_labels[static_cast<std::size_t>(i)];
    const double x = bs.dirichlet(0, i), y = bs.dirichlet(1, i);
    const double g = (use_control && controls_top_wall(p) && l == Label::kTop) ? (*control)(x, y) : p.dirichlet(l, x, y);
    const double e = state(x, y).u - g;
    sb += e * e;
  }
  if (p.periodic()) {
    for (Eigen::Index i = 0; i < bs.periodic_lo.cols(); ++i) {
      const auto lo = state(bs.periodic_lo(0, i), bs.periodic_lo(1, i));
      const auto hi = state(bs.periodic_hi(0, i), bs.periodic_hi(1, i));
      for (int k = 0; k <= p.periodic_order; ++k) {
        const double e = bundle_order(lo, k) - bundle_order(hi, k);
        sb += e * e;
      }
    }
  }
  out.boundary = sb / std::max(bs.boundary_count(), 1);
  for (Eigen::Index i = 0; i < bs.initial.cols(); ++i) {
    const double x = bs.initial(0, i);
    const double g = (use_control && controls_initial(p)) ? (*control)(x, 0.0) : p.initial(x);
    const double e = state(x, 0.0).u - g;
    out.initial += e * e / static_cast<double>(bs.initial.cols());
  }
  if (use_control && (p.cost == CostKind::kWallFlux || p.cost == CostKind::kTerminalMismatch)) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < cost_x_.size(); ++i) {
      const auto d = state(cost_x_(i), p.T);
      const double e = (p.cost == CostKind::kWallFlux ? d.du_dt : d.u) - cost_target(p, cost_x_(i));
      s += e * e;
    }
    out.cost = cost_factor(p, static_cast<int>(cost_x_.size())) * s;
  }
  check_finite(out.residual, "residual");
  check_finite(out.boundary, "boundary");
  check_finite(out.initial, "initial");
  check_finite(out.cost, "cost");
  out.total = out.fbi(w) + (p.is_control ? w.w_J * out.cost : 0.0);
  return out;
}

LossComponents forward_loss(const LossContext& ctx, const net::MlpParams& state, const Eigen::MatrixXd& batch,
                            Eigen::VectorXd* grad) {
  if (ctx.problem().is_control) throw std::invalid_argument("forward_loss on a control problem");
  return ctx.evaluate(state, nullptr, batch, grad);
}

LossComponents control_loss(const LossContext& ctx, const net::MlpParams& state, const net::MlpParams& control,
                            const Eigen::MatrixXd& batch, Eigen::VectorXd* grad) {
  if (!ctx.problem().is_control) throw std::invalid_argument("control_loss on a forward problem");
  return ctx.evaluate(state, &control, batch, grad);
}

double control_value(const net::MlpParams& control, double x, double t) {
  if (control.input_dim() == 1) return net::forward(control, Eigen::VectorXd::Constant(1, x));
  return net::forward(control, Eigen::Vector2d(x, t));
}

ProblemSpec with_fixed_control(const ProblemSpec& p, const ControlFn& control) {
  if (!p.is_control) throw std::invalid_argument(p.name + " has no control to freeze");
  ProblemSpec q = p;
  q.is_control = false;
  q.control = problems::ControlKind::kNone;
  q.cost = CostKind::kNone;
  switch (p.family) {
    case Family::kLaplace: {
      auto base = p.dirichlet;
      q.dirichlet = [base, control](Label l, double x, double y) {
        return l == Label::kTop ? control(x, y) : base(l, x, y);
      };
      break;
    }
    case Family::kBurgers:
      q.initial = [control](double x) { return control(x, 0.0); };
      break;
    case Family::kKs:
      q.forcing = control;
      break;
  }
  return q;
}

double pinn_cost(const ProblemSpec& p, const net::MlpParams& state, const ControlFn& control) {
  switch (p.cost) {
    case CostKind::kWallFlux:
    case CostKind::kTerminalMismatch: {
      const Eigen::VectorXd xs = sampling::midpoints(0.0, p.L, p.cost_points);
      double s = 0.0;
      for (Eigen::Index i = 0; i < xs.size(); ++i) {
        const Eigen::Vector2d pt(xs(i), p.T);
        const double v = p.cost == CostKind::kWallFlux ? ad::pde_derivatives(state, pt, ad::JetLayout{{0, 1}}).du_dt
                                                       : net::forward(state, pt);
        const double e = v - p.target(xs(i));
        s += e * e;
      }
      return cost_factor(p, p.cost_points) * s;
    }
    case CostKind::kQuadraticRegulator: {
      const int n = 100;
      const Eigen::VectorXd xs = sampling::midpoints(0.0, p.L, n);
      const Eigen::VectorXd ts = sampling::midpoints(0.0, p.T, n);
      Eigen::MatrixXd pts(2, n * n);
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) pts.col(j * n + i) << xs(i), ts(j);
      const Eigen::VectorXd u = net::forward_batch(state, pts);
      double s = 0.0;
      for (Eigen::Index k = 0; k < pts.cols(); ++k) {
        const double f = control(pts(0, k), pts(1, k));
        s += u(k) * u(k) + p.sigma * f * f;
      }
      return 0.5 * (p.L / n) * (p.T / n) * s;
    }
    case CostKind::kNone:
      break;
  }
  throw std::invalid_argument(p.name + " has no cost objective");
}

}  // namespace pinnctl::pinn
