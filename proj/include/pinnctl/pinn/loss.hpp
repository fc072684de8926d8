#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

#include "pinnctl/network/mlp.hpp"
#include "pinnctl/problems/problems.hpp"
#include "pinnctl/sampling/sampling.hpp"
#include "pinnctl/solvers/spectral.hpp"

namespace pinnctl::pinn {

struct LossWeights {
  double w_r = 1.0;
  double w_b = 1.0;
  double w_0 = 1.0;
  double w_J = 0.0;
};

/// Unweighted loss terms and the weighted total.
struct LossComponents {
  double residual = 0.0;
  double boundary = 0.0;
  double initial = 0.0;
  double cost = 0.0;
  double total = 0.0;

  /// w_r L_r + w_b L_b + w_0 L_0, the PDE-feasibility part.
  double fbi(const LossWeights& w) const { return w.w_r * residual + w.w_b * boundary + w.w_0 * initial; }
};

/// A loss term evaluated to NaN or infinity.
class NonFiniteLoss : public solvers::NumericalError {
 public:
  using solvers::NumericalError::NumericalError;
};

/// Plain-value state and control models for the tape-free evaluation route.
using BundleFn = std::function<ad::DerivativeBundle(double x, double t)>;
using ControlFn = std::function<double(double x, double t)>;

/// Everything a loss evaluation needs apart from the networks and the batch.
class LossContext {
 public:
  LossContext(problems::ProblemSpec problem, LossWeights weights, int chunk = 250);

  const problems::ProblemSpec& problem() const { return problem_; }
  const sampling::BoundarySet& boundary() const { return boundary_; }
  const Eigen::VectorXd& cost_points() const { return cost_x_; }
  const LossWeights& weights() const { return weights_; }
  void set_weights(const LossWeights& w) { weights_ = w; }

  /// Loss on the tape. control is null for forward problems. When grad is
  /// given it receives d(total)/d[theta_u, theta_c].
  LossComponents evaluate(const net::MlpParams& state, const net::MlpParams* control, const Eigen::MatrixXd& batch,
                          Eigen::VectorXd* grad) const;

  /// Same loss from pointwise closed-form derivatives (no tape).
  LossComponents evaluate_values(const BundleFn& state, const ControlFn* control, const Eigen::MatrixXd& batch) const;

 private:
  problems::ProblemSpec problem_;
  LossWeights weights_;
  int chunk_;
  sampling::BoundarySet boundary_;
  Eigen::VectorXd cost_x_;
};

/// forward_loss / control_loss wrappers.
LossComponents forward_loss(const LossContext& ctx, const net::MlpParams& state, const Eigen::MatrixXd& batch,
                            Eigen::VectorXd* grad = nullptr);
LossComponents control_loss(const LossContext& ctx, const net::MlpParams& state, const net::MlpParams& control,
                            const Eigen::MatrixXd& batch, Eigen::VectorXd* grad = nullptr);

/// Plain evaluation of a control network at (x, t); t is ignored for 1-D nets.
double control_value(const net::MlpParams& control, double x, double t);

/// Forward-problem copy of a control problem with the control frozen as data.
problems::ProblemSpec with_fixed_control(const problems::ProblemSpec& p, const ControlFn& control);

/// The problem's cost objective J(u_NN, c) from a trained state network.
/// Laplace/Burgers use the 41-point midpoint rule of the training cost; KS
/// uses a 100 x 100 midpoint grid.
double pinn_cost(const problems::ProblemSpec& p, const net::MlpParams& state, const ControlFn& control);

}  // namespace pinnctl::pinn
