#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pinnctl/autodiff/derivatives.hpp"
#include "pinnctl/problems/control_field.hpp"
#include "pinnctl/sampling/sampling.hpp"

namespace pinnctl::problems {

enum class Family { kLaplace, kBurgers, kKs };

enum class CostKind {
  kNone,
  kWallFlux,            // integral over x of (u_y(x,1) - q_d)^2
  kTerminalMismatch,    // 1/2 integral over x of (u(x,T) - u_d)^2
  kQuadraticRegulator,  // 1/2 double integral of (u^2 + sigma f^2)
};

/// Which data the Laplace control problem uses on the bottom wall and as
/// target flux. kConsistent: sin(2 pi x), cos(2 pi x) (the data for which the
/// closed-form optimum holds); kHalfPeriod: sin(pi x), cos(pi x).
enum class LaplaceData { kConsistent, kHalfPeriod };

using Fn1 = std::function<double(double)>;
using Fn2 = std::function<double(double, double)>;

struct ProblemSpec {
  std::string name;
  Family family = Family::kLaplace;
  bool is_control = false;
  ControlKind control = ControlKind::kNone;
  CostKind cost = CostKind::kNone;

  // Domain [0, L] x [0, T]; for Laplace the second coordinate is y and L = T = 1.
  double L = 1.0;
  double T = 1.0;
  double nu = 0.0;
  double sigma = 0.0;

  // Jet orders needed by the residual (x direction, second direction).
  int spatial_order = 2;
  int time_order = 1;
  // Derivatives matched across periodic pairs (0 = value only, -1 = not periodic).
  int periodic_order = -1;

  sampling::BoundaryLayout boundary;
  int cost_points = 41;

  // Fixed data. Dirichlet data is keyed by edge label; initial is u(x, 0).
  std::function<double(sampling::Label, double, double)> dirichlet;
  Fn1 initial;
  Fn1 target;   // q_d(x) or u_d(x)
  Fn2 forcing;  // fixed volume forcing for forward problems (may be empty)

  // Closed-form state when one exists.
  Fn2 oracle;
  // Reference optimal control when one exists.
  Fn1 reference_control;

  LaplaceData laplace_data = LaplaceData::kConsistent;

  ad::JetLayout residual_layout() const { return ad::JetLayout{{spatial_order, time_order}}; }
  bool periodic() const { return periodic_order >= 0; }
  /// Input dimension of the control network.
  int control_input_dim() const { return control == ControlKind::kForcing ? 2 : 1; }
};

ProblemSpec laplace_forward();
ProblemSpec laplace_control(LaplaceData data = LaplaceData::kConsistent);
ProblemSpec burgers();
ProblemSpec burgers_control();
ProblemSpec ks();
ProblemSpec ks_control();

/// Registry lookup by "laplace-fwd", "laplace-ctl", "burgers-fwd",
/// "burgers-ctl", "ks-fwd", "ks-ctl".
ProblemSpec make_problem(const std::string& name);
std::vector<std::string> problem_names();

double laplace_forward_oracle(double x, double y);
double laplace_optimal_control(double x);
double laplace_optimal_state(double x, double y);
double burgers_analytical(double x, double t, double nu = 0.01);
double ks_initial(double x, double L = 50.0);

/// PDE residual written once for plain values and tape expressions.
/// forcing may be null when the problem has no volume term.
template <class T>
T residual(const ProblemSpec& p, const ad::Bundle<T>& d, const T* forcing) {
  switch (p.family) {
    case Family::kLaplace:
      return d.d2u_dx2 + d.d2u_dt2;
    case Family::kBurgers:
      return d.du_dt + d.u * d.du_dx - p.nu * d.d2u_dx2;
    case Family::kKs: {
      T r = d.du_dt + d.u * d.du_dx + d.d2u_dx2 + d.d4u_dx4;
      if (forcing) r = r - *forcing;
      return r;
    }
  }
  return d.u;
}

/// Derivative bundle of a closed-form state via scalar jets.
ad::DerivativeBundle oracle_derivatives(const ProblemSpec& p, double x, double t);

}  // namespace pinnctl::problems
