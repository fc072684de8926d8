#include "pinnctl/pinn/adam.hpp"

#include <cmath>
#include <stdexcept>

#include "pinnctl/solvers/spectral.hpp"

namespace pinnctl::pinn {

void adam_step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad, AdamState& s, double lr, const AdamConfig& c) {
  if (grad.size() != theta.size() || s.m.size() != theta.size() || s.v.size() != theta.size()) {
    throw std::invalid_argument("Adam state does not match the parameter vector");
  }
  if (!grad.allFinite()) throw solvers::NumericalError("non-finite gradient in Adam step");
  ++s.step;
  s.m = c.beta1 * s.m + (1.0 - c.beta1) * grad;
  s.v = c.beta2 * s.v + (1.0 - c.beta2) * grad.cwiseAbs2();
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(s.step));
  theta.array() -= lr * (s.m.array() / bc1) / ((s.v.array() / bc2).sqrt() + c.eps);
}

}  // namespace pinnctl::pinn
