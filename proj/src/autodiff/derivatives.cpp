#include "pinnctl/autodiff/derivatives.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pinnctl::ad {

NodeBundle derivative_nodes(Tape& tape, NodeId output, const net::MlpParams& params) {
  const JetLayout layout = tape.value(output).layout;
  NodeBundle nb;
  nb.u = tape.coefficient(output, 0, 0);
  NodeId* xs[] = {&nb.du_dx, &nb.d2u_dx2, &nb.d3u_dx3, &nb.d4u_dx4};
  NodeId* ts[] = {&nb.du_dt, &nb.d2u_dt2};
  const double sx = params.norm.stddev(0);
  for (int k = 1; k <= layout.orders[0]; ++k) *xs[k - 1] = tape.coefficient(output, 0, k, std::pow(sx, -k));
  if (layout.orders[1] > 0) {
    if (params.input_dim() < 2) throw std::invalid_argument("time derivatives requested from a 1-D network");
    const double st = params.norm.stddev(1);
    for (int k = 1; k <= std::min(layout.orders[1], 2); ++k) *ts[k - 1] = tape.coefficient(output, 1, k, std::pow(st, -k));
  }
  return nb;
}

DerivativeBundle pde_derivatives(const net::MlpParams& params, const Eigen::VectorXd& point, JetLayout layout) {
  for (int d = 0; d < 2; ++d) {
    if (layout.orders[d] < 0 || layout.orders[d] > 4) {
      throw std::invalid_argument("unsupported derivative order " + std::to_string(layout.orders[d]));
    }
  }
  if (layout.orders[1] > 2) throw std::invalid_argument("second-coordinate order above 2 is not carried");
  if (point.size() != params.input_dim()) throw std::invalid_argument("point dimension does not match network input");
  if (layout.orders[1] > 0 && point.size() < 2) throw std::invalid_argument("time derivative of a 1-D network");

  Tape tape(params.parameter_count());
  const NodeId out = net::mlp_on_tape(tape, params, 0, Eigen::MatrixXd(point), layout);
  const NodeBundle nb = derivative_nodes(tape, out, params);
  auto get = [&](NodeId id) { return id < 0 ? 0.0 : tape.scalar(id); };
  return {get(nb.u),       get(nb.du_dx), get(nb.d2u_dx2), get(nb.d3u_dx3),
          get(nb.d4u_dx4), get(nb.du_dt), get(nb.d2u_dt2)};
}

DerivativeBundle pde_derivatives(const net::MlpParams& params, const Eigen::VectorXd& point, int spatial_order,
                                 bool needs_time) {
  if (spatial_order < 0 || spatial_order > 4) {
    throw std::invalid_argument("unsupported spatial order " + std::to_string(spatial_order));
  }
  return pde_derivatives(params, point, JetLayout{{spatial_order, needs_time ? 1 : 0}});
}

}  // namespace pinnctl::ad
