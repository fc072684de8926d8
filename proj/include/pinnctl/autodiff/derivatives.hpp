#pragma once

#include <Eigen/Dense>

#include "pinnctl/autodiff/tape.hpp"
#include "pinnctl/network/mlp.hpp"

namespace pinnctl::ad {

/// Network-output derivatives with respect to physical coordinates.
///
/// The second input coordinate is called t; for the Laplace problems it is
/// y, which is why d2u_dt2 is carried. Entries beyond the requested orders
/// stay zero.
template <class T>
struct Bundle {
  T u{};
  T du_dx{};
  T d2u_dx2{};
  T d3u_dx3{};
  T d4u_dx4{};
  T du_dt{};
  T d2u_dt2{};
};

using DerivativeBundle = Bundle<double>;

/// Node ids of each derivative as order-0 1 x n tape nodes (-1 if absent).
struct NodeBundle {
  NodeId u = -1;
  NodeId du_dx = -1;
  NodeId d2u_dx2 = -1;
  NodeId d3u_dx3 = -1;
  NodeId d4u_dx4 = -1;
  NodeId du_dt = -1;
  NodeId d2u_dt2 = -1;
};

/// Extracts derivative nodes from a jet-valued network output, applying the
/// 1/stddev^k chain-rule factors of the input normalization.
NodeBundle derivative_nodes(Tape& tape, NodeId output, const net::MlpParams& params);

DerivativeBundle pde_derivatives(const net::MlpParams& params, const Eigen::VectorXd& point, int spatial_order,
                                 bool needs_time);
DerivativeBundle pde_derivatives(const net::MlpParams& params, const Eigen::VectorXd& point, JetLayout layout);

}  // namespace pinnctl::ad
