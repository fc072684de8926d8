#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "pinnctl/autodiff/tape.hpp"

namespace pinnctl::net {

struct Layer {
  Eigen::MatrixXd W;
  Eigen::VectorXd b;
};

/// Per-input-coordinate affine normalization z0 = (x - mean) / stddev.
struct Normalization {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
};

/// Fully connected tanh network with an affine output layer.
struct MlpParams {
  std::vector<Layer> layers;
  Normalization norm;
  std::uint64_t seed = 0;

  int input_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.front().W.cols()); }
  int output_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.back().W.rows()); }
  std::vector<int> sizes() const;
  std::size_t parameter_count() const;

  /// Flat parameters: per layer W (row-major) then b.
  Eigen::VectorXd flat() const;
  void set_flat(const Eigen::VectorXd& theta);
  void validate() const;
};

MlpParams init_glorot(const std::vector<int>& layer_sizes, std::uint64_t seed);

/// Scalar output at one point (input in physical coordinates).
double forward(const MlpParams& params, const Eigen::VectorXd& input);
/// Outputs for a dim x n matrix of points; returns n values of output 0.
Eigen::VectorXd forward_batch(const MlpParams& params, const Eigen::MatrixXd& points);

/// Sets mean/population std per coordinate from a dim x n point set.
MlpParams set_normalization(MlpParams params, const Eigen::MatrixXd& residual_points);

nlohmann::json to_json(const MlpParams& params);
MlpParams from_json(const nlohmann::json& j);
void save_checkpoint(const MlpParams& params, const std::string& path);
MlpParams load_checkpoint(const std::string& path);

/// Builds the network on a tape for a dim x n point set.
///
/// Input row r is seeded along direction r (r < 2) with unit derivative in
/// normalized coordinates, truncated to layout.orders[r]. Parameters map to
/// the tape's flat vector starting at offset. Returns the 1 x n output node.
ad::NodeId mlp_on_tape(ad::Tape& tape, const MlpParams& params, std::size_t offset, const Eigen::MatrixXd& points,
                       ad::JetLayout layout);

}  // namespace pinnctl::net
