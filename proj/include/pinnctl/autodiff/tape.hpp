#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace pinnctl::ad {

/// Truncation orders of the two input directions carried by a JetBatch.
///
/// Coefficient 0 is the shared value; direction d then owns coefficients
/// 1..orders[d]. Mixed terms are not represented (s * r = 0).
struct JetLayout {
  std::array<int, 2> orders{0, 0};

  int coeff_count() const { return 1 + orders[0] + orders[1]; }
  int index(int dir, int k) const { return k == 0 ? 0 : (dir == 0 ? k : orders[0] + k); }
  bool operator==(const JetLayout&) const = default;
};

/// A rows x cols array of two-direction jets, stored as coeff_count column
/// blocks of a single matrix so linear maps apply to all coefficients in one
/// product.
struct JetBatch {
  JetBatch() = default;
  JetBatch(Eigen::Index rows, Eigen::Index cols, JetLayout layout)
      : layout(layout), cols(cols), data(Eigen::MatrixXd::Zero(rows, cols * layout.coeff_count())) {}

  /// Order-0 batch wrapping a plain matrix.
  static JetBatch plain(Eigen::MatrixXd m) {
    JetBatch b;
    b.cols = m.cols();
    b.data = std::move(m);
    return b;
  }

  Eigen::Index rows() const { return data.rows(); }
  auto block(int idx) { return data.middleCols(idx * cols, cols); }
  auto block(int idx) const { return data.middleCols(idx * cols, cols); }
  auto value() const { return block(0); }

  JetLayout layout;
  Eigen::Index cols = 0;
  Eigen::MatrixXd data;
};

using NodeId = std::int32_t;

enum class Op : std::uint8_t {
  kConstant,
  kParameter,
  kAffine,
  kTanh,
  kAdd,
  kSub,
  kMul,
  kScale,
  kShift,
  kCoefficient,
  kMean,
  kSum,
  kElement,
};

/// Append-only computation graph over jet-valued nodes.
///
/// Node values are JetBatch arrays; parameter leaves map onto a flat
/// parameter vector (row-major per matrix) so that one reverse sweep yields
/// the loss gradient for every trainable parameter, including through the
/// Taylor coefficients used for input derivatives.
class Tape {
 public:
  explicit Tape(std::size_t parameter_count);

  NodeId constant(JetBatch value);
  NodeId constant(Eigen::MatrixXd value) { return constant(JetBatch::plain(std::move(value))); }
  /// Leaf bound to flat parameters [offset, offset + rows*cols).
  NodeId parameter(const Eigen::MatrixXd& value, std::size_t offset);

  /// weight * x, plus bias added to the value coefficient.
  NodeId affine(NodeId weight, NodeId bias, NodeId x);
  NodeId tanh(NodeId x);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  /// Elementwise jet product (Cauchy convolution per direction).
  NodeId mul(NodeId a, NodeId b);
  NodeId scale(NodeId a, double s);
  /// Adds s to the value coefficient.
  NodeId shift(NodeId a, double s);
  /// Order-0 node holding factor * k! * coefficient k of direction dir.
  NodeId coefficient(NodeId a, int dir, int k, double factor = 1.0);
  NodeId mean(NodeId a);
  NodeId sum(NodeId a);
  NodeId element(NodeId a, Eigen::Index row, Eigen::Index col);

  const JetBatch& value(NodeId id) const;
  double scalar(NodeId id) const;
  std::size_t size() const { return nodes_.size(); }
  std::size_t parameter_count() const { return parameter_count_; }
  Op op(NodeId id) const;
  std::vector<NodeId> inputs(NodeId id) const;

  /// dLoss/dtheta for the flat parameter vector; loss must be a 1x1 node.
  Eigen::VectorXd grad_params(NodeId loss) const;

 private:
  struct Node {
    Op op = Op::kConstant;
    std::array<NodeId, 3> in{-1, -1, -1};
    JetBatch value{};
    bool needs_grad = false;
    double s = 0.0;
    int dir = 0;
    int k = 0;
    Eigen::Index row = 0;
    Eigen::Index col = 0;
    std::size_t offset = 0;
    Eigen::MatrixXd aux{};
  };

  NodeId push(Node node);
  const Node& at(NodeId id) const;
  void check_same_shape(const Node& a, const Node& b, const char* what) const;

  std::size_t parameter_count_;
  std::vector<Node> nodes_;
};

Eigen::VectorXd grad_params(const Tape& tape, NodeId loss_node);

}  // namespace pinnctl::ad
