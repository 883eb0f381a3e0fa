#pragma once

// Define-by-run reverse-mode differentiation over dense row-major matrices.
//
// Every value in a computation is a DiffValue: a shared handle to a graph node
// holding the forward value, the accumulated gradient, and a closure that
// pushes the node's gradient into its parents. Graphs are rebuilt every step
// and freed when the last handle to the root goes away.

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sculptor::ad {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Floor applied inside log(); entropy terms are evaluated at saturated probabilities.
inline constexpr double kLogFloor = 1e-12;

namespace detail {

struct Node {
  Matrix value;
  Matrix grad;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;
  bool requires_grad = false;
  const char* op = "leaf";

  void accumulate(const Eigen::Ref<const Matrix>& g);
};

}  // namespace detail

class DiffValue {
 public:
  DiffValue() = default;

  /// A leaf that never receives gradient.
  static DiffValue constant(Matrix value);
  static DiffValue constant(double value);
  /// A trainable leaf; its gradient accumulates across backward() calls.
  static DiffValue variable(Matrix value);

  bool defined() const { return static_cast<bool>(node_); }
  const Matrix& value() const;
  /// Mutable access for optimizers and finite-difference probes.
  Matrix& mutable_value();
  const Matrix& grad() const;
  void zero_grad();

  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  std::string shape() const;
  bool requires_grad() const;
  const char* op() const;

  /// Value of a 1x1 result.
  double item() const;

  const std::shared_ptr<detail::Node>& node() const { return node_; }
  explicit DiffValue(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

/// True unless a NoGradGuard is alive on this thread.
bool grad_enabled();

/// Disables graph recording on the current thread; ops return constants.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Populates grad of every reachable leaf with d(root)/d(leaf). Leaf gradients
/// accumulate across calls; intermediate gradients are recomputed each call.
void backward(const DiffValue& root);

// Elementwise add/sub accept a same-shape rhs, a 1xC row (broadcast over rows),
// or a 1x1 scalar. Shape mismatches throw ShapeError naming both shapes.
DiffValue add(const DiffValue& a, const DiffValue& b);
DiffValue sub(const DiffValue& a, const DiffValue& b);
/// Elementwise product; rhs may also be a 1x1 scalar.
DiffValue mul(const DiffValue& a, const DiffValue& b);
DiffValue matmul(const DiffValue& a, const DiffValue& b);
DiffValue scale(const DiffValue& a, double s);
DiffValue shift(const DiffValue& a, double c);
/// x * W + b with b a 1xC row.
DiffValue affine(const DiffValue& x, const DiffValue& weight, const DiffValue& bias);
DiffValue leaky_relu(const DiffValue& x, double slope);
DiffValue sigmoid(const DiffValue& x);
/// log(max(x, kLogFloor)); gradient is zero where the floor is active.
DiffValue log(const DiffValue& x);
DiffValue exp(const DiffValue& x);
DiffValue sum(const DiffValue& x);
DiffValue mean(const DiffValue& x);
DiffValue squared_norm(const DiffValue& x);
DiffValue concat_cols(std::span<const DiffValue> parts);
DiffValue concat_rows(std::span<const DiffValue> parts);
DiffValue gather_rows(const DiffValue& x, std::span<const int> rows);

/// out[i] = sum_k weights(i, k) * x.row(indices[i * taps + k]); taps = weights.cols().
/// Bilinear sampling is the 4-tap case.
DiffValue weighted_gather_rows(const DiffValue& x, std::vector<int> indices, Matrix weights);

/// D(i, j) = ||a_i - b_j||^2 for row sets a (n x d) and b (m x d).
DiffValue pairwise_sqdist(const DiffValue& a, const DiffValue& b);

/// 3x3, stride 1, zero-padded convolution on a (height*width) x in_channels map.
/// weight is (9*in_channels) x out_channels with row index (ky*3 + kx)*in_channels + c.
DiffValue conv3x3(const DiffValue& x, const DiffValue& weight, const DiffValue& bias, int height,
                  int width);

/// 2x2 average pooling of a (height*width) x C map; height and width must be even.
DiffValue avg_pool2(const DiffValue& x, int height, int width);

}  // namespace sculptor::ad
