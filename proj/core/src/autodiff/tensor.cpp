#include "sculptor/autodiff/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "sculptor/error.hpp"

namespace sculptor::ad {

namespace {

thread_local bool g_grad_enabled = true;

using NodePtr = std::shared_ptr<detail::Node>;

std::string shape_of(const Matrix& m) {
  std::ostringstream out;
  out << "[" << m.rows() << " x " << m.cols() << "]";
  return out.str();
}

[[noreturn]] void shape_mismatch(const char* op, const Matrix& a, const Matrix& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_of(a) + " and " +
                   shape_of(b));
}

DiffValue make_result(Matrix value, std::vector<NodePtr> parents, std::function<void(detail::Node&)> fn,
                      const char* op) {
  auto node = std::make_shared<detail::Node>();
  node->value = std::move(value);
  node->op = op;
  if (g_grad_enabled) {
    const bool any = std::any_of(parents.begin(), parents.end(),
                                 [](const NodePtr& p) { return p->requires_grad; });
    if (any) {
      node->requires_grad = true;
      node->parents = std::move(parents);
      node->backward = std::move(fn);
    }
  }
  return DiffValue(std::move(node));
}

enum class Broadcast { kSame, kRow, kScalar };

Broadcast broadcast_kind(const char* op, const Matrix& a, const Matrix& b) {
  if (a.rows() == b.rows() && a.cols() == b.cols()) return Broadcast::kSame;
  if (b.rows() == 1 && b.cols() == 1) return Broadcast::kScalar;
  if (b.rows() == 1 && b.cols() == a.cols()) return Broadcast::kRow;
  shape_mismatch(op, a, b);
}

Matrix expand(const Matrix& a, const Matrix& b, Broadcast kind) {
  switch (kind) {
    case Broadcast::kSame:
      return b;
    case Broadcast::kRow:
      return b.replicate(a.rows(), 1);
    case Broadcast::kScalar:
      return Matrix::Constant(a.rows(), a.cols(), b(0, 0));
  }
  return b;
}

Matrix reduce_to(const Matrix& g, Broadcast kind) {
  switch (kind) {
    case Broadcast::kSame:
      return g;
    case Broadcast::kRow:
      return g.colwise().sum();
    case Broadcast::kScalar:
      return Matrix::Constant(1, 1, g.sum());
  }
  return g;
}

}  // namespace

void detail::Node::accumulate(const Eigen::Ref<const Matrix>& g) {
  if (grad.rows() != value.rows() || grad.cols() != value.cols()) {
    grad = g;
  } else {
    grad += g;
  }
}

DiffValue DiffValue::constant(Matrix value) {
  auto node = std::make_shared<detail::Node>();
  node->value = std::move(value);
  node->op = "constant";
  return DiffValue(std::move(node));
}

DiffValue DiffValue::constant(double value) { return constant(Matrix::Constant(1, 1, value)); }

DiffValue DiffValue::variable(Matrix value) {
  auto node = std::make_shared<detail::Node>();
  node->grad = Matrix::Zero(value.rows(), value.cols());
  node->value = std::move(value);
  node->requires_grad = true;
  node->op = "variable";
  return DiffValue(std::move(node));
}

const Matrix& DiffValue::value() const {
  if (!node_) throw Error("DiffValue: access to an undefined value");
  return node_->value;
}

Matrix& DiffValue::mutable_value() {
  if (!node_) throw Error("DiffValue: access to an undefined value");
  return node_->value;
}

const Matrix& DiffValue::grad() const {
  if (!node_) throw Error("DiffValue: access to an undefined value");
  if (node_->grad.rows() != node_->value.rows() || node_->grad.cols() != node_->value.cols()) {
    node_->grad = Matrix::Zero(node_->value.rows(), node_->value.cols());
  }
  return node_->grad;
}

void DiffValue::zero_grad() {
  if (node_) node_->grad = Matrix::Zero(node_->value.rows(), node_->value.cols());
}

std::string DiffValue::shape() const { return shape_of(value()); }

bool DiffValue::requires_grad() const { return node_ && node_->requires_grad; }

const char* DiffValue::op() const { return node_ ? node_->op : "undefined"; }

double DiffValue::item() const {
  const Matrix& v = value();
  if (v.rows() != 1 || v.cols() != 1) throw ShapeError("item(): expected a 1x1 value, got " + shape());
  return v(0, 0);
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

void backward(const DiffValue& root) {
  const Matrix& rv = root.value();
  if (rv.rows() != 1 || rv.cols() != 1) {
    throw ShapeError("backward: root must be 1x1, got " + root.shape());
  }
  if (!root.requires_grad()) return;

  // Iterative post-order DFS gives a topological order (parents before children).
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> visited;
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  visited.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (detail::Node* node : order) {
    if (node->backward) node->grad.resize(0, 0);
  }
  detail::Node* r = root.node().get();
  r->accumulate(Matrix::Ones(1, 1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* node = *it;
    if (!node->backward || node->grad.size() == 0) continue;
    node->backward(*node);
  }
}

DiffValue add(const DiffValue& a, const DiffValue& b) {
  const Broadcast kind = broadcast_kind("add", a.value(), b.value());
  Matrix out = a.value() + expand(a.value(), b.value(), kind);
  return make_result(std::move(out), {a.node(), b.node()},
                     [kind](detail::Node& self) {
                       auto& pa = *self.parents[0];
                       auto& pb = *self.parents[1];
                       if (pa.requires_grad) pa.accumulate(self.grad);
                       if (pb.requires_grad) pb.accumulate(reduce_to(self.grad, kind));
                     },
                     "add");
}

DiffValue sub(const DiffValue& a, const DiffValue& b) {
  const Broadcast kind = broadcast_kind("sub", a.value(), b.value());
  Matrix out = a.value() - expand(a.value(), b.value(), kind);
  return make_result(std::move(out), {a.node(), b.node()},
                     [kind](detail::Node& self) {
                       auto& pa = *self.parents[0];
                       auto& pb = *self.parents[1];
                       if (pa.requires_grad) pa.accumulate(self.grad);
                       if (pb.requires_grad) pb.accumulate(-reduce_to(self.grad, kind));
                     },
                     "sub");
}

DiffValue mul(const DiffValue& a, const DiffValue& b) {
  const Broadcast kind = broadcast_kind("mul", a.value(), b.value());
  if (kind == Broadcast::kRow) shape_mismatch("mul", a.value(), b.value());
  Matrix out = a.value().cwiseProduct(expand(a.value(), b.value(), kind));
  return make_result(std::move(out), {a.node(), b.node()},
                     [kind](detail::Node& self) {
                       auto& pa = *self.parents[0];
                       auto& pb = *self.parents[1];
                       const Matrix bx = expand(pa.value, pb.value, kind);
                       if (pa.requires_grad) pa.accumulate(self.grad.cwiseProduct(bx));
                       if (pb.requires_grad) {
                         pb.accumulate(reduce_to(self.grad.cwiseProduct(pa.value), kind));
                       }
                     },
                     "mul");
}

DiffValue matmul(const DiffValue& a, const DiffValue& b) {
  if (a.cols() != b.rows()) shape_mismatch("matmul", a.value(), b.value());
  Matrix out = a.value() * b.value();
  return make_result(std::move(out), {a.node(), b.node()},
                     [](detail::Node& self) {
                       auto& pa = *self.parents[0];
                       auto& pb = *self.parents[1];
                       if (pa.requires_grad) pa.accumulate(self.grad * pb.value.transpose());
                       if (pb.requires_grad) pb.accumulate(pa.value.transpose() * self.grad);
                     },
                     "matmul");
}

DiffValue scale(const DiffValue& a, double s) {
  return make_result(a.value() * s, {a.node()},
                     [s](detail::Node& self) { self.parents[0]->accumulate(self.grad * s); }, "scale");
}

DiffValue shift(const DiffValue& a, double c) {
  Matrix out = a.value().array() + c;
  return make_result(std::move(out), {a.node()},
                     [](detail::Node& self) { self.parents[0]->accumulate(self.grad); }, "shift");
}

DiffValue affine(const DiffValue& x, const DiffValue& weight, const DiffValue& bias) {
  if (x.cols() != weight.rows()) shape_mismatch("affine", x.value(), weight.value());
  if (bias.rows() != 1 || bias.cols() != weight.cols()) {
    shape_mismatch("affine(bias)", weight.value(), bias.value());
  }
  Matrix out = x.value() * weight.value();
  out.rowwise() += bias.value().row(0);
  return make_result(std::move(out), {x.node(), weight.node(), bias.node()},
                     [](detail::Node& self) {
                       auto& px = *self.parents[0];
                       auto& pw = *self.parents[1];
                       auto& pb = *self.parents[2];
                       if (px.requires_grad) px.accumulate(self.grad * pw.value.transpose());
                       if (pw.requires_grad) pw.accumulate(px.value.transpose() * self.grad);
                       if (pb.requires_grad) pb.accumulate(self.grad.colwise().sum());
                     },
                     "affine");
}

DiffValue leaky_relu(const DiffValue& x, double slope) {
  Matrix out = x.value().unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; });
  return make_result(std::move(out), {x.node()},
                     [slope](detail::Node& self) {
                       auto& px = *self.parents[0];
                       Matrix d = px.value.unaryExpr([slope](double v) { return v > 0.0 ? 1.0 : slope; });
                       px.accumulate(self.grad.cwiseProduct(d));
                     },
                     "leaky_relu");
}

DiffValue sigmoid(const DiffValue& x) {
  Matrix out = x.value().unaryExpr([](double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
  return make_result(std::move(out), {x.node()},
                     [](detail::Node& self) {
                       const Matrix& y = self.value;
                       Matrix d = y.array() * (1.0 - y.array());
                       self.parents[0]->accumulate(self.grad.cwiseProduct(d));
                     },
                     "sigmoid");
}

DiffValue log(const DiffValue& x) {
  Matrix out = x.value().unaryExpr([](double v) { return std::log(std::max(v, kLogFloor)); });
  return make_result(std::move(out), {x.node()},
                     [](detail::Node& self) {
                       auto& px = *self.parents[0];
                       Matrix d = px.value.unaryExpr([](double v) { return v > kLogFloor ? 1.0 / v : 0.0; });
                       px.accumulate(self.grad.cwiseProduct(d));
                     },
                     "log");
}

DiffValue exp(const DiffValue& x) {
  Matrix out = x.value().array().exp();
  return make_result(std::move(out), {x.node()},
                     [](detail::Node& self) { self.parents[0]->accumulate(self.grad.cwiseProduct(self.value)); },
                     "exp");
}

DiffValue sum(const DiffValue& x) {
  return make_result(Matrix::Constant(1, 1, x.value().sum()), {x.node()},
                     [](detail::Node& self) {
                       auto& px = *self.parents[0];
                       px.accumulate(Matrix::Constant(px.value.rows(), px.value.cols(), self.grad(0, 0)));
                     },
                     "sum");
}

DiffValue mean(const DiffValue& x) {
  const auto n = static_cast<double>(x.value().size());
  if (n == 0) throw ShapeError("mean: empty input");
  return make_result(Matrix::Constant(1, 1, x.value().sum() / n), {x.node()},
                     [n](detail::Node& self) {
                       auto& px = *self.parents[0];
                       px.accumulate(Matrix::Constant(px.value.rows(), px.value.cols(), self.grad(0, 0) / n));
                     },
                     "mean");
}

DiffValue squared_norm(const DiffValue& x) {
  return make_result(Matrix::Constant(1, 1, x.value().squaredNorm()), {x.node()},
                     [](detail::Node& self) {
                       auto& px = *self.parents[0];
                       px.accumulate(px.value * (2.0 * self.grad(0, 0)));
                     },
                     "squared_norm");
}

DiffValue concat_cols(std::span<const DiffValue> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) shape_mismatch("concat_cols", parts.front().value(), p.value());
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::vector<NodePtr> parents;
  std::vector<Eigen::Index> offsets;
  Eigen::Index c = 0;
  for (const auto& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    offsets.push_back(c);
    parents.push_back(p.node());
    c += p.cols();
  }
  return make_result(std::move(out), std::move(parents),
                     [offsets](detail::Node& self) {
                       for (std::size_t i = 0; i < self.parents.size(); ++i) {
                         auto& p = *self.parents[i];
                         if (p.requires_grad) p.accumulate(self.grad.middleCols(offsets[i], p.value.cols()));
                       }
                     },
                     "concat_cols");
}

DiffValue concat_rows(std::span<const DiffValue> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const Eigen::Index cols = parts.front().cols();
  Eigen::Index rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) shape_mismatch("concat_rows", parts.front().value(), p.value());
    rows += p.rows();
  }
  Matrix out(rows, cols);
  std::vector<NodePtr> parents;
  std::vector<Eigen::Index> offsets;
  Eigen::Index r = 0;
  for (const auto& p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    offsets.push_back(r);
    parents.push_back(p.node());
    r += p.rows();
  }
  return make_result(std::move(out), std::move(parents),
                     [offsets](detail::Node& self) {
                       for (std::size_t i = 0; i < self.parents.size(); ++i) {
                         auto& p = *self.parents[i];
                         if (p.requires_grad) p.accumulate(self.grad.middleRows(offsets[i], p.value.rows()));
                       }
                     },
                     "concat_rows");
}

DiffValue gather_rows(const DiffValue& x, std::span<const int> rows) {
  const Matrix& xv = x.value();
  Matrix out(static_cast<Eigen::Index>(rows.size()), xv.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= xv.rows()) {
      throw ShapeError("gather_rows: index " + std::to_string(rows[i]) + " out of range for " + shape_of(xv));
    }
    out.row(static_cast<Eigen::Index>(i)) = xv.row(rows[i]);
  }
  std::vector<int> idx(rows.begin(), rows.end());
  return make_result(std::move(out), {x.node()},
                     [idx = std::move(idx)](detail::Node& self) {
                       auto& px = *self.parents[0];
                       Matrix g = Matrix::Zero(px.value.rows(), px.value.cols());
                       for (std::size_t i = 0; i < idx.size(); ++i) {
                         g.row(idx[i]) += self.grad.row(static_cast<Eigen::Index>(i));
                       }
                       px.accumulate(g);
                     },
                     "gather_rows");
}

DiffValue weighted_gather_rows(const DiffValue& x, std::vector<int> indices, Matrix weights) {
  const Matrix& xv = x.value();
  const Eigen::Index n = weights.rows();
  const Eigen::Index taps = weights.cols();
  if (static_cast<Eigen::Index>(indices.size()) != n * taps) {
    throw ShapeError("weighted_gather_rows: " + std::to_string(indices.size()) + " indices for weights " +
                     shape_of(weights));
  }
  for (int i : indices) {
    if (i < 0 || i >= xv.rows()) {
      throw ShapeError("weighted_gather_rows: index " + std::to_string(i) + " out of range for " + shape_of(xv));
    }
  }
  Matrix out = Matrix::Zero(n, xv.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < taps; ++k) {
      out.row(i) += weights(i, k) * xv.row(indices[i * taps + k]);
    }
  }
  return make_result(std::move(out), {x.node()},
                     [indices = std::move(indices), weights = std::move(weights)](detail::Node& self) {
                       auto& px = *self.parents[0];
                       Matrix g = Matrix::Zero(px.value.rows(), px.value.cols());
                       const Eigen::Index taps = weights.cols();
                       for (Eigen::Index i = 0; i < weights.rows(); ++i) {
                         for (Eigen::Index k = 0; k < taps; ++k) {
                           g.row(indices[i * taps + k]) += weights(i, k) * self.grad.row(i);
                         }
                       }
                       px.accumulate(g);
                     },
                     "weighted_gather_rows");
}

DiffValue pairwise_sqdist(const DiffValue& a, const DiffValue& b) {
  if (a.cols() != b.cols()) shape_mismatch("pairwise_sqdist", a.value(), b.value());
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  Eigen::VectorXd an = av.rowwise().squaredNorm();
  Eigen::VectorXd bn = bv.rowwise().squaredNorm();
  Matrix out = -2.0 * av * bv.transpose();
  out.colwise() += an;
  out.rowwise() += bn.transpose();
  // Cancellation can leave tiny negatives on the diagonal of self-distances.
  out = out.cwiseMax(0.0);
  return make_result(std::move(out), {a.node(), b.node()},
                     [](detail::Node& self) {
                       auto& pa = *self.parents[0];
                       auto& pb = *self.parents[1];
                       const Matrix& g = self.grad;
                       if (pa.requires_grad) {
                         Eigen::VectorXd rs = g.rowwise().sum();
                         Matrix ga = 2.0 * (pa.value.array().colwise() * rs.array()).matrix() - 2.0 * g * pb.value;
                         pa.accumulate(ga);
                       }
                       if (pb.requires_grad) {
                         Eigen::VectorXd cs = g.colwise().sum().transpose();
                         Matrix gb = 2.0 * (pb.value.array().colwise() * cs.array()).matrix() -
                                     2.0 * g.transpose() * pa.value;
                         pb.accumulate(gb);
                       }
                     },
                     "pairwise_sqdist");
}

namespace {

// Rows are output pixels, columns are (ky*3 + kx)*channels + c.
Matrix im2col3x3(const Matrix& x, int height, int width) {
  const Eigen::Index channels = x.cols();
  Matrix cols = Matrix::Zero(static_cast<Eigen::Index>(height) * width, 9 * channels);
  for (int y = 0; y < height; ++y) {
    for (int xo = 0; xo < width; ++xo) {
      const Eigen::Index row = static_cast<Eigen::Index>(y) * width + xo;
      for (int ky = 0; ky < 3; ++ky) {
        const int sy = y + ky - 1;
        if (sy < 0 || sy >= height) continue;
        for (int kx = 0; kx < 3; ++kx) {
          const int sx = xo + kx - 1;
          if (sx < 0 || sx >= width) continue;
          cols.row(row).segment((ky * 3 + kx) * channels, channels) =
              x.row(static_cast<Eigen::Index>(sy) * width + sx);
        }
      }
    }
  }
  return cols;
}

Matrix col2im3x3(const Matrix& cols, int height, int width, Eigen::Index channels) {
  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(height) * width, channels);
  for (int y = 0; y < height; ++y) {
    for (int xo = 0; xo < width; ++xo) {
      const Eigen::Index row = static_cast<Eigen::Index>(y) * width + xo;
      for (int ky = 0; ky < 3; ++ky) {
        const int sy = y + ky - 1;
        if (sy < 0 || sy >= height) continue;
        for (int kx = 0; kx < 3; ++kx) {
          const int sx = xo + kx - 1;
          if (sx < 0 || sx >= width) continue;
          x.row(static_cast<Eigen::Index>(sy) * width + sx) +=
              cols.row(row).segment((ky * 3 + kx) * channels, channels);
        }
      }
    }
  }
  return x;
}

}  // namespace

DiffValue conv3x3(const DiffValue& x, const DiffValue& weight, const DiffValue& bias, int height, int width) {
  const Matrix& xv = x.value();
  if (xv.rows() != static_cast<Eigen::Index>(height) * width) {
    throw ShapeError("conv3x3: input " + shape_of(xv) + " does not hold a " + std::to_string(height) + "x" +
                     std::to_string(width) + " map");
  }
  if (weight.rows() != 9 * xv.cols()) shape_mismatch("conv3x3", xv, weight.value());
  if (bias.rows() != 1 || bias.cols() != weight.cols()) shape_mismatch("conv3x3(bias)", weight.value(), bias.value());
  auto cols = std::make_shared<Matrix>(im2col3x3(xv, height, width));
  Matrix out = (*cols) * weight.value();
  out.rowwise() += bias.value().row(0);
  return make_result(std::move(out), {x.node(), weight.node(), bias.node()},
                     [cols, height, width](detail::Node& self) {
                       auto& px = *self.parents[0];
                       auto& pw = *self.parents[1];
                       auto& pb = *self.parents[2];
                       if (pw.requires_grad) pw.accumulate(cols->transpose() * self.grad);
                       if (pb.requires_grad) pb.accumulate(self.grad.colwise().sum());
                       if (px.requires_grad) {
                         Matrix dcols = self.grad * pw.value.transpose();
                         px.accumulate(col2im3x3(dcols, height, width, px.value.cols()));
                       }
                     },
                     "conv3x3");
}

DiffValue avg_pool2(const DiffValue& x, int height, int width) {
  const Matrix& xv = x.value();
  if (height % 2 != 0 || width % 2 != 0 || xv.rows() != static_cast<Eigen::Index>(height) * width) {
    throw ShapeError("avg_pool2: input " + shape_of(xv) + " is not an even " + std::to_string(height) + "x" +
                     std::to_string(width) + " map");
  }
  const int oh = height / 2;
  const int ow = width / 2;
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(oh) * ow, xv.cols());
  for (int y = 0; y < oh; ++y) {
    for (int xo = 0; xo < ow; ++xo) {
      auto row = out.row(static_cast<Eigen::Index>(y) * ow + xo);
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          row += 0.25 * xv.row(static_cast<Eigen::Index>(2 * y + dy) * width + 2 * xo + dx);
        }
      }
    }
  }
  return make_result(std::move(out), {x.node()},
                     [height, width](detail::Node& self) {
                       auto& px = *self.parents[0];
                       const int ow = width / 2;
                       Matrix g(px.value.rows(), px.value.cols());
                       for (int y = 0; y < height; ++y) {
                         for (int xi = 0; xi < width; ++xi) {
                           g.row(static_cast<Eigen::Index>(y) * width + xi) =
                               0.25 * self.grad.row(static_cast<Eigen::Index>(y / 2) * ow + xi / 2);
                         }
                       }
                       px.accumulate(g);
                     },
                     "avg_pool2");
}

}  // namespace sculptor::ad
