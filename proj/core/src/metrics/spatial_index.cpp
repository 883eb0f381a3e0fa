#include "sculptor/metrics/spatial_index.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "sculptor/error.hpp"

namespace sculptor::metrics {

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  }

  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

double point_triangle_sqdist(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  return (p - closest_point_on_triangle(p, a, b, c)).squaredNorm();
}

namespace {

double box_sqdist(const geometry::Aabb& box, const Vec3& p) {
  const Vec3 d = (box.min - p).cwiseMax(p - box.max).cwiseMax(0.0);
  return d.squaredNorm();
}

constexpr int kLeafSize = 4;

}  // namespace

TriangleBvh::TriangleBvh(const geometry::TriMesh& mesh) : mesh_(&mesh) {
  if (mesh.empty()) throw ShapeError("TriangleBvh: empty mesh");
  const std::size_t n = mesh.faces.size();
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0);
  centroids_.resize(n);
  boxes_.resize(n);
  for (std::size_t f = 0; f < n; ++f) {
    geometry::Aabb box;
    for (int v : mesh.faces[f]) box.extend(mesh.vertices[static_cast<std::size_t>(v)]);
    boxes_[f] = box;
    centroids_[f] = box.center();
  }
  nodes_.reserve(2 * n / kLeafSize + 1);
  build(0, static_cast<int>(n));
}

int TriangleBvh::build(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  geometry::Aabb box;
  geometry::Aabb centroid_box;
  for (int i = begin; i < end; ++i) {
    const int f = order_[static_cast<std::size_t>(i)];
    box.extend(boxes_[static_cast<std::size_t>(f)].min);
    box.extend(boxes_[static_cast<std::size_t>(f)].max);
    centroid_box.extend(centroids_[static_cast<std::size_t>(f)]);
  }
  nodes_[static_cast<std::size_t>(id)].box = box;
  if (end - begin <= kLeafSize) {
    nodes_[static_cast<std::size_t>(id)].begin = begin;
    nodes_[static_cast<std::size_t>(id)].end = end;
    return id;
  }
  Eigen::Index axis;
  centroid_box.extent().maxCoeff(&axis);
  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, [&](int a, int b) {
    const double ca = centroids_[static_cast<std::size_t>(a)][axis];
    const double cb = centroids_[static_cast<std::size_t>(b)][axis];
    return ca < cb || (ca == cb && a < b);
  });
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

double TriangleBvh::nearest_sqdist(const Vec3& p) const {
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    if (box_sqdist(node.box, p) > best) continue;
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const geometry::Face& f = mesh_->faces[static_cast<std::size_t>(order_[static_cast<std::size_t>(i)])];
        best = std::min(best, point_triangle_sqdist(p, mesh_->vertices[static_cast<std::size_t>(f[0])],
                                                    mesh_->vertices[static_cast<std::size_t>(f[1])],
                                                    mesh_->vertices[static_cast<std::size_t>(f[2])]));
      }
      continue;
    }
    // Visit the nearer child first (pushed last).
    const double dl = box_sqdist(nodes_[static_cast<std::size_t>(node.left)].box, p);
    const double dr = box_sqdist(nodes_[static_cast<std::size_t>(node.right)].box, p);
    if (dl <= dr) {
      stack.push_back(node.right);
      stack.push_back(node.left);
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  return best;
}

PointKdTree::PointKdTree(std::vector<Vec3> points) : points_(std::move(points)) {
  if (points_.empty()) throw ShapeError("PointKdTree: empty point set");
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(points_.size());
  root_ = build(0, static_cast<int>(points_.size()), 0);
}

int PointKdTree::build(int begin, int end, int depth) {
  if (begin >= end) return -1;
  const int axis = depth % 3;
  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, [&](int a, int b) {
    const double ca = points_[static_cast<std::size_t>(a)][axis];
    const double cb = points_[static_cast<std::size_t>(b)][axis];
    return ca < cb || (ca == cb && a < b);
  });
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({order_[static_cast<std::size_t>(mid)], axis, -1, -1});
  const int left = build(begin, mid, depth + 1);
  const int right = build(mid + 1, end, depth + 1);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

void PointKdTree::search(int node, const Vec3& p, double& best) const {
  if (node < 0) return;
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  const Vec3& q = points_[static_cast<std::size_t>(n.point)];
  best = std::min(best, (p - q).squaredNorm());
  const double delta = p[n.axis] - q[n.axis];
  const int near = delta < 0.0 ? n.left : n.right;
  const int far = delta < 0.0 ? n.right : n.left;
  search(near, p, best);
  if (delta * delta <= best) search(far, p, best);
}

double PointKdTree::nearest_sqdist(const Vec3& p) const {
  double best = std::numeric_limits<double>::infinity();
  search(root_, p, best);
  return best;
}

}  // namespace sculptor::metrics
