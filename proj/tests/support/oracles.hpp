#pragma once

// Reference implementations used as test oracles. Each one is written directly
// from its definition and shares no code with the library routine it checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "sculptor/autodiff/tensor.hpp"
#include "sculptor/geometry/mesh.hpp"

namespace oracle {

using sculptor::geometry::Face;
using sculptor::geometry::TriMesh;
using sculptor::geometry::Vec3;

/// Axis-aligned cube of the given half extent centred at c, outward faces.
inline TriMesh cube(double half = 0.5, const Vec3& c = Vec3::Zero()) {
  TriMesh m;
  for (int i = 0; i < 8; ++i) {
    m.vertices.push_back(c + half * Vec3(i & 1 ? 1 : -1, i & 2 ? 1 : -1, i & 4 ? 1 : -1));
  }
  // Quads listed counter-clockwise seen from outside.
  const int quads[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  for (const auto& q : quads) {
    m.faces.push_back({q[0], q[1], q[2]});
    m.faces.push_back({q[0], q[2], q[3]});
  }
  return m;
}

/// Subdivided icosahedron projected to a sphere.
inline TriMesh icosphere(int subdivisions, double radius = 0.5, const Vec3& c = Vec3::Zero()) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                         {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<Face> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                         {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                         {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const int id = static_cast<int>(v.size()) - 1;
      mid.emplace(key, id);
      return id;
    };
    std::vector<Face> next;
    for (const auto& tri : f) {
      const int a = midpoint(tri[0], tri[1]);
      const int b = midpoint(tri[1], tri[2]);
      const int cc = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], a, cc});
      next.push_back({tri[1], b, a});
      next.push_back({tri[2], cc, b});
      next.push_back({a, b, cc});
    }
    f = std::move(next);
  }
  TriMesh m;
  for (const auto& p : v) m.vertices.push_back(c + radius * p);
  m.faces = f;
  return m;
}

/// Moller-Trumbore ray/triangle intersection; true for hits with t > 0.
inline bool ray_hits(const Vec3& o, const Vec3& d, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 pv = d.cross(e2);
  const double det = e1.dot(pv);
  if (std::abs(det) < 1e-15) return false;
  const double inv = 1.0 / det;
  const Vec3 tv = o - a;
  const double u = tv.dot(pv) * inv;
  if (u < 0.0 || u > 1.0) return false;
  const Vec3 qv = tv.cross(e1);
  const double w = d.dot(qv) * inv;
  if (w < 0.0 || u + w > 1.0) return false;
  return e2.dot(qv) * inv > 0.0;
}

/// Even-odd parity along one ray.
inline bool inside_parity(const TriMesh& m, const Vec3& p, const Vec3& dir) {
  int hits = 0;
  for (const auto& f : m.faces) hits += ray_hits(p, dir, m.vertices[f[0]], m.vertices[f[1]], m.vertices[f[2]]);
  return hits % 2 == 1;
}

/// Majority vote of even-odd parity over the given ray directions.
inline bool inside_raycast(const TriMesh& m, const Vec3& p, const std::vector<Vec3>& dirs) {
  int votes = 0;
  for (const auto& d : dirs) votes += inside_parity(m, p, d);
  return 2 * votes > static_cast<int>(dirs.size());
}

inline std::vector<Vec3> random_directions(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<Vec3> out;
  for (int i = 0; i < n; ++i) out.push_back(Vec3(g(rng), g(rng), g(rng)).normalized());
  return out;
}

inline double segment_sqdist(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - p).squaredNorm();
}

/// Point/triangle distance via plane projection and edge fallback.
inline double triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 n = (b - a).cross(c - a);
  const double n2 = n.squaredNorm();
  if (n2 > 0.0) {
    const Vec3 q = p - n * ((p - a).dot(n) / n2);
    // Inside test by signs of sub-triangle normals.
    const double s0 = (b - a).cross(q - a).dot(n);
    const double s1 = (c - b).cross(q - b).dot(n);
    const double s2 = (a - c).cross(q - c).dot(n);
    if (s0 >= 0.0 && s1 >= 0.0 && s2 >= 0.0) return (p - q).norm();
  }
  return std::sqrt(std::min({segment_sqdist(p, a, b), segment_sqdist(p, b, c), segment_sqdist(p, c, a)}));
}

inline double mesh_distance(const Vec3& p, const TriMesh& m) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& f : m.faces) {
    best = std::min(best, triangle_distance(p, m.vertices[f[0]], m.vertices[f[1]], m.vertices[f[2]]));
  }
  return best;
}

inline double mean_point_to_mesh(const std::vector<Vec3>& points, const TriMesh& m) {
  double s = 0.0;
  for (const auto& p : points) s += mesh_distance(p, m);
  return s / static_cast<double>(points.size());
}

inline double one_sided(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double s = 0.0;
  for (const auto& p : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : b) best = std::min(best, (p - q).norm());
    s += best;
  }
  return s / static_cast<double>(a.size());
}

inline double chamfer_double_loop(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  return one_sided(a, b) + one_sided(b, a);
}

/// Biased squared MMD by explicit triple sums.
inline double mmd(const sculptor::ad::Matrix& s, const sculptor::ad::Matrix& t, double sigma) {
  auto k = [&](const auto& x, const auto& y) { return std::exp(-(x - y).squaredNorm() / (2.0 * sigma * sigma)); };
  double ss = 0.0, tt = 0.0, st = 0.0;
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    for (Eigen::Index j = 0; j < s.rows(); ++j) ss += k(s.row(i), s.row(j));
  for (Eigen::Index i = 0; i < t.rows(); ++i)
    for (Eigen::Index j = 0; j < t.rows(); ++j) tt += k(t.row(i), t.row(j));
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    for (Eigen::Index j = 0; j < t.rows(); ++j) st += k(s.row(i), t.row(j));
  const double ns = static_cast<double>(s.rows());
  const double nt = static_cast<double>(t.rows());
  return ss / (ns * ns) + tt / (nt * nt) - 2.0 * st / (ns * nt);
}

struct Knn {
  std::vector<std::vector<int>> neighbours;
  std::vector<double> aggregate;
};

/// Full sort of (distance, index) pairs per target row, depth column scaled by lambda.
inline Knn knn_exhaustive(const sculptor::ad::Matrix& target, const sculptor::ad::Matrix& source,
                          const Eigen::VectorXd& labels, int k, double lambda) {
  const Eigen::Index d = target.cols();
  Knn out;
  for (Eigen::Index i = 0; i < target.rows(); ++i) {
    std::vector<std::pair<double, int>> all;
    for (Eigen::Index j = 0; j < source.rows(); ++j) {
      double acc = 0.0;
      for (Eigen::Index c = 0; c < d; ++c) {
        const double w = c == d - 1 ? lambda : 1.0;
        const double diff = w * target(i, c) - w * source(j, c);
        acc += diff * diff;
      }
      all.emplace_back(acc, static_cast<int>(j));
    }
    std::sort(all.begin(), all.end());
    std::vector<int> nb;
    double sum = 0.0;
    for (int q = 0; q < k; ++q) {
      nb.push_back(all[q].second);
      sum += labels[all[q].second];
    }
    out.neighbours.push_back(nb);
    out.aggregate.push_back(sum / k);
  }
  return out;
}

inline double binary_entropy(double x) {
  auto xlx = [](double v) { return v * std::log(std::max(v, 1e-12)); };
  return -xlx(x) - xlx(1.0 - x);
}

inline double sphere_area(double r) { return 4.0 * std::numbers::pi * r * r; }
inline double sphere_volume(double r) { return 4.0 / 3.0 * std::numbers::pi * r * r * r; }

}  // namespace oracle
