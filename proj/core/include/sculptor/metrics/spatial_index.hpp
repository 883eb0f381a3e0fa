#pragma once

#include <span>
#include <vector>

#include "sculptor/geometry/mesh.hpp"

namespace sculptor::metrics {

using geometry::Vec3;

/// Closest point to p on triangle (a, b, c), by Voronoi-region classification.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Squared distance from p to the closest point on triangle (a, b, c).
double point_triangle_sqdist(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Bounding-volume hierarchy over a mesh's triangles for nearest-triangle queries.
class TriangleBvh {
 public:
  explicit TriangleBvh(const geometry::TriMesh& mesh);

  /// Squared distance from p to the nearest triangle; identical to the minimum of
  /// point_triangle_sqdist over all faces.
  double nearest_sqdist(const Vec3& p) const;

 private:
  struct Node {
    geometry::Aabb box;
    int left = -1;  ///< child node index, -1 for leaves
    int right = -1;
    int begin = 0;  ///< leaf range into order_
    int end = 0;
  };
  int build(int begin, int end);

  const geometry::TriMesh* mesh_;
  std::vector<int> order_;
  std::vector<Vec3> centroids_;
  std::vector<geometry::Aabb> boxes_;
  std::vector<Node> nodes_;
};

/// 3-d tree over a point set for nearest-neighbour distance queries.
class PointKdTree {
 public:
  explicit PointKdTree(std::vector<Vec3> points);

  /// Squared distance to the nearest stored point.
  double nearest_sqdist(const Vec3& p) const;

 private:
  struct Node {
    int point = -1;
    int axis = 0;
    int left = -1;
    int right = -1;
  };
  int build(int begin, int end, int depth);
  void search(int node, const Vec3& p, double& best) const;

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace sculptor::metrics
