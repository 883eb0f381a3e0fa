#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <limits>
#include <vector>

namespace sculptor::geometry {

using Vec3 = Eigen::Vector3d;
using Face = std::array<int, 3>;

struct Aabb {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 extent() const { return max - min; }
  bool empty() const { return (max.array() < min.array()).any(); }
};

/// Indexed triangle surface.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;

  bool empty() const { return faces.empty(); }
};

/// Uniform scale + translation mapping p to scale * (p - center).
struct Similarity {
  Vec3 center = Vec3::Zero();
  double scale = 1.0;

  Vec3 apply(const Vec3& p) const { return scale * (p - center); }
};

Aabb bounding_box(const TriMesh& mesh);
double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);
double surface_area(const TriMesh& mesh);
/// Signed volume from the divergence theorem; positive for outward-oriented closed meshes.
double signed_volume(const TriMesh& mesh);

/// Transform that centres the bounding box at the origin and scales its longest
/// side to exactly 1, i.e. the box fits [-0.5, 0.5]^3.
Similarity unit_box_transform(const TriMesh& mesh);
TriMesh transformed(const TriMesh& mesh, const Similarity& t);
TriMesh normalized(const TriMesh& mesh);

/// Drops faces with repeated indices or area below area_epsilon, then unused vertices.
TriMesh remove_degenerate_faces(const TriMesh& mesh, double area_epsilon = 1e-14);

/// Number of undirected edges used by more than two faces.
std::size_t non_manifold_edge_count(const TriMesh& mesh);
/// Every undirected edge is shared by exactly two faces.
bool is_watertight(const TriMesh& mesh);

/// Face-connected components (faces sharing a vertex are connected). Returns a
/// component id per face, ids ordered by first appearance.
std::vector<int> face_components(const TriMesh& mesh, int* component_count = nullptr);

/// Keeps only the listed faces and the vertices they reference.
TriMesh submesh(const TriMesh& mesh, const std::vector<int>& face_ids);

TriMesh merge(const TriMesh& a, const TriMesh& b);

}  // namespace sculptor::geometry
