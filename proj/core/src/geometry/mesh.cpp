#include "sculptor/geometry/mesh.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_map>

#include "sculptor/error.hpp"

namespace sculptor::geometry {

namespace {

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (hi << 32) | lo;
}

std::unordered_map<std::uint64_t, int> edge_use_counts(const TriMesh& mesh) {
  std::unordered_map<std::uint64_t, int> counts;
  counts.reserve(mesh.faces.size() * 2);
  for (const Face& f : mesh.faces) {
    for (int k = 0; k < 3; ++k) ++counts[edge_key(f[k], f[(k + 1) % 3])];
  }
  return counts;
}

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

Aabb bounding_box(const TriMesh& mesh) {
  Aabb box;
  for (const Vec3& v : mesh.vertices) box.extend(v);
  return box;
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) { return 0.5 * (b - a).cross(c - a).norm(); }

double surface_area(const TriMesh& mesh) {
  double total = 0.0;
  for (const Face& f : mesh.faces) total += triangle_area(mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]);
  return total;
}

double signed_volume(const TriMesh& mesh) {
  double total = 0.0;
  for (const Face& f : mesh.faces) {
    total += mesh.vertices[f[0]].dot(mesh.vertices[f[1]].cross(mesh.vertices[f[2]]));
  }
  return total / 6.0;
}

Similarity unit_box_transform(const TriMesh& mesh) {
  const Aabb box = bounding_box(mesh);
  if (box.empty()) throw ShapeError("unit_box_transform: mesh has no vertices");
  const double longest = box.extent().maxCoeff();
  if (!(longest > 0.0)) throw ShapeError("unit_box_transform: mesh has zero extent");
  return {box.center(), 1.0 / longest};
}

TriMesh transformed(const TriMesh& mesh, const Similarity& t) {
  TriMesh out = mesh;
  for (Vec3& v : out.vertices) v = t.apply(v);
  return out;
}

TriMesh normalized(const TriMesh& mesh) {
  TriMesh out = transformed(mesh, unit_box_transform(mesh));
  // Pin the longest axis to exactly +-0.5 against rounding in the affine map.
  const Aabb box = bounding_box(out);
  const Eigen::Index axis = [&] {
    Eigen::Index i;
    box.extent().maxCoeff(&i);
    return i;
  }();
  for (Vec3& v : out.vertices) v[axis] = std::clamp(v[axis], -0.5, 0.5);
  return out;
}

TriMesh remove_degenerate_faces(const TriMesh& mesh, double area_epsilon) {
  std::vector<int> keep;
  keep.reserve(mesh.faces.size());
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    const Face& f = mesh.faces[i];
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) continue;
    if (triangle_area(mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]) <= area_epsilon) continue;
    keep.push_back(static_cast<int>(i));
  }
  return submesh(mesh, keep);
}

std::size_t non_manifold_edge_count(const TriMesh& mesh) {
  std::size_t n = 0;
  for (const auto& [key, count] : edge_use_counts(mesh)) {
    if (count > 2) ++n;
  }
  return n;
}

bool is_watertight(const TriMesh& mesh) {
  if (mesh.faces.empty()) return false;
  for (const auto& [key, count] : edge_use_counts(mesh)) {
    if (count != 2) return false;
  }
  return true;
}

std::vector<int> face_components(const TriMesh& mesh, int* component_count) {
  std::vector<int> parent(mesh.vertices.size());
  std::iota(parent.begin(), parent.end(), 0);
  for (const Face& f : mesh.faces) {
    const int r0 = find_root(parent, f[0]);
    for (int k = 1; k < 3; ++k) {
      const int rk = find_root(parent, f[k]);
      if (rk != r0) parent[rk] = r0;
    }
  }
  std::unordered_map<int, int> ids;
  std::vector<int> out(mesh.faces.size());
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    const int root = find_root(parent, mesh.faces[i][0]);
    auto [it, inserted] = ids.emplace(root, static_cast<int>(ids.size()));
    out[i] = it->second;
  }
  if (component_count) *component_count = static_cast<int>(ids.size());
  return out;
}

TriMesh submesh(const TriMesh& mesh, const std::vector<int>& face_ids) {
  std::vector<int> remap(mesh.vertices.size(), -1);
  for (int fi : face_ids) {
    for (int v : mesh.faces[static_cast<std::size_t>(fi)]) remap[v] = 0;
  }
  TriMesh out;
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    if (remap[v] < 0) continue;
    remap[v] = static_cast<int>(out.vertices.size());
    out.vertices.push_back(mesh.vertices[v]);
  }
  out.faces.reserve(face_ids.size());
  for (int fi : face_ids) {
    Face f = mesh.faces[static_cast<std::size_t>(fi)];
    for (int& v : f) v = remap[v];
    out.faces.push_back(f);
  }
  return out;
}

TriMesh merge(const TriMesh& a, const TriMesh& b) {
  TriMesh out = a;
  const int offset = static_cast<int>(a.vertices.size());
  out.vertices.insert(out.vertices.end(), b.vertices.begin(), b.vertices.end());
  for (Face f : b.faces) {
    for (int& v : f) v += offset;
    out.faces.push_back(f);
  }
  return out;
}

}  // namespace sculptor::geometry
