#include "sculptor/surface/marching_cubes.hpp"

#include <array>
#include <unordered_map>

#include "sculptor/error.hpp"

namespace sculptor::surface {

namespace {

using geometry::Face;
using geometry::TriMesh;

// Corner c = (x, y, z) offsets.
constexpr std::array<std::array<int, 3>, 8> kCorner = {{
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
}};

constexpr std::array<std::array<int, 2>, 12> kEdge = {{
    {0, 1}, {1, 2}, {3, 2}, {0, 3}, {4, 5}, {5, 6}, {7, 6}, {4, 7}, {0, 4}, {1, 5}, {2, 6}, {3, 7},
}};

// Face corners in counter-clockwise order seen from outside the cell.
constexpr std::array<std::array<int, 4>, 6> kFace = {{
    {0, 3, 2, 1},  // z = 0
    {4, 5, 6, 7},  // z = 1
    {0, 1, 5, 4},  // y = 0
    {3, 7, 6, 2},  // y = 1
    {0, 4, 7, 3},  // x = 0
    {1, 2, 6, 5},  // x = 1
}};

constexpr int edge_between(int a, int b) {
  for (int e = 0; e < 12; ++e) {
    if ((kEdge[e][0] == a && kEdge[e][1] == b) || (kEdge[e][0] == b && kEdge[e][1] == a)) return e;
  }
  return -1;
}

struct FaceEdges {
  std::array<std::array<int, 4>, 6> edge{};
};

constexpr FaceEdges make_face_edges() {
  FaceEdges fe;
  for (int f = 0; f < 6; ++f) {
    for (int k = 0; k < 4; ++k) fe.edge[f][k] = edge_between(kFace[f][k], kFace[f][(k + 1) % 4]);
  }
  return fe;
}

constexpr FaceEdges kFaceEdges = make_face_edges();

// share_face[a][b]: local edges a and b lie on a common cell face. A polygon
// diagonal between two such crossings could be emitted again by the
// neighbouring cell, so fans avoid them.
constexpr std::array<std::array<bool, 12>, 12> make_share_face() {
  std::array<std::array<bool, 12>, 12> out{};
  for (int f = 0; f < 6; ++f)
    for (int p = 0; p < 4; ++p)
      for (int q = 0; q < 4; ++q) out[kFaceEdges.edge[f][p]][kFaceEdges.edge[f][q]] = true;
  return out;
}

constexpr auto kShareFace = make_share_face();

}  // namespace

TriMesh extract_isosurface(const ScalarGrid& grid, double iso) {
  TriMesh mesh;
  if (grid.nx < 2 || grid.ny < 2 || grid.nz < 2) return mesh;

  // Global lattice edge id -> vertex index. Edge id encodes the lower node and the axis.
  std::unordered_map<std::uint64_t, int> vertex_of_edge;
  auto edge_vertex = [&](int i, int j, int k, int local_edge, const std::array<double, 8>& v) {
    const int ca = kEdge[local_edge][0];
    const int cb = kEdge[local_edge][1];
    const int ia = i + kCorner[ca][0], ja = j + kCorner[ca][1], ka = k + kCorner[ca][2];
    const int axis = kCorner[cb][0] != kCorner[ca][0] ? 0 : (kCorner[cb][1] != kCorner[ca][1] ? 1 : 2);
    const std::uint64_t key = static_cast<std::uint64_t>(grid.index(ia, ja, ka)) * 3 + axis;
    auto [it, inserted] = vertex_of_edge.emplace(key, static_cast<int>(mesh.vertices.size()));
    if (inserted) {
      // ca is always the lower node of the edge, so both neighbouring cells agree.
      const double va = v[ca];
      const double vb = v[cb];
      const double t = (iso - va) / (vb - va);
      const Vec3 pa = grid.position(ia, ja, ka);
      Vec3 pb = pa;
      pb[axis] += grid.spacing;
      mesh.vertices.push_back(pa + t * (pb - pa));
    }
    return it->second;
  };

  std::array<double, 8> v{};
  for (int k = 0; k + 1 < grid.nz; ++k) {
    for (int j = 0; j + 1 < grid.ny; ++j) {
      for (int i = 0; i + 1 < grid.nx; ++i) {
        int mask = 0;
        for (int c = 0; c < 8; ++c) {
          v[c] = grid.at(i + kCorner[c][0], j + kCorner[c][1], k + kCorner[c][2]);
          if (v[c] > iso) mask |= 1 << c;
        }
        if (mask == 0 || mask == 0xFF) continue;

        // next[e] = edge reached from edge e's crossing by the segment on one face.
        std::array<int, 12> next;
        next.fill(-1);
        for (int f = 0; f < 6; ++f) {
          const auto& corners = kFace[f];
          std::array<bool, 4> in{};
          for (int q = 0; q < 4; ++q) in[q] = (mask >> corners[q]) & 1;
          std::array<int, 4> out_crossing{};  // edge slots where in -> out going CCW
          std::array<int, 4> in_crossing{};   // edge slots where out -> in
          int n_out = 0, n_in = 0;
          for (int q = 0; q < 4; ++q) {
            if (in[q] && !in[(q + 1) % 4]) out_crossing[n_out++] = q;
            if (!in[q] && in[(q + 1) % 4]) in_crossing[n_in++] = q;
          }
          if (n_out == 0) continue;
          const auto& fe = kFaceEdges.edge[f];
          if (n_out == 1) {
            next[fe[out_crossing[0]]] = fe[in_crossing[0]];
            continue;
          }
          // Ambiguous face: the sign of the bilinear saddle decides whether the
          // two inside corners are joined through the face centre.
          const double a = v[corners[0]] - iso, b = v[corners[1]] - iso;
          const double c = v[corners[2]] - iso, d = v[corners[3]] - iso;
          const double saddle = (a * c - b * d) / (a + c - b - d);
          const bool centre_inside = saddle > 0.0;
          for (int s = 0; s < 2; ++s) {
            const int q = out_crossing[s];
            // Crossing slots in CCW order around the face are q, q+1, q+2, q+3 (mod 4).
            const int q_next = (q + 1) % 4;
            const int q_prev = (q + 3) % 4;
            next[fe[q]] = fe[centre_inside ? q_next : q_prev];
          }
        }

        std::array<bool, 12> used{};
        for (int start = 0; start < 12; ++start) {
          if (next[start] < 0 || used[start]) continue;
          std::array<int, 12> loop{};
          std::array<int, 12> loop_edge{};
          int len = 0;
          int e = start;
          while (!used[e]) {
            used[e] = true;
            loop_edge[len] = e;
            loop[len++] = edge_vertex(i, j, k, e, v);
            e = next[e];
            if (e < 0) throw Error("marching_cubes: open segment chain");
          }
          int anchor = -1;
          for (int a = 0; a < len && anchor < 0; ++a) {
            bool ok = true;
            for (int t = 2; t + 1 < len && ok; ++t) ok = !kShareFace[loop_edge[a]][loop_edge[(a + t) % len]];
            if (ok) anchor = a;
          }
          if (anchor >= 0) {
            for (int t = 1; t + 1 < len; ++t) {
              mesh.faces.push_back({loop[anchor], loop[(anchor + t + 1) % len], loop[(anchor + t) % len]});
            }
          } else {
            Vec3 centre = Vec3::Zero();
            for (int t = 0; t < len; ++t) centre += mesh.vertices[static_cast<std::size_t>(loop[t])];
            const int c = static_cast<int>(mesh.vertices.size());
            mesh.vertices.push_back(centre / len);
            for (int t = 0; t < len; ++t) mesh.faces.push_back({c, loop[(t + 1) % len], loop[t]});
          }
        }
      }
    }
  }
  return mesh;
}

TriMesh marching_cubes(const ScalarGrid& grid, double iso) {
  TriMesh mesh = extract_isosurface(grid, iso);
  if (mesh.empty()) throw ShapeError("marching_cubes: the grid never crosses the iso level");
  return mesh;
}

}  // namespace sculptor::surface
