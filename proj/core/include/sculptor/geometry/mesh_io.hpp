#pragma once

#include <filesystem>
#include <iosfwd>

#include "sculptor/geometry/mesh.hpp"

namespace sculptor::geometry {

/// Wavefront OBJ: v and f records; polygons are fan-triangulated, negative
/// (relative) indices and v/vt/vn references are accepted.
TriMesh read_obj(std::istream& in);
/// ASCII PLY with a vertex element carrying x, y, z and a face element with a
/// vertex_indices (or vertex_index) list property.
TriMesh read_ply(std::istream& in);

void write_obj(std::ostream& out, const TriMesh& mesh);
void write_ply(std::ostream& out, const TriMesh& mesh);

/// Reads by extension (.obj / .ply) without any cleanup.
TriMesh read_mesh(const std::filesystem::path& path);
/// Reads, removes degenerate faces, rejects empty or non-manifold input, and
/// normalizes into the unit box.
TriMesh load_mesh(const std::filesystem::path& path);
/// Writes by extension (.obj / .ply).
void save_mesh(const std::filesystem::path& path, const TriMesh& mesh);

}  // namespace sculptor::geometry
