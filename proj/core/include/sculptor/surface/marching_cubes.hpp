#pragma once

#include "sculptor/geometry/mesh.hpp"
#include "sculptor/surface/grid.hpp"

namespace sculptor::surface {

/// Occupancy level at which surfaces are extracted.
inline constexpr double kSurfaceLevel = 0.5;

/// Marching cubes over the lattice; "inside" means value > iso. Vertices are
/// linearly interpolated on lattice edges and shared between neighbouring cells.
/// Ambiguous faces are resolved with the asymptotic decider, so neighbouring
/// cells always agree and the output is closed wherever the solid does not
/// touch the lattice boundary. Triangles are oriented with normals pointing out
/// of the inside region. Returns an empty mesh when nothing crosses iso.
geometry::TriMesh extract_isosurface(const ScalarGrid& grid, double iso);

/// extract_isosurface() that throws ShapeError when the result is empty.
geometry::TriMesh marching_cubes(const ScalarGrid& grid, double iso = kSurfaceLevel);

}  // namespace sculptor::surface
