#pragma once

#include "sculptor/geometry/mesh.hpp"

namespace sculptor::surface {

inline constexpr double kDefaultMinFraction = 0.05;

/// Drops connected components whose face count is below min_fraction times the
/// largest component's, then rescales uniformly so the longest bounding-box side
/// spans [-0.5, 0.5] and the box is centred at the origin.
geometry::TriMesh postprocess(const geometry::TriMesh& mesh, double min_fraction = kDefaultMinFraction);

}  // namespace sculptor::surface
