#pragma once

#include <span>
#include <vector>

#include "sculptor/autodiff/tensor.hpp"
#include "sculptor/geometry/mesh.hpp"

namespace sculptor::model {

/// Bilinear sampling stencil for a set of query points on one grid size:
/// 4 row indices and weights per point, plus the points' remapped depth.
struct BilinearTaps {
  std::vector<int> indices;
  ad::Matrix weights;  ///< n x 4
  ad::Matrix depth;    ///< n x 1, z + 0.5
};

/// Projects points with the raster camera of resolution `input_resolution` and
/// rescales the pixel coordinates onto a height x width grid. Sampling happens at
/// grid-index coordinates (u' - 0.5, v' - 0.5), clamped to the grid, so a point
/// over a cell centre reproduces that cell's value.
BilinearTaps bilinear_taps(std::span<const geometry::Vec3> points, int input_resolution, int height, int width);

/// [bilinear(level), z]: n x (C + 1).
ad::DiffValue pixel_align(const ad::DiffValue& level, const BilinearTaps& taps);

}  // namespace sculptor::model
