#pragma once

#include <vector>

#include "sculptor/geometry/mesh.hpp"

namespace sculptor::model {
class OccupancyModel;
}
namespace sculptor::raster {
struct RasterInput;
}

namespace sculptor::surface {

using geometry::Vec3;

/// Values on a regular lattice: node (i, j, k) sits at origin + spacing * (i, j, k)
/// and is stored at index (k * ny + j) * nx + i.
struct ScalarGrid {
  int nx = 0;
  int ny = 0;
  int nz = 0;
  Vec3 origin = Vec3::Zero();
  double spacing = 1.0;
  std::vector<double> values;

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * ny + j) * nx + i;
  }
  double at(int i, int j, int k) const { return values[index(i, j, k)]; }
  Vec3 position(int i, int j, int k) const { return origin + spacing * Vec3(i, j, k); }
};

/// G^3 lattice spanning exactly [-0.5, 0.5]^3.
ScalarGrid unit_box_lattice(int resolution);

/// Copy of the grid surrounded by one extra layer of nodes set to `fill`, so an
/// isosurface that reaches the lattice boundary is closed off there.
ScalarGrid padded(const ScalarGrid& grid, double fill);

/// Fused occupancy of the model evaluated at every lattice node of a G^3 grid
/// over the unit box. Evaluation runs without graph recording in fixed-size chunks.
ScalarGrid sample_grid(const model::OccupancyModel& model, const raster::RasterInput& input, int resolution);

}  // namespace sculptor::surface
