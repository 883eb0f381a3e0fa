#include "sculptor/surface/grid.hpp"

#include <algorithm>

#include "sculptor/autodiff/tensor.hpp"
#include "sculptor/error.hpp"
#include "sculptor/model/model.hpp"
#include "sculptor/raster/raster.hpp"

namespace sculptor::surface {

ScalarGrid unit_box_lattice(int resolution) {
  if (resolution < 2) throw ShapeError("lattice resolution must be at least 2");
  ScalarGrid grid;
  grid.nx = grid.ny = grid.nz = resolution;
  grid.origin = Vec3::Constant(-0.5);
  grid.spacing = 1.0 / (resolution - 1);
  grid.values.assign(static_cast<std::size_t>(resolution) * resolution * resolution, 0.0);
  return grid;
}

ScalarGrid padded(const ScalarGrid& grid, double fill) {
  ScalarGrid out;
  out.nx = grid.nx + 2;
  out.ny = grid.ny + 2;
  out.nz = grid.nz + 2;
  out.spacing = grid.spacing;
  out.origin = grid.origin - Vec3::Constant(grid.spacing);
  out.values.assign(static_cast<std::size_t>(out.nx) * out.ny * out.nz, fill);
  for (int k = 0; k < grid.nz; ++k) {
    for (int j = 0; j < grid.ny; ++j) {
      for (int i = 0; i < grid.nx; ++i) out.values[out.index(i + 1, j + 1, k + 1)] = grid.at(i, j, k);
    }
  }
  return out;
}

ScalarGrid sample_grid(const model::OccupancyModel& model, const raster::RasterInput& input, int resolution) {
  if (resolution < 16) throw ShapeError("sample_grid: resolution must be at least 16");
  ScalarGrid grid = unit_box_lattice(resolution);
  ad::NoGradGuard no_grad;
  const model::FeatureStack stack = model.encode(input);
  constexpr std::size_t kChunk = 16384;
  std::vector<Vec3> points;
  points.reserve(kChunk);
  const std::size_t total = grid.values.size();
  for (std::size_t begin = 0; begin < total; begin += kChunk) {
    const std::size_t end = std::min(total, begin + kChunk);
    points.clear();
    for (std::size_t idx = begin; idx < end; ++idx) {
      const int i = static_cast<int>(idx % grid.nx);
      const int j = static_cast<int>((idx / grid.nx) % grid.ny);
      const int k = static_cast<int>(idx / (static_cast<std::size_t>(grid.nx) * grid.ny));
      points.push_back(grid.position(i, j, k));
    }
    const model::OccupancyPrediction pred = model.predict(stack, points);
    std::copy(pred.fused.data(), pred.fused.data() + pred.fused.size(),
              grid.values.begin() + static_cast<std::ptrdiff_t>(begin));
  }
  return grid;
}

}  // namespace sculptor::surface
