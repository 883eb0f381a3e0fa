#include "sculptor/model/pixel_align.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "sculptor/error.hpp"
#include "sculptor/raster/raster.hpp"

namespace sculptor::model {

namespace {

// Lower tap index and fractional offset along one axis of length n.
std::pair<int, double> axis_tap(double g, int n) {
  if (n == 1) return {0, 0.0};
  g = std::clamp(g, 0.0, static_cast<double>(n - 1));
  const int i0 = std::min(static_cast<int>(std::floor(g)), n - 2);
  return {i0, g - i0};
}

}  // namespace

BilinearTaps bilinear_taps(std::span<const geometry::Vec3> points, int input_resolution, int height, int width) {
  if (height < 1 || width < 1) throw ShapeError("bilinear_taps: empty grid");
  const auto n = static_cast<Eigen::Index>(points.size());
  BilinearTaps taps;
  taps.indices.resize(points.size() * 4);
  taps.weights.resize(n, 4);
  taps.depth.resize(n, 1);
  const double sx = static_cast<double>(width) / input_resolution;
  const double sy = static_cast<double>(height) / input_resolution;
  for (Eigen::Index i = 0; i < n; ++i) {
    const raster::Projection pr = raster::project(points[static_cast<std::size_t>(i)], input_resolution);
    const auto [u0, fu] = axis_tap(pr.u * sx - 0.5, width);
    const auto [v0, fv] = axis_tap(pr.v * sy - 0.5, height);
    const int u1 = std::min(u0 + 1, width - 1);
    const int v1 = std::min(v0 + 1, height - 1);
    const std::array<int, 4> idx{v0 * width + u0, v0 * width + u1, v1 * width + u0, v1 * width + u1};
    std::copy(idx.begin(), idx.end(), taps.indices.begin() + i * 4);
    taps.weights(i, 0) = (1 - fu) * (1 - fv);
    taps.weights(i, 1) = fu * (1 - fv);
    taps.weights(i, 2) = (1 - fu) * fv;
    taps.weights(i, 3) = fu * fv;
    taps.depth(i, 0) = pr.z;
  }
  return taps;
}

ad::DiffValue pixel_align(const ad::DiffValue& level, const BilinearTaps& taps) {
  const std::array<ad::DiffValue, 2> parts{ad::weighted_gather_rows(level, taps.indices, taps.weights),
                                           ad::DiffValue::constant(taps.depth)};
  return ad::concat_cols(parts);
}

}  // namespace sculptor::model
