#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sculptor/geometry/mesh.hpp"

namespace sculptor::raster {

using geometry::Vec3;

/// Orthographic single-view input: silhouette mask and nearest-surface depth.
/// Pixel (u, v) covers x in [u/R - 0.5, (u+1)/R - 0.5) and likewise v for y;
/// storage is row-major with v as the row index.
struct RasterInput {
  int resolution = 0;
  std::vector<std::uint8_t> mask;
  /// z + 0.5 of the nearest (smallest z) surface on the pixel-centre ray; 0 off-mask.
  std::vector<double> depth;

  std::size_t index(int u, int v) const { return static_cast<std::size_t>(v) * resolution + u; }
  std::uint8_t mask_at(int u, int v) const { return mask[index(u, v)]; }
  double depth_at(int u, int v) const { return depth[index(u, v)]; }
  std::size_t silhouette_area() const;
};

struct Projection {
  double u = 0.0;  ///< continuous pixel coordinate, pixel centres at integer + 0.5
  double v = 0.0;
  double z = 0.0;  ///< depth remapped to [0, 1]
};

/// Camera looks along +z; (x, y) in [-0.5, 0.5]^2 maps onto the R x R image.
Projection project(const Vec3& p, int resolution);

/// Throws ShapeError when R < 16 or the silhouette is empty.
RasterInput rasterize(const geometry::TriMesh& mesh, int resolution);

/// Binary PGM dumps: mask as 8-bit 0/255, depth as 16-bit quantized [0, 1].
void write_mask_pgm(const std::filesystem::path& path, const RasterInput& input);
void write_depth_pgm(const std::filesystem::path& path, const RasterInput& input);
/// Rebuilds a raster from the two dumps written above (depth is quantized to 1/65535).
RasterInput read_pgm_pair(const std::filesystem::path& mask_path, const std::filesystem::path& depth_path);

}  // namespace sculptor::raster
