#include "sculptor/raster/raster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "sculptor/error.hpp"

namespace sculptor::raster {

std::size_t RasterInput::silhouette_area() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

Projection project(const Vec3& p, int resolution) {
  const double r = resolution;
  return {(p.x() + 0.5) * r, (p.y() + 0.5) * r, p.z() + 0.5};
}

RasterInput rasterize(const geometry::TriMesh& mesh, int resolution) {
  if (resolution < 16) throw ShapeError("rasterize: resolution must be at least 16");
  const int R = resolution;
  RasterInput out;
  out.resolution = R;
  out.mask.assign(static_cast<std::size_t>(R) * R, 0);
  std::vector<double> nearest(static_cast<std::size_t>(R) * R, std::numeric_limits<double>::infinity());

  constexpr double kEdgeTolerance = 1e-12;
  for (const geometry::Face& f : mesh.faces) {
    const Projection a = project(mesh.vertices[f[0]], R);
    const Projection b = project(mesh.vertices[f[1]], R);
    const Projection c = project(mesh.vertices[f[2]], R);
    const double area = (b.u - a.u) * (c.v - a.v) - (b.v - a.v) * (c.u - a.u);
    if (std::abs(area) < 1e-18) continue;  // edge-on to the camera
    const int u0 = std::max(0, static_cast<int>(std::floor(std::min({a.u, b.u, c.u}) - 0.5)));
    const int u1 = std::min(R - 1, static_cast<int>(std::ceil(std::max({a.u, b.u, c.u}) - 0.5)));
    const int v0 = std::max(0, static_cast<int>(std::floor(std::min({a.v, b.v, c.v}) - 0.5)));
    const int v1 = std::min(R - 1, static_cast<int>(std::ceil(std::max({a.v, b.v, c.v}) - 0.5)));
    for (int v = v0; v <= v1; ++v) {
      const double pv = v + 0.5;
      for (int u = u0; u <= u1; ++u) {
        const double pu = u + 0.5;
        // Barycentric weights via signed sub-areas.
        const double wa = ((b.u - pu) * (c.v - pv) - (b.v - pv) * (c.u - pu)) / area;
        const double wb = ((c.u - pu) * (a.v - pv) - (c.v - pv) * (a.u - pu)) / area;
        const double wc = 1.0 - wa - wb;
        if (wa < -kEdgeTolerance || wb < -kEdgeTolerance || wc < -kEdgeTolerance) continue;
        const double z = wa * a.z + wb * b.z + wc * c.z;
        const std::size_t idx = out.index(u, v);
        out.mask[idx] = 1;
        nearest[idx] = std::min(nearest[idx], z);
      }
    }
  }
  out.depth.assign(nearest.size(), 0.0);
  for (std::size_t i = 0; i < nearest.size(); ++i) {
    if (out.mask[i]) out.depth[i] = std::clamp(nearest[i], 0.0, 1.0);
  }
  if (out.silhouette_area() == 0) throw ShapeError("rasterize: empty silhouette (mesh outside the view volume)");
  return out;
}

namespace {

void write_pgm(const std::filesystem::path& path, int resolution, int maxval, const std::vector<int>& pixels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P5\n" << resolution << ' ' << resolution << '\n' << maxval << '\n';
  // PGM rows run top to bottom; raster rows run bottom (v = 0) to top.
  for (int row = resolution - 1; row >= 0; --row) {
    for (int u = 0; u < resolution; ++u) {
      const int value = pixels[static_cast<std::size_t>(row) * resolution + u];
      if (maxval > 255) out.put(static_cast<char>((value >> 8) & 0xFF));
      out.put(static_cast<char>(value & 0xFF));
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<int> read_pgm(const std::filesystem::path& path, int& resolution, int& maxval) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic;
  int w = 0, h = 0;
  in >> magic >> w >> h >> maxval;
  in.get();
  if (magic != "P5" || w != h || w <= 0 || maxval <= 0 || maxval > 65535) {
    throw IoError(path.string() + ": expected a square binary PGM");
  }
  resolution = w;
  std::vector<int> pixels(static_cast<std::size_t>(w) * h);
  for (int row = h - 1; row >= 0; --row) {
    for (int u = 0; u < w; ++u) {
      int value = in.get();
      if (maxval > 255) value = (value << 8) | in.get();
      if (!in) throw IoError(path.string() + ": truncated pixel data");
      pixels[static_cast<std::size_t>(row) * w + u] = value;
    }
  }
  return pixels;
}

}  // namespace

void write_mask_pgm(const std::filesystem::path& path, const RasterInput& input) {
  std::vector<int> pixels(input.mask.size());
  std::transform(input.mask.begin(), input.mask.end(), pixels.begin(), [](std::uint8_t m) { return m ? 255 : 0; });
  write_pgm(path, input.resolution, 255, pixels);
}

void write_depth_pgm(const std::filesystem::path& path, const RasterInput& input) {
  std::vector<int> pixels(input.depth.size());
  std::transform(input.depth.begin(), input.depth.end(), pixels.begin(),
                 [](double d) { return static_cast<int>(std::lround(std::clamp(d, 0.0, 1.0) * 65535.0)); });
  write_pgm(path, input.resolution, 65535, pixels);
}

RasterInput read_pgm_pair(const std::filesystem::path& mask_path, const std::filesystem::path& depth_path) {
  int rm = 0, rd = 0, mm = 0, md = 0;
  const auto mask = read_pgm(mask_path, rm, mm);
  const auto depth = read_pgm(depth_path, rd, md);
  if (rm != rd) throw IoError("mask and depth dumps have different resolutions");
  RasterInput out;
  out.resolution = rm;
  out.mask.resize(mask.size());
  out.depth.resize(depth.size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    out.mask[i] = mask[i] > 0 ? 1 : 0;
    out.depth[i] = out.mask[i] ? static_cast<double>(depth[i]) / md : 0.0;
  }
  return out;
}

}  // namespace sculptor::raster
