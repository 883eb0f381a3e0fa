#include "sculptor/geometry/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "sculptor/error.hpp"
#include "sculptor/surface/marching_cubes.hpp"

namespace sculptor::geometry {

namespace {

double ellipsoid_sdf(const Vec3& p, const Vec3& axes) {
  // Bound-preserving approximation; exact on the zero level set.
  const double k0 = p.cwiseQuotient(axes).norm();
  const double k1 = p.cwiseQuotient(axes.cwiseProduct(axes)).norm();
  if (k1 == 0.0) return -axes.minCoeff();
  return k0 * (k0 - 1.0) / k1;
}

double vertical_cylinder_sdf(const Vec3& p, double cx, double radius, double y0, double y1) {
  const double radial = std::hypot(p.x() - cx, p.z()) - radius;
  const double half = 0.5 * (y1 - y0);
  const double axial = std::abs(p.y() - 0.5 * (y0 + y1)) - half;
  const double outside = std::hypot(std::max(radial, 0.0), std::max(axial, 0.0));
  return outside + std::min(std::max(radial, axial), 0.0);
}

double box_sdf(const Vec3& p, const Vec3& center, const Vec3& half) {
  const Vec3 q = (p - center).cwiseAbs() - half;
  return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
}

std::uint64_t mix_seed(std::uint64_t seed, Family family, std::size_t index) {
  // splitmix64 over the combined key
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + (family == Family::source ? 0x51ULL : 0x7AULL) +
                    static_cast<std::uint64_t>(index) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::string to_string(Family family) { return family == Family::source ? "source" : "target"; }

Family family_from_string(const std::string& name) {
  if (name == "source") return Family::source;
  if (name == "target") return Family::target;
  throw std::invalid_argument("unknown shape family '" + name + "'");
}

double synthetic_sdf(const SyntheticParams& params, const Vec3& p) {
  const Vec3 torso_center(0.0, params.torso_center_y, 0.0);
  double d = ellipsoid_sdf(p - torso_center, params.torso_axes);
  if (params.family == Family::source) {
    for (double sign : {-1.0, 1.0}) {
      d = std::min(d, vertical_cylinder_sdf(p, sign * params.leg_offset_x, params.leg_radius, 0.0,
                                            params.torso_center_y));
    }
  } else {
    const Vec3 half(params.base_half_x, 0.5 * params.base_height, params.base_half_z);
    d = std::min(d, box_sdf(p, Vec3(0.0, 0.5 * params.base_height, 0.0), half));
  }
  return d;
}

SyntheticParams draw_params(Family family, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  SyntheticParams p;
  p.family = family;
  const double ax = uniform(0.15, 0.21);
  const double ay = uniform(0.20, 0.27);
  const double az = uniform(0.10, 0.13);
  p.torso_axes = Vec3(ax, ay, az);
  if (family == Family::source) {
    const double visible_leg = uniform(0.30, 0.42);
    p.leg_radius = uniform(0.045, 0.065);
    const double max_offset = std::min(0.10, ax - p.leg_radius - 0.01);
    p.leg_offset_x = uniform(std::min(0.06, max_offset), max_offset);
    p.leg_offset_x = std::max(p.leg_offset_x, p.leg_radius + 0.02);
    p.torso_center_y = visible_leg + ay;
  } else {
    p.base_half_x = ax + uniform(0.02, 0.08);
    p.base_half_z = az + uniform(0.02, 0.08);
    p.base_height = uniform(0.22, 0.32);
    const double sink = uniform(0.03, 0.06);
    p.torso_center_y = p.base_height + ay - sink;
  }
  return p;
}

SyntheticShape build_synthetic(const SyntheticParams& params, const SyntheticOptions& options) {
  if (options.mesh_resolution < 8) throw std::invalid_argument("build_synthetic: mesh_resolution must be >= 8");
  const double half_x = params.family == Family::source
                            ? std::max(params.torso_axes.x(), params.leg_offset_x + params.leg_radius)
                            : std::max(params.torso_axes.x(), params.base_half_x);
  const double half_z =
      params.family == Family::source ? params.torso_axes.z() : std::max(params.torso_axes.z(), params.base_half_z);
  const double top = params.torso_center_y + params.torso_axes.y();
  const Vec3 lo(-half_x, 0.0, -half_z);
  const Vec3 hi(half_x, top, half_z);
  const double longest = (hi - lo).maxCoeff();
  const double h = longest / options.mesh_resolution;
  // Fractional offset keeps lattice nodes off the pedestal's axis-aligned faces.
  const Vec3 origin = lo - Vec3::Constant(1.63 * h);

  surface::ScalarGrid grid;
  grid.origin = origin;
  grid.spacing = h;
  grid.nx = static_cast<int>(std::ceil((hi.x() - lo.x()) / h)) + 5;
  grid.ny = static_cast<int>(std::ceil((hi.y() - lo.y()) / h)) + 5;
  grid.nz = static_cast<int>(std::ceil((hi.z() - lo.z()) / h)) + 5;
  grid.values.resize(static_cast<std::size_t>(grid.nx) * grid.ny * grid.nz);
  for (int k = 0; k < grid.nz; ++k) {
    for (int j = 0; j < grid.ny; ++j) {
      for (int i = 0; i < grid.nx; ++i) grid.values[grid.index(i, j, k)] = -synthetic_sdf(params, grid.position(i, j, k));
    }
  }
  TriMesh raw = surface::marching_cubes(grid, 0.0);

  SyntheticShape shape;
  shape.params = params;
  shape.to_unit = unit_box_transform(raw);
  shape.mesh = transformed(raw, shape.to_unit);
  return shape;
}

std::vector<SyntheticShape> make_synthetic_dataset(Family family, std::size_t count, std::uint64_t seed,
                                                   const SyntheticOptions& options) {
  if (count == 0) throw std::invalid_argument("make_synthetic_dataset: count must be positive");
  std::vector<SyntheticShape> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(build_synthetic(draw_params(family, mix_seed(seed, family, i)), options));
  return out;
}

}  // namespace sculptor::geometry
