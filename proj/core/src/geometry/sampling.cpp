#include "sculptor/geometry/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sculptor/error.hpp"

namespace sculptor::geometry {

SurfaceSampler::SurfaceSampler(const TriMesh& mesh) : mesh_(&mesh) {
  if (mesh.faces.empty()) throw ShapeError("SurfaceSampler: empty mesh");
  cdf_.reserve(mesh.faces.size());
  double acc = 0.0;
  for (const Face& f : mesh.faces) {
    acc += triangle_area(mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]);
    cdf_.push_back(acc);
  }
  if (!(acc > 0.0)) throw ShapeError("SurfaceSampler: mesh has zero area");
}

Vec3 SurfaceSampler::operator()(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double target = uni(rng) * cdf_.back();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
  const std::size_t fi = std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  const Face& f = mesh_->faces[fi];
  double r1 = uni(rng);
  double r2 = uni(rng);
  if (r1 + r2 > 1.0) {
    r1 = 1.0 - r1;
    r2 = 1.0 - r2;
  }
  const Vec3& a = mesh_->vertices[f[0]];
  const Vec3& b = mesh_->vertices[f[1]];
  const Vec3& c = mesh_->vertices[f[2]];
  return a + r1 * (b - a) + r2 * (c - a);
}

std::vector<Vec3> sample_surface(const TriMesh& mesh, std::size_t count, std::uint64_t seed) {
  SurfaceSampler sampler(mesh);
  std::mt19937_64 rng(seed);
  std::vector<Vec3> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sampler(rng));
  return out;
}

std::vector<QueryPoint> sample_points(const TriMesh& mesh, const SamplingOptions& options, std::uint64_t seed) {
  if (options.count == 0) throw std::invalid_argument("sample_points: count must be positive");
  if (!(options.uniform_ratio >= 0.0 && options.uniform_ratio <= 1.0)) {
    throw std::invalid_argument("sample_points: uniform_ratio must lie in [0, 1]");
  }
  const auto uniform_count = std::min(
      options.count, static_cast<std::size_t>(std::ceil(static_cast<double>(options.count) * options.uniform_ratio)));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(-0.5, 0.5);
  std::normal_distribution<double> noise(0.0, options.surface_sigma);

  std::vector<QueryPoint> out;
  out.reserve(options.count);
  for (std::size_t i = 0; i < uniform_count; ++i) {
    const double x = box(rng);
    const double y = box(rng);
    const double z = box(rng);
    out.push_back({Vec3(x, y, z)});
  }
  if (uniform_count < options.count) {
    SurfaceSampler surface(mesh);
    while (out.size() < options.count) {
      const Vec3 s = surface(rng);
      const double dx = noise(rng);
      const double dy = noise(rng);
      const double dz = noise(rng);
      const Vec3 p = s + Vec3(dx, dy, dz);
      if ((p.array().abs() <= 0.5).all()) out.push_back({p});
    }
  }
  return out;
}

std::vector<LabeledPoint> label_points(const WindingNumber& oracle, std::span<const QueryPoint> points) {
  std::vector<LabeledPoint> out;
  out.reserve(points.size());
  for (const QueryPoint& q : points) out.push_back({q.p, oracle.occupancy(q.p)});
  return out;
}

std::vector<LabeledPoint> sample_labeled_points(const TriMesh& mesh, const SamplingOptions& options,
                                                std::uint64_t seed) {
  const auto points = sample_points(mesh, options, seed);
  return label_points(WindingNumber(mesh), points);
}

}  // namespace sculptor::geometry
