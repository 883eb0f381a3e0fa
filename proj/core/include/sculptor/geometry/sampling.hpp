#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "sculptor/geometry/mesh.hpp"
#include "sculptor/geometry/winding.hpp"

namespace sculptor::geometry {

/// A query position with no occupancy label. Target-domain points only ever
/// exist in this form.
struct QueryPoint {
  Vec3 p;
};

/// A source-domain query position with its inside/outside label.
struct LabeledPoint {
  Vec3 p;
  std::uint8_t label = 0;
};

struct SamplingOptions {
  std::size_t count = 512;
  /// Std of the isotropic Gaussian jitter applied to surface samples.
  double surface_sigma = 0.05;
  /// Fraction (rounded up) of points drawn uniformly in the unit box.
  double uniform_ratio = 1.0 / 16.0;
};

/// Area-weighted uniform sampling of a mesh surface.
class SurfaceSampler {
 public:
  explicit SurfaceSampler(const TriMesh& mesh);
  Vec3 operator()(std::mt19937_64& rng) const;

 private:
  const TriMesh* mesh_;
  std::vector<double> cdf_;
};

std::vector<Vec3> sample_surface(const TriMesh& mesh, std::size_t count, std::uint64_t seed);

/// Near-surface plus uniform query points inside [-0.5, 0.5]^3. Jittered points
/// that leave the box are redrawn. Throws std::invalid_argument when count == 0
/// or uniform_ratio is outside [0, 1].
std::vector<QueryPoint> sample_points(const TriMesh& mesh, const SamplingOptions& options, std::uint64_t seed);

std::vector<LabeledPoint> label_points(const WindingNumber& oracle, std::span<const QueryPoint> points);

/// sample_points followed by label_points against the same mesh.
std::vector<LabeledPoint> sample_labeled_points(const TriMesh& mesh, const SamplingOptions& options,
                                                std::uint64_t seed);

}  // namespace sculptor::geometry
