#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sculptor/geometry/mesh.hpp"

namespace sculptor::geometry {

enum class Family { source, target };

std::string to_string(Family family);
Family family_from_string(const std::string& name);

/// Construction parameters in generator units (y up, feet/base resting on y = 0,
/// symmetric about x = 0 and z = 0), before normalization.
struct SyntheticParams {
  Family family = Family::source;
  /// Torso ellipsoid semi-axes and centre height.
  Vec3 torso_axes = Vec3::Zero();
  double torso_center_y = 0.0;
  /// Biped: two vertical cylinders from y = 0 up to torso_center_y.
  double leg_radius = 0.0;
  double leg_offset_x = 0.0;
  /// Pedestal: box with half-extents (x, z) spanning y in [0, height].
  double base_half_x = 0.0;
  double base_half_z = 0.0;
  double base_height = 0.0;
};

struct SyntheticShape {
  TriMesh mesh;  ///< normalized into the unit box
  SyntheticParams params;
  Similarity to_unit;  ///< generator units -> normalized units
};

struct SyntheticOptions {
  /// Marching-cubes cells along the longest side of the solid.
  int mesh_resolution = 64;
};

/// Signed distance (negative inside) of the constructive solid described by params.
double synthetic_sdf(const SyntheticParams& params, const Vec3& p);

SyntheticParams draw_params(Family family, std::uint64_t seed);
SyntheticShape build_synthetic(const SyntheticParams& params, const SyntheticOptions& options = {});

/// Source family: torso ellipsoid on two leg cylinders. Target family: the same
/// torso resting on a single rectangular pedestal. Shape i uses a seed derived
/// from (seed, family, i), so datasets are reproducible item by item.
std::vector<SyntheticShape> make_synthetic_dataset(Family family, std::size_t count, std::uint64_t seed,
                                                   const SyntheticOptions& options = {});

}  // namespace sculptor::geometry
