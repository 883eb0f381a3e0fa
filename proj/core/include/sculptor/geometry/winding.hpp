#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sculptor/geometry/mesh.hpp"

namespace sculptor::geometry {

/// Generalized winding number of a triangle soup, evaluated as the sum of signed
/// solid angles over all faces divided by 4*pi. Close to 1 inside a closed
/// outward-oriented surface, 0 outside, and degrades gracefully across small cracks.
class WindingNumber {
 public:
  explicit WindingNumber(const TriMesh& mesh);

  double operator()(const Vec3& p) const;
  /// Inside test: winding number >= 0.5.
  std::uint8_t occupancy(const Vec3& p) const { return (*this)(p) >= 0.5 ? 1 : 0; }
  std::vector<std::uint8_t> occupancy(std::span<const Vec3> points) const;

 private:
  // Structure-of-arrays corner coordinates, one entry per face.
  std::vector<double> ax_, ay_, az_, bx_, by_, bz_, cx_, cy_, cz_;
};

/// While alive, any winding-number or occupancy query on this thread throws
/// UnsupervisedContractError. The adaptation loop runs inside one so that no
/// code path can derive occupancy labels once adaptation has started.
class LabelingForbiddenScope {
 public:
  LabelingForbiddenScope();
  ~LabelingForbiddenScope();
  LabelingForbiddenScope(const LabelingForbiddenScope&) = delete;
  LabelingForbiddenScope& operator=(const LabelingForbiddenScope&) = delete;
};

bool labeling_forbidden();

double winding_number(const TriMesh& mesh, const Vec3& p);
/// 1 iff the generalized winding number at p is >= 0.5.
std::uint8_t occupancy(const TriMesh& mesh, const Vec3& p);

}  // namespace sculptor::geometry
