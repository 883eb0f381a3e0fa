#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sculptor/geometry/mesh.hpp"

namespace sculptor::metrics {

using geometry::TriMesh;
using geometry::Vec3;

struct MetricOptions {
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
};

/// Distance charged for a reconstruction that produced no surface at all.
inline constexpr double kFailurePenalty = 1.0;

/// Mean unsquared distance from each point to the nearest triangle of ref.
/// Throws ShapeError on empty inputs.
double point_to_surface(std::span<const Vec3> points, const TriMesh& ref);
/// Samples the reconstruction surface (area-weighted) and measures it against ref.
/// Throws std::invalid_argument when fewer than 1000 samples are requested.
double point_to_surface(const TriMesh& reconstruction, const TriMesh& ref, const MetricOptions& options = {});

/// mean_a min_b |a - b| + mean_b min_a |a - b| (unsquared).
double chamfer_points(std::span<const Vec3> a, std::span<const Vec3> b);
/// chamfer_points over area-weighted samples of both meshes drawn with the same seed,
/// so the value is symmetric in (a, b).
double chamfer(const TriMesh& a, const TriMesh& b, const MetricOptions& options = {});

struct MeshScore {
  std::string name;
  double p2s = 0.0;
  double cd = 0.0;
  /// Empty or non-watertight reconstruction after component filtering.
  bool failed = false;
  bool empty = false;
};

/// Scores one reconstruction; an empty mesh is flagged and charged kFailurePenalty.
MeshScore score_mesh(const std::string& name, const TriMesh& reconstruction, const TriMesh& ground_truth,
                     const MetricOptions& options = {});

struct EvalReport {
  std::string method;
  std::vector<MeshScore> meshes;
  double p2s = 0.0;  ///< mean over meshes
  double cd = 0.0;
  std::size_t failures = 0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::string distance = "unsquared";
};

EvalReport summarize(std::string method, std::vector<MeshScore> meshes, const MetricOptions& options);

/// Plain-text table: one row per method with mean P2S, CD and failure count.
void write_table(std::ostream& out, std::span<const EvalReport> reports);
/// CSV with one row per (method, mesh) plus a "mean" row per method.
void write_csv(std::ostream& out, std::span<const EvalReport> reports);

}  // namespace sculptor::metrics
