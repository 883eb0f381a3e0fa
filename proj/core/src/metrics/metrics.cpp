#include "sculptor/metrics/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <numeric>
#include <stdexcept>

#include "sculptor/error.hpp"
#include "sculptor/geometry/sampling.hpp"
#include "sculptor/metrics/spatial_index.hpp"

namespace sculptor::metrics {

namespace {

constexpr std::size_t kMinSamples = 1000;

void check_samples(const MetricOptions& options) {
  if (options.samples < kMinSamples) {
    throw std::invalid_argument("surface metrics need at least 1000 samples, got " + std::to_string(options.samples));
  }
}

double mean_nearest(std::span<const Vec3> queries, const PointKdTree& tree) {
  double acc = 0.0;
  for (const Vec3& q : queries) acc += std::sqrt(tree.nearest_sqdist(q));
  return acc / static_cast<double>(queries.size());
}

}  // namespace

double point_to_surface(std::span<const Vec3> points, const TriMesh& ref) {
  if (points.empty() || ref.empty()) throw ShapeError("point_to_surface: empty input");
  const TriangleBvh bvh(ref);
  double acc = 0.0;
  for (const Vec3& p : points) acc += std::sqrt(bvh.nearest_sqdist(p));
  return acc / static_cast<double>(points.size());
}

double point_to_surface(const TriMesh& reconstruction, const TriMesh& ref, const MetricOptions& options) {
  check_samples(options);
  if (reconstruction.empty() || ref.empty()) throw ShapeError("point_to_surface: empty mesh");
  const std::vector<Vec3> samples = geometry::sample_surface(reconstruction, options.samples, options.seed);
  return point_to_surface(samples, ref);
}

double chamfer_points(std::span<const Vec3> a, std::span<const Vec3> b) {
  if (a.empty() || b.empty()) throw ShapeError("chamfer: empty point set");
  const PointKdTree ta(std::vector<Vec3>(a.begin(), a.end()));
  const PointKdTree tb(std::vector<Vec3>(b.begin(), b.end()));
  return mean_nearest(a, tb) + mean_nearest(b, ta);
}

double chamfer(const TriMesh& a, const TriMesh& b, const MetricOptions& options) {
  check_samples(options);
  if (a.empty() || b.empty()) throw ShapeError("chamfer: empty mesh");
  const std::vector<Vec3> sa = geometry::sample_surface(a, options.samples, options.seed);
  const std::vector<Vec3> sb = geometry::sample_surface(b, options.samples, options.seed);
  return chamfer_points(sa, sb);
}

MeshScore score_mesh(const std::string& name, const TriMesh& reconstruction, const TriMesh& ground_truth,
                     const MetricOptions& options) {
  MeshScore s;
  s.name = name;
  if (reconstruction.empty()) {
    s.failed = true;
    s.empty = true;
    s.p2s = kFailurePenalty;
    s.cd = kFailurePenalty;
    return s;
  }
  s.failed = !geometry::is_watertight(reconstruction);
  s.p2s = point_to_surface(reconstruction, ground_truth, options);
  s.cd = chamfer(reconstruction, ground_truth, options);
  return s;
}

EvalReport summarize(std::string method, std::vector<MeshScore> meshes, const MetricOptions& options) {
  EvalReport r;
  r.method = std::move(method);
  r.meshes = std::move(meshes);
  r.samples = options.samples;
  r.seed = options.seed;
  for (const MeshScore& m : r.meshes) {
    r.p2s += m.p2s;
    r.cd += m.cd;
    if (m.failed) ++r.failures;
  }
  if (!r.meshes.empty()) {
    r.p2s /= static_cast<double>(r.meshes.size());
    r.cd /= static_cast<double>(r.meshes.size());
  }
  return r;
}

void write_table(std::ostream& out, std::span<const EvalReport> reports) {
  std::size_t width = 6;
  for (const auto& r : reports) width = std::max(width, r.method.size());
  const auto flags = out.flags();
  out << std::left << std::setw(static_cast<int>(width)) << "method" << "  " << std::right << std::setw(10) << "P2S"
      << std::setw(10) << "CD" << std::setw(10) << "failed" << '\n';
  out << std::fixed << std::setprecision(5);
  for (const auto& r : reports) {
    out << std::left << std::setw(static_cast<int>(width)) << r.method << "  " << std::right << std::setw(10) << r.p2s
        << std::setw(10) << r.cd << std::setw(10) << r.failures << '\n';
  }
  out.flags(flags);
}

void write_csv(std::ostream& out, std::span<const EvalReport> reports) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << "method,mesh,p2s,cd,failed,samples,seed,distance\n";
  out << std::setprecision(10);
  for (const auto& r : reports) {
    for (const auto& m : r.meshes) {
      out << r.method << ',' << m.name << ',' << m.p2s << ',' << m.cd << ',' << (m.failed ? 1 : 0) << ','
          << r.samples << ',' << r.seed << ',' << r.distance << '\n';
    }
    out << r.method << ",mean," << r.p2s << ',' << r.cd << ',' << r.failures << ',' << r.samples << ',' << r.seed
        << ',' << r.distance << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace sculptor::metrics
