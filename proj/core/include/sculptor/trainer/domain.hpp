#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sculptor/geometry/mesh.hpp"
#include "sculptor/geometry/sampling.hpp"
#include "sculptor/raster/raster.hpp"

namespace sculptor::trainer {

/// A source-domain training shape: its raster plus access to labeled samples.
class LabeledShape {
 public:
  LabeledShape(std::string name, geometry::TriMesh mesh, int resolution);

  const std::string& name() const { return name_; }
  const raster::RasterInput& raster() const { return raster_; }
  const geometry::TriMesh& mesh() const { return mesh_; }
  std::vector<geometry::LabeledPoint> sample_labeled(const geometry::SamplingOptions& options,
                                                     std::uint64_t seed) const;

 private:
  std::string name_;
  geometry::TriMesh mesh_;
  raster::RasterInput raster_;
};

/// A target-domain training shape. The geometry is kept private and is only
/// used to place query points near the surface; the interface offers the raster
/// and unlabeled QueryPoints, never occupancy.
class UnlabeledShape {
 public:
  UnlabeledShape(std::string name, geometry::TriMesh mesh, int resolution);

  const std::string& name() const { return name_; }
  const raster::RasterInput& raster() const { return raster_; }
  std::vector<geometry::QueryPoint> sample_queries(const geometry::SamplingOptions& options,
                                                   std::uint64_t seed) const;

 private:
  std::string name_;
  geometry::TriMesh mesh_;
  raster::RasterInput raster_;
};

/// A held-out evaluation shape: input raster plus ground-truth surface for metrics.
struct EvalShape {
  std::string name;
  geometry::TriMesh mesh;
  raster::RasterInput raster;
};

}  // namespace sculptor::trainer
