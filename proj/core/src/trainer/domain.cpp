#include "sculptor/trainer/domain.hpp"

namespace sculptor::trainer {

LabeledShape::LabeledShape(std::string name, geometry::TriMesh mesh, int resolution)
    : name_(std::move(name)), mesh_(std::move(mesh)), raster_(raster::rasterize(mesh_, resolution)) {}

std::vector<geometry::LabeledPoint> LabeledShape::sample_labeled(const geometry::SamplingOptions& options,
                                                                 std::uint64_t seed) const {
  return geometry::sample_labeled_points(mesh_, options, seed);
}

UnlabeledShape::UnlabeledShape(std::string name, geometry::TriMesh mesh, int resolution)
    : name_(std::move(name)), mesh_(std::move(mesh)), raster_(raster::rasterize(mesh_, resolution)) {}

std::vector<geometry::QueryPoint> UnlabeledShape::sample_queries(const geometry::SamplingOptions& options,
                                                                 std::uint64_t seed) const {
  return geometry::sample_points(mesh_, options, seed);
}

}  // namespace sculptor::trainer
