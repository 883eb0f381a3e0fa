#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "sculptor/autodiff/tensor.hpp"
#include "sculptor/geometry/sampling.hpp"
#include "sculptor/model/model.hpp"
#include "sculptor/trainer/domain.hpp"

namespace sculptor::trainer {

/// Labeled points of one source shape.
struct LabeledBank {
  std::vector<geometry::Vec3> points;
  Eigen::VectorXd labels;

  std::size_t size() const { return points.size(); }
};

LabeledBank make_bank(const LabeledShape& shape, const geometry::SamplingOptions& sampling, std::size_t count,
                      std::uint64_t seed);

/// Points of `bank` at the given indices.
LabeledBank subset(const LabeledBank& bank, std::span<const std::size_t> indices);

/// `count` distinct indices in [0, n), drawn with rng.
std::vector<std::size_t> draw_indices(std::size_t n, std::size_t count, std::mt19937_64& rng);

/// Query points of several shapes, each with the raster it is seen through.
struct PointGroup {
  const raster::RasterInput* raster = nullptr;
  std::vector<geometry::Vec3> points;
};

/// Per active level, the pixel-aligned features of all groups stacked in order.
/// Rasters shared by several groups (same pointer) are encoded once.
std::vector<ad::DiffValue> group_features(const model::OccupancyModel& model, std::span<const PointGroup> groups);

/// Graph-free per-level decoder outputs for each row of group_features: n x levels.
ad::Matrix group_predictions(const model::OccupancyModel& model, std::span<const PointGroup> groups);

}  // namespace sculptor::trainer
