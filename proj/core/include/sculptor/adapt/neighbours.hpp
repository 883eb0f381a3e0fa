#pragma once

#include <Eigen/Core>

#include <vector>

#include "sculptor/autodiff/tensor.hpp"

namespace sculptor::adapt {

/// Depth scale applied to the last feature component before neighbour search.
inline constexpr double kDefaultDepthScale = 256.0;

/// Copy of the feature rows with the last column (the depth) multiplied by lambda.
/// Used only for distances; decoder inputs are never reweighted.
ad::Matrix reweight(const ad::Matrix& features, double lambda);

struct NeighbourResult {
  /// Row-major n_target x K source indices, nearest first; equal distances
  /// are ordered by source index.
  std::vector<int> indices;
  int k = 0;
  /// Mean label of each target row's K neighbours.
  Eigen::VectorXd aggregate;
};

/// Exhaustive Euclidean K-nearest-neighbour search over reweighted features,
/// restricted to the labeled source rows. Throws std::invalid_argument when
/// K < 1 or K exceeds the number of source rows, ShapeError on width mismatch.
NeighbourResult aggregate_neighbours(const ad::Matrix& target, const ad::Matrix& source,
                                     const Eigen::VectorXd& source_labels, int k, double lambda);

}  // namespace sculptor::adapt
