#pragma once

#include "sculptor/autodiff/tensor.hpp"

namespace sculptor::adapt {

/// Linear warm-up clamp((epoch - start) / total, 0, 1) shared by the momentum
/// and the target/diversity loss weights.
struct RampSchedule {
  int start_epoch = 30;
  int epoch_total = 60;

  double operator()(int epoch) const;
};

/// Pseudo-labels for a pool of target points, one column per level.
struct PseudoLabelState {
  ad::Matrix labels;  ///< n x L, values in [0, 1]
  int epoch = -1;
  double momentum = 0.0;

  bool covers(Eigen::Index points, Eigen::Index levels) const {
    return labels.rows() == points && labels.cols() == levels;
  }
};

/// Sets labels <- m * predictions + (1 - m) * aggregates with m = schedule(epoch).
/// Inputs are plain values, so no gradient reaches the pseudo-labels.
/// Throws ShapeError when predictions and aggregates are not aligned.
void update_pseudo_labels(PseudoLabelState& state, const ad::Matrix& predictions, const ad::Matrix& aggregates,
                          int epoch, const RampSchedule& schedule = {});

}  // namespace sculptor::adapt
