#include "sculptor/adapt/pseudo_labels.hpp"

#include <algorithm>
#include <string>

#include "sculptor/error.hpp"

namespace sculptor::adapt {

double RampSchedule::operator()(int epoch) const {
  return std::clamp(static_cast<double>(epoch - start_epoch) / epoch_total, 0.0, 1.0);
}

void update_pseudo_labels(PseudoLabelState& state, const ad::Matrix& predictions, const ad::Matrix& aggregates,
                          int epoch, const RampSchedule& schedule) {
  if (predictions.rows() != aggregates.rows() || predictions.cols() != aggregates.cols()) {
    throw ShapeError("update_pseudo_labels: predictions " + std::to_string(predictions.rows()) + "x" +
                     std::to_string(predictions.cols()) + " vs aggregates " + std::to_string(aggregates.rows()) +
                     "x" + std::to_string(aggregates.cols()));
  }
  const double m = schedule(epoch);
  state.labels = (m * predictions + (1.0 - m) * aggregates).cwiseMax(0.0).cwiseMin(1.0);
  state.epoch = epoch;
  state.momentum = m;
}

}  // namespace sculptor::adapt
