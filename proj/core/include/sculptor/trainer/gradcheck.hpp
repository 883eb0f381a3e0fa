#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sculptor/model/model.hpp"

namespace sculptor::trainer {

struct LossGradCheckOptions {
  std::size_t points = 16;  ///< per domain
  /// Random coordinates checked per parameter tensor (0 = all).
  std::size_t coords_per_leaf = 6;
  /// Small enough that perturbations rarely carry a hidden rectifier input across
  /// its kink, where central differences stop approximating the derivative.
  double step = 1e-7;
  /// Epoch used for the loss weights; past the warm-up so every term is active.
  int epoch = 60;
  model::ModelConfig model{16, 4, {128, 64}, 32, 0.01, false};
};

struct LossGradCheck {
  std::string term;  ///< sim, source, target, mi or total
  std::uint64_t seed = 0;
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
  std::string worst;
};

/// Biases are drawn at random rather than zero so that no rectifier input sits
/// exactly on its kink. Builds a random source/target batch from one generated shape per family and
/// compares analytic and central-difference gradients of every loss term with
/// respect to all model parameters. Median bandwidths are evaluated once at the
/// unperturbed weights and held fixed during the differences.
std::vector<LossGradCheck> check_loss_gradients(std::uint64_t seed, const LossGradCheckOptions& options = {});

}  // namespace sculptor::trainer
