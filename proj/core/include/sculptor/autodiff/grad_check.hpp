#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "sculptor/autodiff/tensor.hpp"

namespace sculptor::ad {

struct GradCheckOptions {
  double step = 1e-4;
  /// 0 checks every coordinate; otherwise a seeded random subset per leaf.
  std::size_t max_coords_per_leaf = 0;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
  /// "leaf[i](r, c)" of the worst coordinate, for diagnostics.
  std::string worst;
};

/// Compares backward() against central differences of f over the given leaves.
/// Error per coordinate is |analytic - numeric| / max(1, |numeric|).
/// f must be deterministic in the leaf values. Throws NumericError on non-finite values.
GradCheckResult grad_check(const std::function<DiffValue()>& f, std::span<const DiffValue> leaves,
                           const GradCheckOptions& options = {});

}  // namespace sculptor::ad
