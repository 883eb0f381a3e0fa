#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sculptor/autodiff/parameter.hpp"
#include "sculptor/raster/raster.hpp"

namespace sculptor::model {

/// Per-level 2D feature grids; level l is a (height*width) x channels map with
/// pixel (u, v) stored at row v*width + u.
struct FeatureStack {
  std::vector<ad::DiffValue> levels;
  int height = 0;
  int width = 0;
  int channels = 0;
};

/// Stage 1: 3x3 conv (2 -> C), leaky rectifier, 2x2 average pool.
/// Stages 2..L: 3x3 conv (C -> C), leaky rectifier, same resolution.
/// Each stage's output is one level of the stack.
class Encoder {
 public:
  Encoder(ad::ParameterSet& params, int channels, int levels, double leaky_slope, std::mt19937_64& rng);

  FeatureStack encode(const raster::RasterInput& input) const;
  std::vector<ad::DiffValue> parameters() const;
  int channels() const { return channels_; }
  int levels() const { return static_cast<int>(weights_.size()); }

 private:
  int channels_;
  double slope_;
  std::vector<ad::DiffValue> weights_;
  std::vector<ad::DiffValue> biases_;
};

/// (R*R) x 2 input map: column 0 is the mask, column 1 the depth.
ad::Matrix input_map(const raster::RasterInput& input);

/// Kaiming fan-in normal initialisation: N(0, 2 / fan_in).
ad::Matrix kaiming_normal(int fan_in, int fan_out, std::mt19937_64& rng);

}  // namespace sculptor::model
