#include "sculptor/model/encoder.hpp"

#include <cmath>

#include "sculptor/error.hpp"

namespace sculptor::model {

ad::Matrix kaiming_normal(int fan_in, int fan_out, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / fan_in));
  ad::Matrix w(fan_in, fan_out);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = normal(rng);
  return w;
}

ad::Matrix input_map(const raster::RasterInput& input) {
  const std::size_t n = static_cast<std::size_t>(input.resolution) * input.resolution;
  if (input.mask.size() != n || input.depth.size() != n) throw ShapeError("raster buffers do not match resolution");
  ad::Matrix map(static_cast<Eigen::Index>(n), 2);
  for (std::size_t i = 0; i < n; ++i) {
    map(static_cast<Eigen::Index>(i), 0) = input.mask[i];
    map(static_cast<Eigen::Index>(i), 1) = input.depth[i];
  }
  return map;
}

Encoder::Encoder(ad::ParameterSet& params, int channels, int levels, double leaky_slope, std::mt19937_64& rng)
    : channels_(channels), slope_(leaky_slope) {
  if (channels < 1 || levels < 1) throw ShapeError("encoder needs at least one channel and one level");
  for (int l = 0; l < levels; ++l) {
    const int in = l == 0 ? 2 : channels;
    const std::string prefix = "encoder.stage" + std::to_string(l + 1);
    weights_.push_back(params.add(prefix + ".weight", kaiming_normal(9 * in, channels, rng)));
    biases_.push_back(params.add(prefix + ".bias", ad::Matrix::Zero(1, channels)));
  }
}

FeatureStack Encoder::encode(const raster::RasterInput& input) const {
  const int r = input.resolution;
  if (r % 2 != 0) throw ShapeError("encoder input resolution must be even");
  FeatureStack stack;
  stack.height = r / 2;
  stack.width = r / 2;
  stack.channels = channels_;
  ad::DiffValue x = ad::DiffValue::constant(input_map(input));
  x = ad::leaky_relu(ad::conv3x3(x, weights_[0], biases_[0], r, r), slope_);
  x = ad::avg_pool2(x, r, r);
  stack.levels.push_back(x);
  for (std::size_t l = 1; l < weights_.size(); ++l) {
    x = ad::leaky_relu(ad::conv3x3(x, weights_[l], biases_[l], stack.height, stack.width), slope_);
    stack.levels.push_back(x);
  }
  return stack;
}

std::vector<ad::DiffValue> Encoder::parameters() const {
  std::vector<ad::DiffValue> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(weights_[l]);
    out.push_back(biases_[l]);
  }
  return out;
}

}  // namespace sculptor::model
