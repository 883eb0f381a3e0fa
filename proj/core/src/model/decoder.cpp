#include "sculptor/model/decoder.hpp"

#include <string>

#include "sculptor/error.hpp"
#include "sculptor/model/encoder.hpp"

namespace sculptor::model {

Decoder::Decoder(ad::ParameterSet& params, int in_features, const std::vector<int>& widths, double leaky_slope,
                 std::mt19937_64& rng)
    : in_features_(in_features), slope_(leaky_slope) {
  std::vector<int> sizes{in_features};
  sizes.insert(sizes.end(), widths.begin(), widths.end());
  sizes.push_back(1);
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    if (sizes[i] < 1) throw ShapeError("decoder layer widths must be positive");
    const std::string prefix = "decoder.fc" + std::to_string(i);
    weights_.push_back(params.add(prefix + ".weight", kaiming_normal(sizes[i], sizes[i + 1], rng)));
    biases_.push_back(params.add(prefix + ".bias", ad::Matrix::Zero(1, sizes[i + 1])));
  }
}

ad::DiffValue Decoder::logits(const ad::DiffValue& features) const {
  if (features.cols() != in_features_) {
    throw ShapeError("decoder expects " + std::to_string(in_features_) + " features, got " + features.shape());
  }
  ad::DiffValue h = features;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    h = ad::affine(h, weights_[i], biases_[i]);
    if (i + 1 < weights_.size()) h = ad::leaky_relu(h, slope_);
  }
  return h;
}

ad::DiffValue Decoder::operator()(const ad::DiffValue& features) const { return ad::sigmoid(logits(features)); }

std::vector<ad::DiffValue> Decoder::parameters() const {
  std::vector<ad::DiffValue> out;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    out.push_back(weights_[i]);
    out.push_back(biases_[i]);
  }
  return out;
}

void Decoder::zero() {
  for (auto& w : weights_) w.mutable_value().setZero();
  for (auto& b : biases_) b.mutable_value().setZero();
}

}  // namespace sculptor::model
