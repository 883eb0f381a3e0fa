#pragma once

#include <random>
#include <vector>

#include "sculptor/autodiff/parameter.hpp"

namespace sculptor::model {

/// MLP shared by all levels: in -> widths... -> 1, leaky rectifier on hidden
/// layers, sigmoid on the output. Rows are independent query points.
class Decoder {
 public:
  Decoder(ad::ParameterSet& params, int in_features, const std::vector<int>& widths, double leaky_slope,
          std::mt19937_64& rng);

  /// n x in_features -> n x 1 probabilities.
  ad::DiffValue operator()(const ad::DiffValue& features) const;
  ad::DiffValue logits(const ad::DiffValue& features) const;

  std::vector<ad::DiffValue> parameters() const;
  int in_features() const { return in_features_; }
  /// Sets every weight and bias to zero, so the output is 0.5 everywhere.
  void zero();

 private:
  int in_features_;
  double slope_;
  std::vector<ad::DiffValue> weights_;
  std::vector<ad::DiffValue> biases_;
};

}  // namespace sculptor::model
