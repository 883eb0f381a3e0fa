#pragma once

#include <vector>

#include "sculptor/autodiff/parameter.hpp"

namespace sculptor::ad {

struct RmsPropOptions {
  double learning_rate = 1e-3;
  double decay = 0.99;
  double epsilon = 1e-8;
};

/// Momentum-free RMSProp: v <- decay*v + (1-decay)*g^2; w <- w - lr*g/(sqrt(v)+eps).
class RmsProp {
 public:
  RmsProp(std::vector<DiffValue> params, RmsPropOptions options = {});

  void step();
  void zero_grad();
  const RmsPropOptions& options() const { return options_; }

 private:
  std::vector<DiffValue> params_;
  std::vector<Matrix> square_avg_;
  RmsPropOptions options_;
};

}  // namespace sculptor::ad
