#include "sculptor/autodiff/optimizer.hpp"

namespace sculptor::ad {

RmsProp::RmsProp(std::vector<DiffValue> params, RmsPropOptions options)
    : params_(std::move(params)), options_(options) {
  square_avg_.reserve(params_.size());
  for (const auto& p : params_) square_avg_.push_back(Matrix::Zero(p.rows(), p.cols()));
}

void RmsProp::step() {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const Matrix& g = params_[i].grad();
    Matrix& v = square_avg_[i];
    v = options_.decay * v + (1.0 - options_.decay) * g.cwiseProduct(g);
    params_[i].mutable_value().array() -=
        options_.learning_rate * g.array() / (v.array().sqrt() + options_.epsilon);
  }
}

void RmsProp::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

}  // namespace sculptor::ad
