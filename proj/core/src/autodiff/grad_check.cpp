#include "sculptor/autodiff/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "sculptor/error.hpp"

namespace sculptor::ad {

namespace {

double evaluate(const std::function<DiffValue()>& f) {
  NoGradGuard guard;
  const double v = f().item();
  if (!std::isfinite(v)) throw NumericError("grad_check: function value is not finite");
  return v;
}

}  // namespace

GradCheckResult grad_check(const std::function<DiffValue()>& f, std::span<const DiffValue> leaves,
                           const GradCheckOptions& options) {
  std::vector<DiffValue> handles(leaves.begin(), leaves.end());
  for (auto& leaf : handles) leaf.zero_grad();
  const DiffValue root = f();
  if (!std::isfinite(root.item())) throw NumericError("grad_check: function value is not finite");
  backward(root);

  std::vector<Matrix> analytic;
  analytic.reserve(handles.size());
  for (const auto& leaf : handles) {
    analytic.push_back(leaf.grad());
    if (!analytic.back().allFinite()) throw NumericError("grad_check: analytic gradient is not finite");
  }

  std::mt19937_64 rng(options.seed);
  GradCheckResult result;
  for (std::size_t li = 0; li < handles.size(); ++li) {
    Matrix& value = handles[li].mutable_value();
    std::vector<Eigen::Index> coords(static_cast<std::size_t>(value.size()));
    std::iota(coords.begin(), coords.end(), 0);
    if (options.max_coords_per_leaf > 0 && coords.size() > options.max_coords_per_leaf) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.max_coords_per_leaf);
      std::sort(coords.begin(), coords.end());
    }
    for (Eigen::Index k : coords) {
      double& x = value.data()[k];
      const double saved = x;
      x = saved + options.step;
      const double plus = evaluate(f);
      x = saved - options.step;
      const double minus = evaluate(f);
      x = saved;
      const double numeric = (plus - minus) / (2.0 * options.step);
      const double a = analytic[li].data()[k];
      const double err = std::abs(a - numeric) / std::max(1.0, std::abs(numeric));
      ++result.coordinates;
      if (err > result.max_relative_error || result.worst.empty()) {
        if (err >= result.max_relative_error) {
          std::ostringstream where;
          where << "leaf[" << li << "](" << k / value.cols() << ", " << k % value.cols() << ") analytic=" << a
                << " numeric=" << numeric;
          result.worst = where.str();
        }
        result.max_relative_error = std::max(result.max_relative_error, err);
      }
    }
  }
  return result;
}

}  // namespace sculptor::ad
