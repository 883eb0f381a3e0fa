#include "sculptor/autodiff/parameter.hpp"

#include <algorithm>

#include "sculptor/error.hpp"

namespace sculptor::ad {

DiffValue ParameterSet::add(std::string name, Matrix initial) {
  if (contains(name)) throw Error("ParameterSet: duplicate parameter name '" + name + "'");
  DiffValue v = DiffValue::variable(std::move(initial));
  items_.push_back({std::move(name), v});
  return v;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : items_) n += static_cast<std::size_t>(p.value.value().size());
  return n;
}

const Parameter& ParameterSet::at(const std::string& name) const {
  auto it = std::find_if(items_.begin(), items_.end(), [&](const Parameter& p) { return p.name == name; });
  if (it == items_.end()) throw Error("ParameterSet: no parameter named '" + name + "'");
  return *it;
}

bool ParameterSet::contains(const std::string& name) const {
  return std::any_of(items_.begin(), items_.end(), [&](const Parameter& p) { return p.name == name; });
}

void ParameterSet::zero_grad() {
  for (auto& p : items_) p.value.zero_grad();
}

std::vector<DiffValue> ParameterSet::values() const {
  std::vector<DiffValue> out;
  out.reserve(items_.size());
  for (const auto& p : items_) out.push_back(p.value);
  return out;
}

}  // namespace sculptor::ad
