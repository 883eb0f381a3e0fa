#pragma once

#include <string>
#include <vector>

#include "sculptor/autodiff/tensor.hpp"

namespace sculptor::ad {

struct Parameter {
  std::string name;
  DiffValue value;
};

/// Ordered registry of trainable leaves; names are unique and stable so that
/// checkpoints can be matched by name.
class ParameterSet {
 public:
  DiffValue add(std::string name, Matrix initial);

  const std::vector<Parameter>& items() const { return items_; }
  std::vector<Parameter>& items() { return items_; }
  std::size_t size() const { return items_.size(); }
  std::size_t scalar_count() const;

  /// Throws if no parameter carries this name.
  const Parameter& at(const std::string& name) const;
  bool contains(const std::string& name) const;

  void zero_grad();
  std::vector<DiffValue> values() const;

 private:
  std::vector<Parameter> items_;
};

}  // namespace sculptor::ad
