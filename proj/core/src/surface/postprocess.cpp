#include "sculptor/surface/postprocess.hpp"

#include <algorithm>

#include "sculptor/error.hpp"

namespace sculptor::surface {

geometry::TriMesh postprocess(const geometry::TriMesh& mesh, double min_fraction) {
  if (mesh.empty()) throw ShapeError("postprocess: empty mesh");
  int count = 0;
  const std::vector<int> component = geometry::face_components(mesh, &count);
  std::vector<std::size_t> sizes(static_cast<std::size_t>(count), 0);
  for (int c : component) ++sizes[static_cast<std::size_t>(c)];
  const std::size_t largest = *std::max_element(sizes.begin(), sizes.end());
  std::vector<int> keep;
  keep.reserve(component.size());
  for (std::size_t f = 0; f < component.size(); ++f) {
    if (static_cast<double>(sizes[static_cast<std::size_t>(component[f])]) >= min_fraction * largest) {
      keep.push_back(static_cast<int>(f));
    }
  }
  return geometry::normalized(geometry::submesh(mesh, keep));
}

}  // namespace sculptor::surface
