#include "sculptor/trainer/batch.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

#include "sculptor/error.hpp"

namespace sculptor::trainer {

LabeledBank make_bank(const LabeledShape& shape, const geometry::SamplingOptions& sampling, std::size_t count,
                      std::uint64_t seed) {
  geometry::SamplingOptions options = sampling;
  options.count = count;
  const auto labeled = shape.sample_labeled(options, seed);
  LabeledBank bank;
  bank.points.reserve(labeled.size());
  bank.labels.resize(static_cast<Eigen::Index>(labeled.size()));
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    bank.points.push_back(labeled[i].p);
    bank.labels[static_cast<Eigen::Index>(i)] = labeled[i].label;
  }
  return bank;
}

LabeledBank subset(const LabeledBank& bank, std::span<const std::size_t> indices) {
  LabeledBank out;
  out.points.reserve(indices.size());
  out.labels.resize(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.points.push_back(bank.points.at(indices[i]));
    out.labels[static_cast<Eigen::Index>(i)] = bank.labels[static_cast<Eigen::Index>(indices[i])];
  }
  return out;
}

std::vector<std::size_t> draw_indices(std::size_t n, std::size_t count, std::mt19937_64& rng) {
  if (count > n) throw std::invalid_argument("draw_indices: asked for more indices than available");
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  // Partial Fisher-Yates with an explicit draw so results do not depend on the
  // standard library's shuffle implementation.
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(all[i], all[j]);
  }
  all.resize(count);
  return all;
}

std::vector<ad::DiffValue> group_features(const model::OccupancyModel& model, std::span<const PointGroup> groups) {
  if (groups.empty()) throw ShapeError("group_features: no point groups");
  std::map<const raster::RasterInput*, model::FeatureStack> stacks;
  std::vector<std::vector<ad::DiffValue>> per_level;
  for (const PointGroup& g : groups) {
    auto it = stacks.find(g.raster);
    if (it == stacks.end()) it = stacks.emplace(g.raster, model.encode(*g.raster)).first;
    const auto feats = model.features(it->second, g.points);
    if (per_level.empty()) per_level.resize(feats.size());
    for (std::size_t l = 0; l < feats.size(); ++l) per_level[l].push_back(feats[l]);
  }
  std::vector<ad::DiffValue> out;
  for (const auto& parts : per_level) out.push_back(parts.size() == 1 ? parts.front() : ad::concat_rows(parts));
  return out;
}

ad::Matrix group_predictions(const model::OccupancyModel& model, std::span<const PointGroup> groups) {
  ad::NoGradGuard no_grad;
  const auto feats = group_features(model, groups);
  ad::Matrix out(feats.front().rows(), static_cast<Eigen::Index>(feats.size()));
  for (std::size_t l = 0; l < feats.size(); ++l) {
    out.col(static_cast<Eigen::Index>(l)) = model.decoder()(feats[l]).value().col(0);
  }
  return out;
}

}  // namespace sculptor::trainer
