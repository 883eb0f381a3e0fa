#include "sculptor/model/model.hpp"

#include "sculptor/autodiff/checkpoint.hpp"
#include "sculptor/error.hpp"

namespace sculptor::model {

OccupancyModel::OccupancyModel(ModelConfig config, std::uint64_t seed)
    : config_(std::move(config)),
      init_rng_(seed),
      encoder_(params_, config_.channels, config_.levels, config_.leaky_slope, init_rng_),
      decoder_(params_, config_.channels + 1, config_.decoder_widths, config_.leaky_slope, init_rng_) {
  if (config_.resolution < 16 || config_.resolution % 2 != 0) {
    throw ShapeError("model resolution must be even and at least 16");
  }
}

std::vector<int> OccupancyModel::active_levels() const {
  if (config_.last_level_only) return {config_.levels - 1};
  std::vector<int> out(static_cast<std::size_t>(config_.levels));
  for (int l = 0; l < config_.levels; ++l) out[static_cast<std::size_t>(l)] = l;
  return out;
}

FeatureStack OccupancyModel::encode(const raster::RasterInput& input) const {
  if (input.resolution != config_.resolution) {
    throw ShapeError("raster resolution " + std::to_string(input.resolution) + " does not match model resolution " +
                     std::to_string(config_.resolution));
  }
  return encoder_.encode(input);
}

std::vector<ad::DiffValue> OccupancyModel::features(const FeatureStack& stack,
                                                    std::span<const geometry::Vec3> points) const {
  const BilinearTaps taps = bilinear_taps(points, config_.resolution, stack.height, stack.width);
  std::vector<ad::DiffValue> out;
  for (int l : active_levels()) out.push_back(pixel_align(stack.levels[static_cast<std::size_t>(l)], taps));
  return out;
}

OccupancyPrediction OccupancyModel::predict(const FeatureStack& stack, std::span<const geometry::Vec3> points) const {
  ad::NoGradGuard no_grad;
  const std::vector<ad::DiffValue> feats = features(stack, points);
  OccupancyPrediction out;
  out.per_layer.resize(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(feats.size()));
  for (std::size_t l = 0; l < feats.size(); ++l) {
    out.per_layer.col(static_cast<Eigen::Index>(l)) = decoder_(feats[l]).value().col(0);
  }
  out.fused = out.per_layer.rowwise().mean();
  return out;
}

OccupancyPrediction OccupancyModel::predict(const raster::RasterInput& input,
                                            std::span<const geometry::Vec3> points) const {
  ad::NoGradGuard no_grad;
  return predict(encode(input), points);
}

void OccupancyModel::save(const std::filesystem::path& path) const { ad::save_checkpoint(path, params_); }

void OccupancyModel::load(const std::filesystem::path& path) { ad::load_checkpoint(path, params_); }

}  // namespace sculptor::model
