#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sculptor/autodiff/parameter.hpp"
#include "sculptor/model/decoder.hpp"
#include "sculptor/model/encoder.hpp"
#include "sculptor/model/pixel_align.hpp"

namespace sculptor::model {

struct ModelConfig {
  int channels = 16;
  int levels = 4;
  std::vector<int> decoder_widths{128, 64};
  int resolution = 64;
  double leaky_slope = 0.01;
  /// Decode and fuse only the deepest level (single-level ablation).
  bool last_level_only = false;
};

struct OccupancyPrediction {
  ad::Matrix per_layer;  ///< n x active levels
  Eigen::VectorXd fused;  ///< mean of per_layer across columns
};

/// Pixel-aligned implicit occupancy function: encoder, bilinear feature lookup
/// with depth, and one decoder shared across levels.
class OccupancyModel {
 public:
  explicit OccupancyModel(ModelConfig config = {}, std::uint64_t seed = 0);
  OccupancyModel(const OccupancyModel&) = delete;
  OccupancyModel& operator=(const OccupancyModel&) = delete;

  const ModelConfig& config() const { return config_; }
  ad::ParameterSet& parameters() { return params_; }
  const ad::ParameterSet& parameters() const { return params_; }
  const Encoder& encoder() const { return encoder_; }
  const Decoder& decoder() const { return decoder_; }
  Decoder& decoder() { return decoder_; }

  /// Level indices that are decoded and fused.
  std::vector<int> active_levels() const;
  void set_last_level_only(bool value) { config_.last_level_only = value; }

  FeatureStack encode(const raster::RasterInput& input) const;
  /// Per-level pixel-aligned features for the active levels, each n x (C + 1).
  std::vector<ad::DiffValue> features(const FeatureStack& stack, std::span<const geometry::Vec3> points) const;

  /// Graph-free batched prediction.
  OccupancyPrediction predict(const raster::RasterInput& input, std::span<const geometry::Vec3> points) const;
  /// predict() on a precomputed stack; the stack should come from encode() under NoGradGuard.
  OccupancyPrediction predict(const FeatureStack& stack, std::span<const geometry::Vec3> points) const;

  void save(const std::filesystem::path& path) const;
  void load(const std::filesystem::path& path);

 private:
  ModelConfig config_;
  ad::ParameterSet params_;
  std::mt19937_64 init_rng_;
  Encoder encoder_;
  Decoder decoder_;
};

}  // namespace sculptor::model
