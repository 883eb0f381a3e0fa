#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sculptor/adapt/losses.hpp"
#include "sculptor/geometry/sampling.hpp"
#include "sculptor/metrics/metrics.hpp"
#include "sculptor/model/model.hpp"

namespace sculptor::trainer {

struct DatasetConfig {
  std::size_t source_train = 3;
  std::size_t target_train = 20;
  std::size_t target_test = 8;
  /// Marching-cubes cells along the longest side of each generated solid.
  int mesh_resolution = 64;
};

struct TrainConfig {
  std::size_t batch_source = 512;
  std::size_t batch_target = 512;
  /// Meshes per domain per step; each contributes batch / meshes_per_step points.
  std::size_t meshes_per_step = 4;
  double learning_rate = 1e-3;
  double rms_decay = 0.99;
  double rms_epsilon = 1e-8;

  int pretrain_max_epochs = 200;
  int pretrain_steps_per_epoch = 5;
  double pretrain_target_accuracy = 0.9;
  /// Labeled points drawn once per source mesh; batches and neighbour
  /// references are subsets of this bank.
  std::size_t source_bank_per_mesh = 4096;
  /// Held-out labeled points per source mesh for accuracy monitoring.
  std::size_t heldout_per_mesh = 1024;

  int adapt_epochs = 90;
  /// Target point pool per mesh, resampled every pool_refresh_interval epochs.
  std::size_t pool_per_mesh = 512;
  int pool_refresh_interval = 10;
  /// Source points per mesh used as the neighbour-search reference set.
  std::size_t reference_per_mesh = 512;
  int k = 8;
  double depth_scale = 256.0;
  double w1 = 5.0;
  double w2 = 2.0;
  int start_epoch = 30;
  int epoch_total = 60;
  /// "median" or a positive number used as a fixed bandwidth.
  std::string sigma = "median";
  bool freeze_decoder = false;
  /// Monitoring CD on the first held-out target mesh every N epochs (0 = off).
  int monitor_every = 0;
  int monitor_resolution = 64;
};

struct SurfaceConfig {
  int resolution = 128;
  double min_fraction = 0.05;
};

struct RunConfig {
  std::uint64_t seed = 0;
  DatasetConfig dataset;
  geometry::SamplingOptions sampling;
  model::ModelConfig model;
  TrainConfig train;
  adapt::AblationFlags ablation;
  SurfaceConfig surface;
  metrics::MetricOptions metrics;
  /// Adapted variants evaluated by `experiment` besides the pretrained model:
  /// "adapted" and any of no_mmd, no_source, no_target, no_mi, no_multilevel, no_rescale.
  std::vector<std::string> variants{"adapted"};
  std::string output_dir = "runs/default";

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

std::string to_json(const RunConfig& config);
/// Keys absent from the document keep their defaults; unknown keys are rejected.
RunConfig from_json(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const RunConfig& config);

/// Applies "dotted.key=value" overrides; value is parsed as JSON, falling back to a string.
void apply_overrides(RunConfig& config, const std::vector<std::string>& assignments);

/// Ablation flags for a variant name; "adapted" maps to no flags.
adapt::AblationFlags variant_flags(const std::string& variant);

/// Deterministic child seed for (base, stream, index).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0);

}  // namespace sculptor::trainer
