#pragma once

#include "sculptor/trainer/config.hpp"

namespace testcfg {

/// A pipeline small enough to pretrain, adapt and reconstruct in seconds.
inline sculptor::trainer::RunConfig tiny(std::uint64_t seed = 0) {
  sculptor::trainer::RunConfig c;
  c.seed = seed;
  c.dataset = {.source_train = 2, .target_train = 2, .target_test = 1, .mesh_resolution = 32};
  c.sampling.count = 256;
  c.model = {.channels = 4, .levels = 2, .decoder_widths = {16, 8}, .resolution = 32};
  auto& t = c.train;
  t.batch_source = 64;
  t.batch_target = 64;
  t.meshes_per_step = 2;
  t.pretrain_max_epochs = 4;
  t.pretrain_steps_per_epoch = 2;
  t.source_bank_per_mesh = 256;
  t.heldout_per_mesh = 64;
  t.adapt_epochs = 8;
  t.pool_per_mesh = 64;
  t.pool_refresh_interval = 3;
  t.reference_per_mesh = 64;
  t.k = 4;
  t.start_epoch = 2;
  t.epoch_total = 4;
  c.surface.resolution = 32;
  c.metrics.samples = 1000;
  c.output_dir.clear();
  return c;
}

}  // namespace testcfg
