#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "sculptor/metrics/metrics.hpp"
#include "sculptor/trainer/config.hpp"
#include "sculptor/trainer/trainer.hpp"

namespace sculptor::trainer {

struct VariantResult {
  std::string name;
  TrainLog log;
  metrics::EvalReport report;
};

struct ExperimentResult {
  PretrainResult pretrain;
  metrics::EvalReport pretrained;
  std::vector<VariantResult> variants;

  /// Pretrained row followed by one row per variant.
  std::vector<metrics::EvalReport> reports() const;
  /// Throws std::out_of_range when the variant was not run.
  const VariantResult& variant(const std::string& name) const;
};

/// Seed used to initialise model weights for a run.
std::uint64_t model_seed(const RunConfig& config);

/// Copies parameter values by position; both sets must come from the same architecture.
void copy_parameters(const ad::ParameterSet& from, ad::ParameterSet& to);

/// dataset -> pretrain -> evaluate pretrained -> per variant: adapt from the
/// pretrained weights and evaluate. With a non-empty output_dir, writes
/// config.json, dataset/, checkpoints/, logs/, meshes/<method>/, metrics.csv
/// and metrics.txt; the metric files are rewritten after every variant.
ExperimentResult run_experiment(const RunConfig& config, std::ostream* log = nullptr);

}  // namespace sculptor::trainer
