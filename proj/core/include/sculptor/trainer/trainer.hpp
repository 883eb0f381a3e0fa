#pragma once

#include <filesystem>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "sculptor/adapt/losses.hpp"
#include "sculptor/geometry/synthetic.hpp"
#include "sculptor/metrics/metrics.hpp"
#include "sculptor/model/model.hpp"
#include "sculptor/trainer/batch.hpp"
#include "sculptor/trainer/config.hpp"
#include "sculptor/trainer/domain.hpp"

namespace sculptor::trainer {

struct DatasetEntry {
  std::string name;
  geometry::Family family = geometry::Family::source;
  std::string split;  ///< "train" or "test"
  std::uint64_t seed = 0;
};

/// Generated meshes with their manifest entries, in the same order.
struct Datasets {
  std::vector<DatasetEntry> manifest;
  std::vector<geometry::TriMesh> meshes;
};

/// Generates the synthetic source-train, target-train and target-test sets.
Datasets build_datasets(const RunConfig& config);
/// Writes every mesh as <name>.obj plus manifest.json (name, family, split, seed, file).
void write_datasets(const std::filesystem::path& dir, const Datasets& data);
/// Reloads a directory written by write_datasets.
Datasets read_datasets(const std::filesystem::path& dir);

/// Datasets split into the three roles. Target training shapes are wrapped so
/// that only their rasters and unlabeled query points are reachable.
struct TrainingData {
  std::vector<LabeledShape> source;
  std::vector<UnlabeledShape> target;
  std::vector<EvalShape> test;
};

TrainingData split_datasets(const Datasets& data, int resolution);

/// Labeled banks drawn from the source shapes before any adaptation starts.
struct SourceData {
  std::vector<LabeledBank> bank;
  std::vector<LabeledBank> heldout;
};

SourceData prepare_source(const std::vector<LabeledShape>& shapes, const RunConfig& config);

/// Fraction of held-out labeled points whose fused prediction, thresholded at
/// 0.5, matches the label.
double source_accuracy(const model::OccupancyModel& model, const std::vector<LabeledShape>& shapes,
                       const std::vector<LabeledBank>& heldout);

struct PretrainEpoch {
  int epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;
};

struct PretrainResult {
  std::vector<PretrainEpoch> epochs;
  bool reached_target = false;
};

/// Minimises the source MSE alone until the held-out accuracy target or the
/// epoch cap. Throws NumericError when the loss stops being finite.
PretrainResult pretrain_source(model::OccupancyModel& model, const std::vector<LabeledShape>& shapes,
                               const SourceData& source, const RunConfig& config, std::ostream* log = nullptr);

struct EpochRecord {
  int epoch = 0;
  adapt::LossReport loss;  ///< term values averaged over the epoch's steps
  double momentum = 0.0;
  double source_accuracy = 0.0;
  double monitor_cd = std::numeric_limits<double>::quiet_NaN();
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
};

void write_train_log(std::ostream& out, const TrainLog& log);
void write_train_log_csv(std::ostream& out, const TrainLog& log);

/// Effective ablation flags: the config's flags or'ed with the variant's.
adapt::AblationFlags merge_flags(const adapt::AblationFlags& a, const adapt::AblationFlags& b);

/// Unsupervised adaptation. Target shapes contribute rasters and unlabeled query
/// points only; the whole loop runs inside a LabelingForbiddenScope, so any
/// attempt to derive occupancy labels throws UnsupervisedContractError.
/// `monitor`, when given, is a held-out target shape used for CD monitoring.
TrainLog adapt_model(model::OccupancyModel& model, const std::vector<LabeledShape>& source_shapes,
                     const SourceData& source, const std::vector<UnlabeledShape>& target_shapes,
                     const RunConfig& config, const adapt::AblationFlags& flags, const EvalShape* monitor = nullptr,
                     std::ostream* log = nullptr);

struct Reconstruction {
  geometry::TriMesh mesh;
  bool empty = false;
  bool watertight = false;
  /// Empty or non-watertight after component filtering.
  bool failed = false;
};

/// sample_grid -> marching cubes at 0.5 -> postprocess.
Reconstruction reconstruct(const model::OccupancyModel& model, const raster::RasterInput& input, int resolution,
                           double min_fraction);

/// Reconstructs and scores every shape; failure flags come from reconstruct().
/// Meshes are written to mesh_dir as <name>.obj when mesh_dir is non-empty.
metrics::EvalReport evaluate(const std::string& method, const model::OccupancyModel& model,
                             const std::vector<EvalShape>& shapes, const RunConfig& config,
                             const std::filesystem::path& mesh_dir = {});

}  // namespace sculptor::trainer
