#pragma once

#include <optional>
#include <vector>

#include "sculptor/adapt/pseudo_labels.hpp"
#include "sculptor/autodiff/tensor.hpp"
#include "sculptor/model/decoder.hpp"

namespace sculptor::adapt {

/// Per-level pixel-aligned features of one source and one target point set.
/// Source rows carry occupancy labels; target rows carry none, only the
/// pseudo-labels produced by neighbour aggregation.
struct DomainBatch {
  std::vector<ad::DiffValue> source;  ///< per level, n_s x d
  std::vector<ad::DiffValue> target;  ///< per level, n_t x d
  Eigen::VectorXd source_labels;      ///< n_s values in {0, 1}
  ad::Matrix pseudo_labels;           ///< n_t x L, empty until assigned

  std::size_t levels() const { return source.size(); }
  /// Throws ShapeError on inconsistent level counts, row counts or widths.
  void validate() const;
};

/// Decoder outputs for each level of a batch (n x 1 each).
struct DomainPredictions {
  std::vector<ad::DiffValue> source;
  std::vector<ad::DiffValue> target;
};

DomainPredictions decode_batch(const DomainBatch& batch, const model::Decoder& decoder);

/// Biased squared MMD with Gaussian kernel exp(-|x-y|^2 / (2 sigma^2)).
/// Throws std::invalid_argument on empty sets or sigma <= 0.
ad::DiffValue mmd_layer(const ad::DiffValue& source, const ad::DiffValue& target, double sigma);

/// Median pairwise distance over the merged rows of both sets (distinct pairs);
/// falls back to 1 when the median is zero.
double median_bandwidth(const ad::Matrix& source, const ad::Matrix& target);
std::vector<double> median_bandwidths(const DomainBatch& batch);

/// Mean over levels of mmd_layer. With no bandwidths given, the median
/// heuristic is evaluated on the current values and held constant.
ad::DiffValue loss_sim(const DomainBatch& batch, const std::optional<std::vector<double>>& sigmas = std::nullopt);

/// Mean over levels and source rows of (prediction - label)^2.
ad::DiffValue loss_source(const DomainBatch& batch, const DomainPredictions& predictions);
ad::DiffValue loss_source(const DomainBatch& batch, const model::Decoder& decoder);

/// Mean over levels and target rows of (prediction - pseudo-label)^2.
ad::DiffValue loss_target(const DomainBatch& batch, const DomainPredictions& predictions);
ad::DiffValue loss_target(const DomainBatch& batch, const model::Decoder& decoder);

/// Binary entropy -x log x - (1-x) log(1-x), elementwise, with guarded logs.
ad::DiffValue binary_entropy(const ad::DiffValue& x);

/// Mean over levels of h(mean prediction) - mean h(prediction) on target rows.
ad::DiffValue loss_mi(const DomainBatch& batch, const DomainPredictions& predictions);
ad::DiffValue loss_mi(const DomainBatch& batch, const model::Decoder& decoder);

struct AblationFlags {
  bool no_mmd = false;
  bool no_source = false;
  bool no_target = false;
  bool no_mi = false;
  bool no_multilevel = false;
  bool no_rescale = false;
};

struct LossWeights {
  double w1 = 5.0;
  double w2 = 2.0;
  RampSchedule schedule;

  double w3(int epoch) const { return schedule(epoch); }
  double w4(int epoch) const { return schedule(epoch); }
};

struct LossReport {
  double sim = 0.0;
  double source = 0.0;
  double target = 0.0;
  double mi = 0.0;
  double total = 0.0;
  /// Weights actually applied (zero for ablated terms).
  double w1 = 0.0;
  double w2 = 0.0;
  double w3 = 0.0;
  double w4 = 0.0;
};

struct TotalLoss {
  ad::DiffValue value;
  LossReport report;
};

/// w1 L_sim + w2 L_source + w3 L_target - w4 L_mi. Terms whose applied weight
/// is zero are not evaluated and report 0.
TotalLoss total_loss(const DomainBatch& batch, const model::Decoder& decoder, int epoch, const LossWeights& weights,
                     const AblationFlags& flags = {},
                     const std::optional<std::vector<double>>& sigmas = std::nullopt);

}  // namespace sculptor::adapt
