#include "sculptor/trainer/gradcheck.hpp"

#include <functional>
#include <random>

#include "sculptor/adapt/losses.hpp"
#include "sculptor/autodiff/grad_check.hpp"
#include "sculptor/geometry/synthetic.hpp"
#include "sculptor/trainer/batch.hpp"
#include "sculptor/trainer/config.hpp"

namespace sculptor::trainer {

std::vector<LossGradCheck> check_loss_gradients(std::uint64_t seed, const LossGradCheckOptions& options) {
  const geometry::SyntheticOptions coarse{24};
  const auto src_params = geometry::draw_params(geometry::Family::source, derive_seed(seed, 1));
  const auto tgt_params = geometry::draw_params(geometry::Family::target, derive_seed(seed, 2));
  const LabeledShape source("source", geometry::build_synthetic(src_params, coarse).mesh, options.model.resolution);
  const UnlabeledShape target("target", geometry::build_synthetic(tgt_params, coarse).mesh, options.model.resolution);

  geometry::SamplingOptions sampling;
  sampling.count = options.points;
  const LabeledBank bank = make_bank(source, sampling, options.points, derive_seed(seed, 3));
  std::vector<geometry::Vec3> target_points;
  for (const auto& q : target.sample_queries(sampling, derive_seed(seed, 4))) target_points.push_back(q.p);

  model::OccupancyModel model(options.model, derive_seed(seed, 5));
  const std::size_t levels = model.active_levels().size();
  std::mt19937_64 rng(derive_seed(seed, 6));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Zero biases put every background pixel exactly on the rectifier's kink,
  // where central differences average the two one-sided slopes.
  std::normal_distribution<double> bias_noise(0.0, 0.1);
  for (auto& p : model.parameters().items()) {
    if (p.name.ends_with(".bias")) {
      for (Eigen::Index i = 0; i < p.value.mutable_value().size(); ++i) {
        p.value.mutable_value().data()[i] = bias_noise(rng);
      }
    }
  }
  ad::Matrix pseudo(static_cast<Eigen::Index>(target_points.size()), static_cast<Eigen::Index>(levels));
  for (Eigen::Index i = 0; i < pseudo.size(); ++i) pseudo.data()[i] = unit(rng);

  const std::vector<PointGroup> source_groups{{&source.raster(), bank.points}};
  const std::vector<PointGroup> target_groups{{&target.raster(), target_points}};
  auto make_batch = [&] {
    adapt::DomainBatch batch;
    batch.source = group_features(model, source_groups);
    batch.target = group_features(model, target_groups);
    batch.source_labels = bank.labels;
    batch.pseudo_labels = pseudo;
    return batch;
  };
  const std::vector<double> sigmas = [&] {
    ad::NoGradGuard no_grad;
    return adapt::median_bandwidths(make_batch());
  }();
  const adapt::LossWeights weights;

  const std::vector<std::pair<std::string, std::function<ad::DiffValue()>>> terms{
      {"sim", [&] { return adapt::loss_sim(make_batch(), sigmas); }},
      {"source", [&] { return adapt::loss_source(make_batch(), model.decoder()); }},
      {"target", [&] { return adapt::loss_target(make_batch(), model.decoder()); }},
      {"mi", [&] { return adapt::loss_mi(make_batch(), model.decoder()); }},
      {"total",
       [&] { return adapt::total_loss(make_batch(), model.decoder(), options.epoch, weights, {}, sigmas).value; }},
  };

  const std::vector<ad::DiffValue> leaves = model.parameters().values();
  std::vector<LossGradCheck> out;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    model.parameters().zero_grad();
    ad::GradCheckOptions gc;
    gc.step = options.step;
    gc.max_coords_per_leaf = options.coords_per_leaf;
    gc.seed = derive_seed(seed, 7, t);
    const ad::GradCheckResult r = ad::grad_check(terms[t].second, leaves, gc);
    out.push_back({terms[t].first, seed, r.max_relative_error, r.coordinates, r.worst});
  }
  return out;
}

}  // namespace sculptor::trainer
