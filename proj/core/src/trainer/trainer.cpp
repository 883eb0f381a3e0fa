#include "sculptor/trainer/trainer.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <nlohmann/json.hpp>
#include <sstream>

#include "sculptor/adapt/neighbours.hpp"
#include "sculptor/autodiff/optimizer.hpp"
#include "sculptor/error.hpp"
#include "sculptor/geometry/mesh_io.hpp"
#include "sculptor/geometry/winding.hpp"
#include "sculptor/surface/grid.hpp"
#include "sculptor/surface/marching_cubes.hpp"
#include "sculptor/surface/postprocess.hpp"

namespace sculptor::trainer {

namespace {

// Seed streams derived from the run seed.
enum Stream : std::uint64_t {
  kSourceTrain = 1,
  kTargetTrain = 2,
  kTargetTest = 3,
  kBank = 5,
  kHeldout = 6,
  kPretrain = 7,
  kAdapt = 8,
  kPool = 9,
};

std::string indexed(const std::string& prefix, std::size_t i) {
  std::ostringstream os;
  os << prefix << '_' << std::setw(3) << std::setfill('0') << i;
  return os.str();
}

void check_finite(double value, const std::string& where) {
  if (!std::isfinite(value)) throw NumericError(where + ": loss became non-finite (" + std::to_string(value) + ")");
}

ad::RmsPropOptions rms_options(const TrainConfig& t) { return {t.learning_rate, t.rms_decay, t.rms_epsilon}; }

std::optional<std::vector<double>> bandwidth_policy(const TrainConfig& t, std::size_t levels) {
  if (t.sigma == "median") return std::nullopt;
  return std::vector<double>(levels, std::stod(t.sigma));
}

}  // namespace

Datasets build_datasets(const RunConfig& config) {
  Datasets data;
  const geometry::SyntheticOptions options{config.dataset.mesh_resolution};
  auto generate = [&](geometry::Family family, std::size_t count, Stream stream, const std::string& prefix,
                      const std::string& split) {
    const std::uint64_t seed = derive_seed(config.seed, stream);
    auto shapes = geometry::make_synthetic_dataset(family, count, seed, options);
    for (std::size_t i = 0; i < shapes.size(); ++i) {
      data.manifest.push_back({indexed(prefix, i), family, split, seed});
      data.meshes.push_back(std::move(shapes[i].mesh));
    }
  };
  generate(geometry::Family::source, config.dataset.source_train, kSourceTrain, "source", "train");
  generate(geometry::Family::target, config.dataset.target_train, kTargetTrain, "target_train", "train");
  generate(geometry::Family::target, config.dataset.target_test, kTargetTest, "target_test", "test");
  return data;
}

void write_datasets(const std::filesystem::path& dir, const Datasets& data) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest = nlohmann::json::array();
  for (std::size_t i = 0; i < data.manifest.size(); ++i) {
    const DatasetEntry& entry = data.manifest[i];
    const std::string file = entry.name + ".obj";
    geometry::save_mesh(dir / file, data.meshes[i]);
    manifest.push_back({{"name", entry.name},
                        {"family", geometry::to_string(entry.family)},
                        {"split", entry.split},
                        {"seed", entry.seed},
                        {"file", file}});
  }
  std::ofstream out(dir / "manifest.json");
  if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

Datasets read_datasets(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IoError("cannot open " + (dir / "manifest.json").string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("manifest.json is not valid JSON: " + std::string(e.what()));
  }
  Datasets data;
  for (const auto& item : manifest) {
    DatasetEntry entry;
    entry.name = item.at("name").get<std::string>();
    entry.family = geometry::family_from_string(item.at("family").get<std::string>());
    entry.split = item.at("split").get<std::string>();
    entry.seed = item.at("seed").get<std::uint64_t>();
    data.meshes.push_back(geometry::read_mesh(dir / item.at("file").get<std::string>()));
    data.manifest.push_back(std::move(entry));
  }
  return data;
}

TrainingData split_datasets(const Datasets& data, int resolution) {
  TrainingData out;
  for (std::size_t i = 0; i < data.manifest.size(); ++i) {
    const DatasetEntry& e = data.manifest[i];
    const geometry::TriMesh& mesh = data.meshes[i];
    if (e.split == "test") {
      out.test.push_back({e.name, mesh, raster::rasterize(mesh, resolution)});
    } else if (e.family == geometry::Family::source) {
      out.source.emplace_back(e.name, mesh, resolution);
    } else {
      out.target.emplace_back(e.name, mesh, resolution);
    }
  }
  return out;
}

SourceData prepare_source(const std::vector<LabeledShape>& shapes, const RunConfig& config) {
  SourceData out;
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    out.bank.push_back(
        make_bank(shapes[i], config.sampling, config.train.source_bank_per_mesh, derive_seed(config.seed, kBank, i)));
    out.heldout.push_back(
        make_bank(shapes[i], config.sampling, config.train.heldout_per_mesh, derive_seed(config.seed, kHeldout, i)));
  }
  return out;
}

double source_accuracy(const model::OccupancyModel& model, const std::vector<LabeledShape>& shapes,
                       const std::vector<LabeledBank>& heldout) {
  std::size_t correct = 0, total = 0;
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto pred = model.predict(shapes[i].raster(), heldout[i].points);
    for (Eigen::Index j = 0; j < pred.fused.size(); ++j) {
      const bool inside = pred.fused[j] >= 0.5;
      correct += inside == (heldout[i].labels[j] > 0.5) ? 1 : 0;
    }
    total += static_cast<std::size_t>(pred.fused.size());
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

PretrainResult pretrain_source(model::OccupancyModel& model, const std::vector<LabeledShape>& shapes,
                               const SourceData& source, const RunConfig& config, std::ostream* log) {
  const TrainConfig& t = config.train;
  const std::size_t per_mesh = t.batch_source / t.meshes_per_step;
  ad::RmsProp optimizer(model.parameters().values(), rms_options(t));
  std::mt19937_64 rng(derive_seed(config.seed, kPretrain));
  PretrainResult result;
  std::size_t step = 0;
  for (int epoch = 1; epoch <= t.pretrain_max_epochs; ++epoch) {
    double loss_sum = 0.0;
    for (int s = 0; s < t.pretrain_steps_per_epoch; ++s, ++step) {
      std::vector<PointGroup> groups;
      adapt::DomainBatch batch;
      std::vector<double> labels;
      for (std::size_t k = 0; k < t.meshes_per_step; ++k) {
        const std::size_t m = (step * t.meshes_per_step + k) % shapes.size();
        const auto picked = subset(source.bank[m], draw_indices(source.bank[m].size(), per_mesh, rng));
        groups.push_back({&shapes[m].raster(), picked.points});
        labels.insert(labels.end(), picked.labels.data(), picked.labels.data() + picked.labels.size());
      }
      batch.source = group_features(model, groups);
      batch.source_labels = Eigen::Map<const Eigen::VectorXd>(labels.data(), static_cast<Eigen::Index>(labels.size()));
      adapt::DomainPredictions preds;
      for (const auto& f : batch.source) preds.source.push_back(model.decoder()(f));
      const ad::DiffValue loss = adapt::loss_source(batch, preds);
      check_finite(loss.item(), "pretrain epoch " + std::to_string(epoch));
      optimizer.zero_grad();
      ad::backward(loss);
      optimizer.step();
      loss_sum += loss.item();
    }
    PretrainEpoch record{epoch, loss_sum / std::max(1, t.pretrain_steps_per_epoch),
                         source_accuracy(model, shapes, source.heldout)};
    result.epochs.push_back(record);
    if (log) {
      *log << "pretrain epoch " << epoch << " loss=" << std::setprecision(17) << record.loss
           << " accuracy=" << record.accuracy << '\n';
    }
    if (record.accuracy >= t.pretrain_target_accuracy) {
      result.reached_target = true;
      break;
    }
  }
  return result;
}

adapt::AblationFlags merge_flags(const adapt::AblationFlags& a, const adapt::AblationFlags& b) {
  return {a.no_mmd || b.no_mmd,         a.no_source || b.no_source,         a.no_target || b.no_target,
          a.no_mi || b.no_mi,           a.no_multilevel || b.no_multilevel, a.no_rescale || b.no_rescale};
}

TrainLog adapt_model(model::OccupancyModel& model, const std::vector<LabeledShape>& source_shapes,
                     const SourceData& source, const std::vector<UnlabeledShape>& target_shapes,
                     const RunConfig& config, const adapt::AblationFlags& flags, const EvalShape* monitor,
                     std::ostream* log) {
  if (source_shapes.empty() || target_shapes.empty()) throw std::invalid_argument("adapt: empty domain");
  geometry::LabelingForbiddenScope no_labels;

  const TrainConfig& t = config.train;
  // The single-level variant keeps decoding only the deepest level afterwards.
  if (flags.no_multilevel) model.set_last_level_only(true);
  const std::size_t levels = model.active_levels().size();
  const double lambda = flags.no_rescale ? 1.0 : t.depth_scale;
  const std::size_t source_per_mesh = t.batch_source / t.meshes_per_step;
  const std::size_t target_per_mesh = t.batch_target / t.meshes_per_step;
  const adapt::LossWeights weights{t.w1, t.w2, {t.start_epoch, t.epoch_total}};
  const auto sigmas = bandwidth_policy(t, levels);

  std::vector<ad::DiffValue> trainable = model.encoder().parameters();
  if (!t.freeze_decoder) {
    for (const auto& p : model.decoder().parameters()) trainable.push_back(p);
  }
  ad::RmsProp optimizer(trainable, rms_options(t));
  std::mt19937_64 rng(derive_seed(config.seed, kAdapt));

  const std::size_t nt = target_shapes.size();
  std::vector<std::vector<geometry::Vec3>> pools(nt);
  std::vector<adapt::PseudoLabelState> states(nt);
  std::vector<PointGroup> reference_groups;
  Eigen::VectorXd reference_labels;

  TrainLog train_log;
  std::size_t global_step = 0;
  for (int epoch = 1; epoch <= t.adapt_epochs; ++epoch) {
    const int round = (epoch - 1) / t.pool_refresh_interval;
    if ((epoch - 1) % t.pool_refresh_interval == 0) {
      geometry::SamplingOptions pool_options = config.sampling;
      pool_options.count = t.pool_per_mesh;
      for (std::size_t i = 0; i < nt; ++i) {
        const auto queries =
            target_shapes[i].sample_queries(pool_options, derive_seed(config.seed, kPool, round * nt + i));
        pools[i].clear();
        for (const auto& q : queries) pools[i].push_back(q.p);
      }
      reference_groups.clear();
      std::vector<double> labels;
      for (std::size_t s = 0; s < source_shapes.size(); ++s) {
        const auto picked = subset(source.bank[s], draw_indices(source.bank[s].size(), t.reference_per_mesh, rng));
        reference_groups.push_back({&source_shapes[s].raster(), picked.points});
        labels.insert(labels.end(), picked.labels.data(), picked.labels.data() + picked.labels.size());
      }
      reference_labels = Eigen::Map<const Eigen::VectorXd>(labels.data(), static_cast<Eigen::Index>(labels.size()));
    }

    const double w3 = flags.no_target ? 0.0 : weights.w3(epoch);
    if (w3 > 0.0) {
      ad::NoGradGuard no_grad;
      const auto reference = group_features(model, reference_groups);
      for (std::size_t i = 0; i < nt; ++i) {
        const std::array<PointGroup, 1> group{PointGroup{&target_shapes[i].raster(), pools[i]}};
        const auto feats = group_features(model, group);
        ad::Matrix predictions(static_cast<Eigen::Index>(pools[i].size()), static_cast<Eigen::Index>(levels));
        ad::Matrix aggregates(predictions.rows(), predictions.cols());
        for (std::size_t l = 0; l < levels; ++l) {
          const auto col = static_cast<Eigen::Index>(l);
          predictions.col(col) = model.decoder()(feats[l]).value().col(0);
          aggregates.col(col) = adapt::aggregate_neighbours(feats[l].value(), reference[l].value(), reference_labels,
                                                            t.k, lambda)
                                    .aggregate;
        }
        adapt::update_pseudo_labels(states[i], predictions, aggregates, epoch, weights.schedule);
      }
    }

    std::vector<std::size_t> order = draw_indices(nt, nt, rng);
    const std::size_t steps = (nt + t.meshes_per_step - 1) / t.meshes_per_step;
    adapt::LossReport sum;
    for (std::size_t s = 0; s < steps; ++s, ++global_step) {
      std::vector<PointGroup> source_groups;
      std::vector<double> labels;
      for (std::size_t k = 0; k < t.meshes_per_step; ++k) {
        const std::size_t m = (global_step * t.meshes_per_step + k) % source_shapes.size();
        const auto picked = subset(source.bank[m], draw_indices(source.bank[m].size(), source_per_mesh, rng));
        source_groups.push_back({&source_shapes[m].raster(), picked.points});
        labels.insert(labels.end(), picked.labels.data(), picked.labels.data() + picked.labels.size());
      }
      std::vector<PointGroup> target_groups;
      ad::Matrix pseudo(static_cast<Eigen::Index>(target_per_mesh * t.meshes_per_step),
                        static_cast<Eigen::Index>(levels));
      for (std::size_t k = 0; k < t.meshes_per_step; ++k) {
        const std::size_t m = order[(s * t.meshes_per_step + k) % nt];
        const auto picked = draw_indices(pools[m].size(), target_per_mesh, rng);
        PointGroup g{&target_shapes[m].raster(), {}};
        for (std::size_t q = 0; q < picked.size(); ++q) {
          g.points.push_back(pools[m][picked[q]]);
          if (w3 > 0.0) {
            pseudo.row(static_cast<Eigen::Index>(k * target_per_mesh + q)) =
                states[m].labels.row(static_cast<Eigen::Index>(picked[q]));
          }
        }
        target_groups.push_back(std::move(g));
      }

      adapt::DomainBatch batch;
      batch.source = group_features(model, source_groups);
      batch.target = group_features(model, target_groups);
      batch.source_labels = Eigen::Map<const Eigen::VectorXd>(labels.data(), static_cast<Eigen::Index>(labels.size()));
      if (w3 > 0.0) batch.pseudo_labels = std::move(pseudo);

      const adapt::TotalLoss loss = adapt::total_loss(batch, model.decoder(), epoch, weights, flags, sigmas);
      check_finite(loss.report.total, "adapt epoch " + std::to_string(epoch));
      model.parameters().zero_grad();
      ad::backward(loss.value);
      optimizer.step();

      sum.sim += loss.report.sim;
      sum.source += loss.report.source;
      sum.target += loss.report.target;
      sum.mi += loss.report.mi;
      sum.total += loss.report.total;
      sum.w1 = loss.report.w1;
      sum.w2 = loss.report.w2;
      sum.w3 = loss.report.w3;
      sum.w4 = loss.report.w4;
    }

    EpochRecord record;
    record.epoch = epoch;
    record.loss = sum;
    const double inv = 1.0 / static_cast<double>(steps);
    record.loss.sim *= inv;
    record.loss.source *= inv;
    record.loss.target *= inv;
    record.loss.mi *= inv;
    record.loss.total *= inv;
    record.momentum = weights.schedule(epoch);
    record.source_accuracy = source_accuracy(model, source_shapes, source.heldout);
    if (monitor && t.monitor_every > 0 && epoch % t.monitor_every == 0) {
      const Reconstruction rec = reconstruct(model, monitor->raster, t.monitor_resolution, config.surface.min_fraction);
      record.monitor_cd = rec.empty ? metrics::kFailurePenalty : metrics::chamfer(rec.mesh, monitor->mesh, config.metrics);
    }
    train_log.epochs.push_back(record);
    if (log) {
      TrainLog single{{record}};
      write_train_log(*log, single);
    }
  }
  return train_log;
}

void write_train_log(std::ostream& out, const TrainLog& log) {
  const auto precision = out.precision(17);
  for (const EpochRecord& r : log.epochs) {
    out << "epoch " << r.epoch << " total=" << r.loss.total << " sim=" << r.loss.sim << " source=" << r.loss.source
        << " target=" << r.loss.target << " mi=" << r.loss.mi << " w1=" << r.loss.w1 << " w2=" << r.loss.w2
        << " w3=" << r.loss.w3 << " w4=" << r.loss.w4 << " m=" << r.momentum << " source_acc=" << r.source_accuracy;
    if (!std::isnan(r.monitor_cd)) out << " monitor_cd=" << r.monitor_cd;
    out << '\n';
  }
  out.precision(precision);
}

void write_train_log_csv(std::ostream& out, const TrainLog& log) {
  const auto precision = out.precision(17);
  out << "epoch,total,sim,source,target,mi,w1,w2,w3,w4,m,source_acc,monitor_cd\n";
  for (const EpochRecord& r : log.epochs) {
    out << r.epoch << ',' << r.loss.total << ',' << r.loss.sim << ',' << r.loss.source << ',' << r.loss.target << ','
        << r.loss.mi << ',' << r.loss.w1 << ',' << r.loss.w2 << ',' << r.loss.w3 << ',' << r.loss.w4 << ','
        << r.momentum << ',' << r.source_accuracy << ',';
    if (!std::isnan(r.monitor_cd)) out << r.monitor_cd;
    out << '\n';
  }
  out.precision(precision);
}

Reconstruction reconstruct(const model::OccupancyModel& model, const raster::RasterInput& input, int resolution,
                           double min_fraction) {
  Reconstruction out;
  const surface::ScalarGrid grid = surface::sample_grid(model, input, resolution);
  const geometry::TriMesh raw = surface::extract_isosurface(surface::padded(grid, 0.0), surface::kSurfaceLevel);
  if (raw.empty()) {
    out.empty = true;
    out.failed = true;
    return out;
  }
  out.mesh = surface::postprocess(raw, min_fraction);
  out.watertight = geometry::is_watertight(out.mesh);
  out.failed = !out.watertight;
  return out;
}

metrics::EvalReport evaluate(const std::string& method, const model::OccupancyModel& model,
                             const std::vector<EvalShape>& shapes, const RunConfig& config,
                             const std::filesystem::path& mesh_dir) {
  if (!mesh_dir.empty()) std::filesystem::create_directories(mesh_dir);
  std::vector<metrics::MeshScore> scores;
  for (const EvalShape& shape : shapes) {
    const Reconstruction rec = reconstruct(model, shape.raster, config.surface.resolution, config.surface.min_fraction);
    metrics::MeshScore score = metrics::score_mesh(shape.name, rec.mesh, shape.mesh, config.metrics);
    score.failed = rec.failed;
    scores.push_back(score);
    if (!mesh_dir.empty() && !rec.empty) geometry::save_mesh(mesh_dir / (shape.name + ".obj"), rec.mesh);
  }
  return metrics::summarize(method, std::move(scores), config.metrics);
}

}  // namespace sculptor::trainer
