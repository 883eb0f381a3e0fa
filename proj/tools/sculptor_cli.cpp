// Command-line front end: dataset generation, training, reconstruction,
// evaluation, gradient checks and end-to-end experiments.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "sculptor/error.hpp"
#include "sculptor/geometry/mesh_io.hpp"
#include "sculptor/runtime.hpp"
#include "sculptor/trainer/config.hpp"
#include "sculptor/trainer/experiment.hpp"
#include "sculptor/trainer/gradcheck.hpp"
#include "sculptor/trainer/trainer.hpp"

namespace fs = std::filesystem;
using namespace sculptor;

namespace {

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::int64_t seed = -1;
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("-c,--config", o.config_path, "JSON run configuration");
  app->add_option("--set", o.overrides, "Override a config key, e.g. --set train.adapt_epochs=30");
  app->add_option("--seed", o.seed, "Override the run seed");
}

trainer::RunConfig resolve(const CommonOptions& o) {
  trainer::RunConfig config = o.config_path.empty() ? trainer::RunConfig{} : trainer::load_config(o.config_path);
  trainer::apply_overrides(config, o.overrides);
  if (o.seed >= 0) config.seed = static_cast<std::uint64_t>(o.seed);
  config.validate();
  return config;
}

trainer::TrainingData load_data(const std::string& dir, const trainer::RunConfig& config) {
  return trainer::split_datasets(trainer::read_datasets(dir), config.model.resolution);
}

}  // namespace

int main(int argc, char** argv) {
  sculptor::tune_allocator();
  CLI::App app{"Single-view occupancy reconstruction with unsupervised domain adaptation"};
  app.require_subcommand(1);

  CommonOptions common;

  auto* dataset = app.add_subcommand("dataset", "Generate the synthetic source/target meshes and a manifest");
  add_common(dataset, common);
  std::string dataset_out;
  dataset->add_option("-o,--out", dataset_out, "Output directory")->required();

  auto* pretrain = app.add_subcommand("pretrain", "Supervised pretraining on the source meshes");
  add_common(pretrain, common);
  std::string data_dir, checkpoint_out, log_path;
  pretrain->add_option("-d,--data", data_dir, "Dataset directory written by `dataset`")->required();
  pretrain->add_option("-o,--out", checkpoint_out, "Checkpoint to write")->required();
  pretrain->add_option("--log", log_path, "Training log file (default: stdout)");

  auto* adapt = app.add_subcommand("adapt", "Unsupervised adaptation to the target training meshes");
  add_common(adapt, common);
  std::string checkpoint_in, variant = "adapted", csv_path;
  adapt->add_option("-d,--data", data_dir, "Dataset directory")->required();
  adapt->add_option("-m,--checkpoint", checkpoint_in, "Pretrained checkpoint")->required();
  adapt->add_option("-o,--out", checkpoint_out, "Adapted checkpoint to write")->required();
  adapt->add_option("--variant", variant, "adapted | no_mmd | no_source | no_target | no_mi | no_multilevel | no_rescale");
  adapt->add_option("--log", log_path, "Training log file (default: stdout)");
  adapt->add_option("--csv", csv_path, "Per-epoch CSV log");

  auto* reconstruct = app.add_subcommand("reconstruct", "Extract a mesh from a checkpoint and one input view");
  add_common(reconstruct, common);
  std::string mesh_in, mask_in, depth_in, mesh_out, dump_prefix;
  int resolution = 0;
  reconstruct->add_option("-m,--checkpoint", checkpoint_in, "Model checkpoint")->required();
  auto* mesh_opt = reconstruct->add_option("--mesh", mesh_in, "Mesh to rasterize as the input view (OBJ/PLY)");
  auto* mask_opt = reconstruct->add_option("--mask", mask_in, "Mask PGM (with --depth) as the input view");
  reconstruct->add_option("--depth", depth_in, "Depth PGM")->needs(mask_opt);
  mask_opt->excludes(mesh_opt);
  reconstruct->add_option("-o,--out", mesh_out, "Output mesh (.obj or .ply)")->required();
  reconstruct->add_option("-g,--grid", resolution, "Grid resolution (default: surface.resolution)");
  reconstruct->add_option("--dump-raster", dump_prefix, "Write <prefix>_mask.pgm and <prefix>_depth.pgm");

  auto* eval = app.add_subcommand("eval", "Reconstruct the test meshes and report P2S / CD");
  add_common(eval, common);
  std::vector<std::string> models;
  std::string table_csv, mesh_dir;
  eval->add_option("-d,--data", data_dir, "Dataset directory")->required();
  eval->add_option("--model", models, "name=checkpoint (repeatable)")->required();
  eval->add_option("--csv", table_csv, "Write per-mesh CSV here");
  eval->add_option("--meshes", mesh_dir, "Write reconstructions under <dir>/<name>/");

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of every loss term");
  int seeds = 10;
  std::size_t points = 16;
  std::uint64_t first_seed = 0;
  double tolerance = 1e-3;
  double step = trainer::LossGradCheckOptions{}.step;
  gradcheck->add_option("--seeds", seeds, "Number of random seeds");
  gradcheck->add_option("--first-seed", first_seed, "First seed");
  gradcheck->add_option("--points", points, "Points per domain");
  gradcheck->add_option("--tolerance", tolerance, "Maximum relative error");
  gradcheck->add_option("--step", step, "Central-difference step");

  auto* experiment = app.add_subcommand("experiment", "Dataset, pretraining, adaptation variants and evaluation");
  add_common(experiment, common);
  std::string experiment_out;
  experiment->add_option("-o,--out", experiment_out, "Output directory (overrides output_dir)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*dataset) {
      const auto config = resolve(common);
      const auto data = trainer::build_datasets(config);
      trainer::write_datasets(dataset_out, data);
      trainer::save_config(fs::path(dataset_out) / "config.json", config);
      std::cout << "wrote " << data.meshes.size() << " meshes to " << dataset_out << '\n';
    } else if (*pretrain) {
      const auto config = resolve(common);
      const auto data = load_data(data_dir, config);
      const auto source = trainer::prepare_source(data.source, config);
      model::OccupancyModel model(config.model, trainer::model_seed(config));
      std::ofstream log_file;
      if (!log_path.empty()) log_file.open(log_path);
      const auto result =
          trainer::pretrain_source(model, data.source, source, config, log_path.empty() ? &std::cout : &log_file);
      model.save(checkpoint_out);
      std::cout << "pretrained for " << result.epochs.size() << " epochs, held-out accuracy "
                << result.epochs.back().accuracy << (result.reached_target ? "" : " (target not reached)") << '\n';
    } else if (*adapt) {
      const auto config = resolve(common);
      const auto data = load_data(data_dir, config);
      const auto source = trainer::prepare_source(data.source, config);
      model::OccupancyModel model(config.model, trainer::model_seed(config));
      model.load(checkpoint_in);
      const auto flags = trainer::merge_flags(config.ablation, trainer::variant_flags(variant));
      std::ofstream log_file;
      if (!log_path.empty()) log_file.open(log_path);
      const auto log = trainer::adapt_model(model, data.source, source, data.target, config, flags,
                                            data.test.empty() ? nullptr : &data.test.front(),
                                            log_path.empty() ? &std::cout : &log_file);
      if (!csv_path.empty()) {
        std::ofstream csv(csv_path);
        trainer::write_train_log_csv(csv, log);
      }
      model.save(checkpoint_out);
    } else if (*reconstruct) {
      const auto config = resolve(common);
      model::OccupancyModel model(config.model, trainer::model_seed(config));
      model.load(checkpoint_in);
      raster::RasterInput input;
      if (!mesh_in.empty()) {
        input = raster::rasterize(geometry::load_mesh(mesh_in), config.model.resolution);
      } else if (!mask_in.empty() && !depth_in.empty()) {
        input = raster::read_pgm_pair(mask_in, depth_in);
      } else {
        throw std::invalid_argument("reconstruct needs --mesh or --mask with --depth");
      }
      if (!dump_prefix.empty()) {
        raster::write_mask_pgm(dump_prefix + "_mask.pgm", input);
        raster::write_depth_pgm(dump_prefix + "_depth.pgm", input);
      }
      const int g = resolution > 0 ? resolution : config.surface.resolution;
      const auto rec = trainer::reconstruct(model, input, g, config.surface.min_fraction);
      if (rec.empty) {
        std::cerr << "reconstruction failed: no surface at the 0.5 level\n";
        return 2;
      }
      geometry::save_mesh(mesh_out, rec.mesh);
      std::cout << "wrote " << mesh_out << " (" << rec.mesh.faces.size() << " faces"
                << (rec.failed ? ", FAILED: not watertight after filtering" : "") << ")\n";
      return rec.failed ? 2 : 0;
    } else if (*eval) {
      const auto config = resolve(common);
      const auto data = load_data(data_dir, config);
      std::vector<metrics::EvalReport> reports;
      for (const std::string& spec : models) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("--model expects name=checkpoint, got " + spec);
        const std::string name = spec.substr(0, eq);
        model::OccupancyModel model(config.model, trainer::model_seed(config));
        model.load(spec.substr(eq + 1));
        reports.push_back(trainer::evaluate(name, model, data.test, config,
                                            mesh_dir.empty() ? fs::path{} : fs::path(mesh_dir) / name));
      }
      metrics::write_table(std::cout, reports);
      if (!table_csv.empty()) {
        std::ofstream csv(table_csv);
        metrics::write_csv(csv, reports);
      }
    } else if (*gradcheck) {
      bool ok = true;
      trainer::LossGradCheckOptions options;
      options.points = points;
      options.step = step;
      for (int s = 0; s < seeds; ++s) {
        for (const auto& r : trainer::check_loss_gradients(first_seed + static_cast<std::uint64_t>(s), options)) {
          const bool pass = r.max_relative_error < tolerance;
          ok = ok && pass;
          std::cout << (pass ? "PASS" : "FAIL") << " seed=" << r.seed << " term=" << r.term
                    << " max_rel_err=" << r.max_relative_error << " coords=" << r.coordinates << (pass ? "" : " worst: " + r.worst) << '\n';
        }
      }
      return ok ? 0 : 1;
    } else if (*experiment) {
      auto config = resolve(common);
      if (!experiment_out.empty()) config.output_dir = experiment_out;
      const auto result = trainer::run_experiment(config, &std::cout);
      metrics::write_table(std::cout, result.reports());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
