#include "sculptor/trainer/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "sculptor/error.hpp"

namespace sculptor::trainer {

namespace fs = std::filesystem;

std::vector<metrics::EvalReport> ExperimentResult::reports() const {
  std::vector<metrics::EvalReport> out{pretrained};
  for (const auto& v : variants) out.push_back(v.report);
  return out;
}

const VariantResult& ExperimentResult::variant(const std::string& name) const {
  for (const auto& v : variants) {
    if (v.name == name) return v;
  }
  throw std::out_of_range("experiment has no variant '" + name + "'");
}

std::uint64_t model_seed(const RunConfig& config) { return derive_seed(config.seed, 4); }

void copy_parameters(const ad::ParameterSet& from, ad::ParameterSet& to) {
  if (from.size() != to.size()) throw ShapeError("copy_parameters: parameter counts differ");
  for (std::size_t i = 0; i < from.size(); ++i) {
    const auto& src = from.items()[i];
    auto& dst = to.items()[i];
    if (src.name != dst.name || src.value.rows() != dst.value.rows() || src.value.cols() != dst.value.cols()) {
      throw ShapeError("copy_parameters: mismatch at " + src.name + " vs " + dst.name);
    }
    dst.value.mutable_value() = src.value.value();
  }
}

namespace {

void write_metrics(const fs::path& dir, const ExperimentResult& result) {
  const auto reports = result.reports();
  std::ofstream csv(dir / "metrics.csv");
  metrics::write_csv(csv, reports);
  std::ofstream table(dir / "metrics.txt");
  metrics::write_table(table, reports);
}

}  // namespace

ExperimentResult run_experiment(const RunConfig& config, std::ostream* log) {
  config.validate();
  const fs::path out = config.output_dir;
  const bool persist = !config.output_dir.empty();
  if (persist) {
    fs::create_directories(out / "checkpoints");
    fs::create_directories(out / "logs");
    save_config(out / "config.json", config);
  }

  const Datasets datasets = build_datasets(config);
  if (persist) write_datasets(out / "dataset", datasets);
  const TrainingData data = split_datasets(datasets, config.model.resolution);
  const SourceData source = prepare_source(data.source, config);

  ExperimentResult result;
  model::ModelConfig base_model = config.model;
  model::OccupancyModel pretrained(base_model, model_seed(config));
  {
    std::ofstream file;
    if (persist) file.open(out / "logs" / "pretrain.log");
    std::ostream* sink = persist ? static_cast<std::ostream*>(&file) : log;
    result.pretrain = pretrain_source(pretrained, data.source, source, config, sink);
  }
  if (log) {
    const auto& last = result.pretrain.epochs.back();
    *log << "pretrained: " << last.epoch << " epochs, held-out source accuracy " << last.accuracy << '\n';
  }
  if (persist) pretrained.save(out / "checkpoints" / "pretrained.ckpt");
  result.pretrained =
      evaluate("pretrained", pretrained, data.test, config, persist ? out / "meshes" / "pretrained" : fs::path{});
  if (persist) write_metrics(out, result);

  const EvalShape* monitor = data.test.empty() ? nullptr : &data.test.front();
  for (const std::string& name : config.variants) {
    const adapt::AblationFlags flags = merge_flags(config.ablation, variant_flags(name));
    model::OccupancyModel adapted(base_model, model_seed(config));
    copy_parameters(pretrained.parameters(), adapted.parameters());
    VariantResult v;
    v.name = name;
    {
      std::ofstream file;
      if (persist) file.open(out / "logs" / (name + ".log"));
      v.log = adapt_model(adapted, data.source, source, data.target, config, flags, monitor,
                          persist ? static_cast<std::ostream*>(&file) : nullptr);
    }
    if (persist) {
      std::ofstream csv(out / "logs" / (name + ".csv"));
      write_train_log_csv(csv, v.log);
      adapted.save(out / "checkpoints" / (name + ".ckpt"));
    }
    v.report = evaluate(name, adapted, data.test, config, persist ? out / "meshes" / name : fs::path{});
    if (log) *log << name << ": P2S " << v.report.p2s << " CD " << v.report.cd << " failures " << v.report.failures << '\n';
    result.variants.push_back(std::move(v));
    if (persist) write_metrics(out, result);
  }
  return result;
}

}  // namespace sculptor::trainer
