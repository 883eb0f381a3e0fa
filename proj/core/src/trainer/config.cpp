#include "sculptor/trainer/config.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

#include "sculptor/error.hpp"

namespace sculptor::trainer {

using nlohmann::json;

namespace {

// Reads key into value when present, and records that the key was consumed.
template <typename T>
void read(const json& j, const char* key, T& value, std::vector<std::string>& seen) {
  seen.emplace_back(key);
  if (j.contains(key)) value = j.at(key).get<T>();
}

void reject_unknown(const json& j, const std::vector<std::string>& seen, const std::string& section) {
  for (const auto& [key, _] : j.items()) {
    if (std::find(seen.begin(), seen.end(), key) == seen.end()) {
      throw std::invalid_argument("unknown config key '" + (section.empty() ? key : section + "." + key) + "'");
    }
  }
}

json dataset_json(const DatasetConfig& c) {
  return {{"source_train", c.source_train}, {"target_train", c.target_train}, {"target_test", c.target_test},
          {"mesh_resolution", c.mesh_resolution}};
}

json sampling_json(const geometry::SamplingOptions& c) {
  return {{"count", c.count}, {"surface_sigma", c.surface_sigma}, {"uniform_ratio", c.uniform_ratio}};
}

json model_json(const model::ModelConfig& c) {
  return {{"channels", c.channels},       {"levels", c.levels},           {"decoder_widths", c.decoder_widths},
          {"resolution", c.resolution},   {"leaky_slope", c.leaky_slope}, {"last_level_only", c.last_level_only}};
}

json train_json(const TrainConfig& c) {
  return {{"batch_source", c.batch_source},
          {"batch_target", c.batch_target},
          {"meshes_per_step", c.meshes_per_step},
          {"learning_rate", c.learning_rate},
          {"rms_decay", c.rms_decay},
          {"rms_epsilon", c.rms_epsilon},
          {"pretrain_max_epochs", c.pretrain_max_epochs},
          {"pretrain_steps_per_epoch", c.pretrain_steps_per_epoch},
          {"pretrain_target_accuracy", c.pretrain_target_accuracy},
          {"source_bank_per_mesh", c.source_bank_per_mesh},
          {"heldout_per_mesh", c.heldout_per_mesh},
          {"adapt_epochs", c.adapt_epochs},
          {"pool_per_mesh", c.pool_per_mesh},
          {"pool_refresh_interval", c.pool_refresh_interval},
          {"reference_per_mesh", c.reference_per_mesh},
          {"k", c.k},
          {"depth_scale", c.depth_scale},
          {"w1", c.w1},
          {"w2", c.w2},
          {"start_epoch", c.start_epoch},
          {"epoch_total", c.epoch_total},
          {"sigma", c.sigma},
          {"freeze_decoder", c.freeze_decoder},
          {"monitor_every", c.monitor_every},
          {"monitor_resolution", c.monitor_resolution}};
}

json ablation_json(const adapt::AblationFlags& c) {
  return {{"no_mmd", c.no_mmd},         {"no_source", c.no_source},       {"no_target", c.no_target},
          {"no_mi", c.no_mi},           {"no_multilevel", c.no_multilevel}, {"no_rescale", c.no_rescale}};
}

json to_json_value(const RunConfig& c) {
  return {{"seed", c.seed},
          {"dataset", dataset_json(c.dataset)},
          {"sampling", sampling_json(c.sampling)},
          {"model", model_json(c.model)},
          {"train", train_json(c.train)},
          {"ablation", ablation_json(c.ablation)},
          {"surface", {{"resolution", c.surface.resolution}, {"min_fraction", c.surface.min_fraction}}},
          {"metrics", {{"samples", c.metrics.samples}, {"seed", c.metrics.seed}}},
          {"variants", c.variants},
          {"output_dir", c.output_dir}};
}

RunConfig from_json_value(const json& j) {
  RunConfig c;
  std::vector<std::string> top;
  read(j, "seed", c.seed, top);
  read(j, "variants", c.variants, top);
  read(j, "output_dir", c.output_dir, top);
  auto section = [&](const char* name, auto&& fill) {
    top.emplace_back(name);
    if (!j.contains(name)) return;
    const json& s = j.at(name);
    if (!s.is_object()) throw std::invalid_argument(std::string("config section '") + name + "' must be an object");
    std::vector<std::string> seen;
    fill(s, seen);
    reject_unknown(s, seen, name);
  };
  section("dataset", [&](const json& s, auto& seen) {
    read(s, "source_train", c.dataset.source_train, seen);
    read(s, "target_train", c.dataset.target_train, seen);
    read(s, "target_test", c.dataset.target_test, seen);
    read(s, "mesh_resolution", c.dataset.mesh_resolution, seen);
  });
  section("sampling", [&](const json& s, auto& seen) {
    read(s, "count", c.sampling.count, seen);
    read(s, "surface_sigma", c.sampling.surface_sigma, seen);
    read(s, "uniform_ratio", c.sampling.uniform_ratio, seen);
  });
  section("model", [&](const json& s, auto& seen) {
    read(s, "channels", c.model.channels, seen);
    read(s, "levels", c.model.levels, seen);
    read(s, "decoder_widths", c.model.decoder_widths, seen);
    read(s, "resolution", c.model.resolution, seen);
    read(s, "leaky_slope", c.model.leaky_slope, seen);
    read(s, "last_level_only", c.model.last_level_only, seen);
  });
  section("train", [&](const json& s, auto& seen) {
    TrainConfig& t = c.train;
    read(s, "batch_source", t.batch_source, seen);
    read(s, "batch_target", t.batch_target, seen);
    read(s, "meshes_per_step", t.meshes_per_step, seen);
    read(s, "learning_rate", t.learning_rate, seen);
    read(s, "rms_decay", t.rms_decay, seen);
    read(s, "rms_epsilon", t.rms_epsilon, seen);
    read(s, "pretrain_max_epochs", t.pretrain_max_epochs, seen);
    read(s, "pretrain_steps_per_epoch", t.pretrain_steps_per_epoch, seen);
    read(s, "pretrain_target_accuracy", t.pretrain_target_accuracy, seen);
    read(s, "source_bank_per_mesh", t.source_bank_per_mesh, seen);
    read(s, "heldout_per_mesh", t.heldout_per_mesh, seen);
    read(s, "adapt_epochs", t.adapt_epochs, seen);
    read(s, "pool_per_mesh", t.pool_per_mesh, seen);
    read(s, "pool_refresh_interval", t.pool_refresh_interval, seen);
    read(s, "reference_per_mesh", t.reference_per_mesh, seen);
    read(s, "k", t.k, seen);
    read(s, "depth_scale", t.depth_scale, seen);
    read(s, "w1", t.w1, seen);
    read(s, "w2", t.w2, seen);
    read(s, "start_epoch", t.start_epoch, seen);
    read(s, "epoch_total", t.epoch_total, seen);
    if (s.contains("sigma") && s.at("sigma").is_number()) {
      seen.emplace_back("sigma");
      std::ostringstream os;
      os.precision(17);
      os << s.at("sigma").get<double>();
      t.sigma = os.str();
    } else {
      read(s, "sigma", t.sigma, seen);
    }
    read(s, "freeze_decoder", t.freeze_decoder, seen);
    read(s, "monitor_every", t.monitor_every, seen);
    read(s, "monitor_resolution", t.monitor_resolution, seen);
  });
  section("ablation", [&](const json& s, auto& seen) {
    read(s, "no_mmd", c.ablation.no_mmd, seen);
    read(s, "no_source", c.ablation.no_source, seen);
    read(s, "no_target", c.ablation.no_target, seen);
    read(s, "no_mi", c.ablation.no_mi, seen);
    read(s, "no_multilevel", c.ablation.no_multilevel, seen);
    read(s, "no_rescale", c.ablation.no_rescale, seen);
  });
  section("surface", [&](const json& s, auto& seen) {
    read(s, "resolution", c.surface.resolution, seen);
    read(s, "min_fraction", c.surface.min_fraction, seen);
  });
  section("metrics", [&](const json& s, auto& seen) {
    read(s, "samples", c.metrics.samples, seen);
    read(s, "seed", c.metrics.seed, seen);
  });
  reject_unknown(j, top, "");
  c.validate();
  return c;
}

}  // namespace

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("invalid config: " + what);
  };
  require(dataset.source_train > 0 && dataset.target_train > 0 && dataset.target_test > 0, "dataset sizes must be > 0");
  require(sampling.count > 0, "sampling.count must be > 0");
  require(sampling.uniform_ratio >= 0.0 && sampling.uniform_ratio <= 1.0, "sampling.uniform_ratio must be in [0, 1]");
  require(train.meshes_per_step > 0, "train.meshes_per_step must be > 0");
  require(train.batch_source >= train.meshes_per_step && train.batch_target >= train.meshes_per_step,
          "batches must hold at least one point per mesh");
  require(train.batch_source / train.meshes_per_step <= train.source_bank_per_mesh,
          "train.source_bank_per_mesh smaller than the per-mesh source batch");
  require(train.batch_target / train.meshes_per_step <= train.pool_per_mesh,
          "train.pool_per_mesh smaller than the per-mesh target batch");
  require(train.reference_per_mesh <= train.source_bank_per_mesh, "train.reference_per_mesh exceeds the bank");
  require(train.k >= 1 && static_cast<std::size_t>(train.k) <= train.reference_per_mesh * dataset.source_train,
          "train.k must be in [1, reference set size]");
  require(train.learning_rate > 0.0, "train.learning_rate must be > 0");
  require(train.epoch_total > 0, "train.epoch_total must be > 0");
  require(train.pool_refresh_interval > 0, "train.pool_refresh_interval must be > 0");
  require(train.adapt_epochs >= 0 && train.pretrain_max_epochs >= 0, "epoch counts must be >= 0");
  if (train.sigma != "median") {
    double v = 0.0;
    try {
      v = std::stod(train.sigma);
    } catch (const std::exception&) {
      require(false, "train.sigma must be \"median\" or a positive number");
    }
    require(v > 0.0, "train.sigma must be positive");
  }
  require(surface.resolution >= 16, "surface.resolution must be >= 16");
  require(surface.min_fraction >= 0.0 && surface.min_fraction <= 1.0, "surface.min_fraction must be in [0, 1]");
  require(metrics.samples >= 1000, "metrics.samples must be >= 1000");
  for (const auto& v : variants) variant_flags(v);
}

std::string to_json(const RunConfig& config) { return to_json_value(config).dump(2); }

RunConfig from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  try {
    return from_json_value(j);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config value has the wrong type: ") + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void save_config(const std::filesystem::path& path, const RunConfig& config) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config " + path.string());
  out << to_json(config) << '\n';
}

void apply_overrides(RunConfig& config, const std::vector<std::string>& assignments) {
  json j = to_json_value(config);
  for (const std::string& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) throw std::invalid_argument("override must look like key=value: " + a);
    std::string pointer = "/" + a.substr(0, eq);
    std::replace(pointer.begin(), pointer.end(), '.', '/');
    const std::string raw = a.substr(eq + 1);
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::exception&) {
      value = raw;
    }
    const json::json_pointer ptr(pointer);
    if (!j.contains(ptr)) throw std::invalid_argument("unknown config key '" + a.substr(0, eq) + "'");
    if (j[ptr].is_string() && !value.is_string()) value = raw;  // e.g. train.sigma=0.5
    j[ptr] = value;
  }
  config = from_json(j.dump());
}

adapt::AblationFlags variant_flags(const std::string& variant) {
  adapt::AblationFlags f;
  if (variant == "adapted") return f;
  if (variant == "no_mmd") f.no_mmd = true;
  else if (variant == "no_source") f.no_source = true;
  else if (variant == "no_target") f.no_target = true;
  else if (variant == "no_mi") f.no_mi = true;
  else if (variant == "no_multilevel") f.no_multilevel = true;
  else if (variant == "no_rescale") f.no_rescale = true;
  else throw std::invalid_argument("unknown variant '" + variant + "'");
  return f;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  // splitmix64 finalizer over the combined key
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1) + 0xBF58476D1CE4E5B9ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace sculptor::trainer
