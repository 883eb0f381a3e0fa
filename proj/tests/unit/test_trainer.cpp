#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>
#include <stdexcept>
#include <type_traits>

#include "oracles.hpp"
#include "small_config.hpp"
#include "sculptor/error.hpp"
#include "sculptor/geometry/winding.hpp"
#include "sculptor/metrics/metrics.hpp"
#include "sculptor/trainer/config.hpp"
#include "sculptor/trainer/domain.hpp"
#include "sculptor/trainer/experiment.hpp"
#include "sculptor/trainer/trainer.hpp"

namespace geo = sculptor::geometry;
namespace tr = sculptor::trainer;

namespace {

template <typename T>
concept HasLabel = requires(T t) { t.label; };
template <typename T>
concept HasOccupancy = requires(T t) { t.occupancy; };
template <typename T>
concept ExposesMesh = requires(const T& t) { t.mesh(); };
template <typename T>
concept ExposesLabeledSampling =
    requires(const T& t, const geo::SamplingOptions& o) { t.sample_labeled(o, std::uint64_t{0}); };

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "sculptor_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

struct Pipeline {
  tr::RunConfig config;
  tr::Datasets data;
  tr::TrainingData split;
  tr::SourceData source;

  explicit Pipeline(tr::RunConfig c) : config(std::move(c)) {
    data = tr::build_datasets(config);
    split = tr::split_datasets(data, config.model.resolution);
    source = tr::prepare_source(split.source, config);
  }
};

}  // namespace

// ---- configuration -------------------------------------------------------

TEST(Config, JsonRoundTrip) {
  tr::RunConfig c = testcfg::tiny(7);
  c.variants = {"adapted", "no_mmd"};
  c.train.sigma = "0.75";
  c.ablation.no_mi = true;
  const std::string text = tr::to_json(c);
  const tr::RunConfig back = tr::from_json(text);
  EXPECT_EQ(tr::to_json(back), text);
  EXPECT_EQ(back.seed, 7u);
  EXPECT_EQ(back.variants, c.variants);
  EXPECT_TRUE(back.ablation.no_mi);
}

TEST(Config, DefaultsMatchDocumentedValues) {
  const tr::RunConfig c;
  EXPECT_EQ(c.dataset.source_train, 3u);
  EXPECT_EQ(c.dataset.target_train, 20u);
  EXPECT_EQ(c.dataset.target_test, 8u);
  EXPECT_EQ(c.train.k, 8);
  EXPECT_EQ(c.train.depth_scale, 256.0);
  EXPECT_EQ(c.train.w1, 5.0);
  EXPECT_EQ(c.train.w2, 2.0);
  EXPECT_EQ(c.train.start_epoch, 30);
  EXPECT_EQ(c.train.epoch_total, 60);
  EXPECT_EQ(c.train.adapt_epochs, 90);
  EXPECT_EQ(c.train.learning_rate, 1e-3);
  EXPECT_EQ(c.train.batch_source, 512u);
  EXPECT_EQ(c.train.batch_target, 512u);
  EXPECT_EQ(c.surface.resolution, 128);
  EXPECT_EQ(c.surface.min_fraction, 0.05);
  EXPECT_EQ(c.metrics.samples, 10000u);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, PartialDocumentKeepsDefaults) {
  const auto c = tr::from_json(R"({"seed": 3, "train": {"k": 4}})");
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.train.k, 4);
  EXPECT_EQ(c.train.w1, 5.0);
}

TEST(Config, RejectsUnknownKeysAndBadTypes) {
  EXPECT_THROW(tr::from_json(R"({"sead": 3})"), std::invalid_argument);
  EXPECT_THROW(tr::from_json(R"({"train": {"kk": 3}})"), std::invalid_argument);
  EXPECT_THROW(tr::from_json(R"({"train": {"k": "eight"}})"), std::invalid_argument);
  EXPECT_THROW(tr::from_json(R"({"train": 3})"), std::invalid_argument);
  EXPECT_THROW(tr::from_json("[1, 2]"), std::invalid_argument);
  EXPECT_THROW(tr::from_json("{not json"), std::invalid_argument);
}

TEST(Config, Overrides) {
  tr::RunConfig c;
  tr::apply_overrides(c, {"train.k=4", "variants=[\"adapted\",\"no_mmd\"]", "train.sigma=0.5", "seed=11",
                          "ablation.no_rescale=true"});
  EXPECT_EQ(c.train.k, 4);
  EXPECT_EQ(c.variants, (std::vector<std::string>{"adapted", "no_mmd"}));
  EXPECT_EQ(c.train.sigma, "0.5");
  EXPECT_EQ(c.seed, 11u);
  EXPECT_TRUE(c.ablation.no_rescale);
  EXPECT_THROW(tr::apply_overrides(c, {"train.kk=4"}), std::invalid_argument);
  EXPECT_THROW(tr::apply_overrides(c, {"train.k"}), std::invalid_argument);
}

TEST(Config, Validation) {
  auto bad = [](auto mutate) {
    tr::RunConfig c;
    mutate(c);
    return c;
  };
  EXPECT_THROW(bad([](auto& c) { c.train.k = 0; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](auto& c) { c.train.sigma = "wide"; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](auto& c) { c.train.sigma = "-1"; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](auto& c) { c.surface.resolution = 8; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](auto& c) { c.metrics.samples = 999; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](auto& c) { c.variants = {"no_everything"}; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](auto& c) { c.train.learning_rate = 0.0; }).validate(), std::invalid_argument);
}

TEST(Config, FileRoundTrip) {
  const auto dir = scratch("config");
  const auto c = testcfg::tiny(5);
  tr::save_config(dir / "c.json", c);
  EXPECT_EQ(tr::to_json(tr::load_config(dir / "c.json")), tr::to_json(c));
  EXPECT_THROW(tr::load_config(dir / "missing.json"), sculptor::IoError);
}

TEST(Config, VariantFlags) {
  EXPECT_FALSE(tr::variant_flags("adapted").no_mmd);
  EXPECT_TRUE(tr::variant_flags("no_mmd").no_mmd);
  EXPECT_TRUE(tr::variant_flags("no_source").no_source);
  EXPECT_TRUE(tr::variant_flags("no_multilevel").no_multilevel);
  EXPECT_THROW(tr::variant_flags("bogus"), std::invalid_argument);
  const auto m = tr::merge_flags({.no_mi = true}, {.no_mmd = true});
  EXPECT_TRUE(m.no_mi);
  EXPECT_TRUE(m.no_mmd);
  EXPECT_FALSE(m.no_source);
}

TEST(Seeds, DeriveSeedIsStableAndSpreads) {
  EXPECT_EQ(tr::derive_seed(1, 2, 3), tr::derive_seed(1, 2, 3));
  std::set<std::uint64_t> seen;
  for (std::uint64_t base = 0; base < 5; ++base)
    for (std::uint64_t stream = 0; stream < 5; ++stream)
      for (std::uint64_t index = 0; index < 5; ++index) seen.insert(tr::derive_seed(base, stream, index));
  EXPECT_EQ(seen.size(), 125u);
}

// ---- unsupervised contract -----------------------------------------------

TEST(Contract, TargetTypesCarryNoLabels) {
  static_assert(!HasLabel<geo::QueryPoint>);
  static_assert(!HasOccupancy<geo::QueryPoint>);
  static_assert(HasLabel<geo::LabeledPoint>);
  static_assert(sizeof(geo::QueryPoint) == sizeof(geo::Vec3));
  static_assert(!ExposesMesh<tr::UnlabeledShape>);
  static_assert(!ExposesLabeledSampling<tr::UnlabeledShape>);
  static_assert(ExposesMesh<tr::LabeledShape>);
  static_assert(ExposesLabeledSampling<tr::LabeledShape>);
  static_assert(std::is_same_v<decltype(std::declval<const tr::UnlabeledShape&>().sample_queries(
                                   geo::SamplingOptions{}, 0)),
                               std::vector<geo::QueryPoint>>);
  SUCCEED();
}

TEST(Contract, LabelingThrowsInsideForbiddenScope) {
  const auto cube = oracle::cube(0.3);
  const geo::WindingNumber wn(cube);
  const std::vector<geo::QueryPoint> q = {{geo::Vec3::Zero()}};
  EXPECT_NO_THROW(geo::label_points(wn, q));
  {
    geo::LabelingForbiddenScope scope;
    EXPECT_TRUE(geo::labeling_forbidden());
    EXPECT_THROW(geo::label_points(wn, q), sculptor::UnsupervisedContractError);
    EXPECT_THROW(geo::sample_labeled_points(cube, {}, 1), sculptor::UnsupervisedContractError);
    const tr::LabeledShape shape("s", cube, 32);
    EXPECT_THROW(shape.sample_labeled({}, 1), sculptor::UnsupervisedContractError);
  }
  EXPECT_FALSE(geo::labeling_forbidden());
}

TEST(Contract, AdaptationRunsWithLabelingForbidden) {
  // Labels drawn before adaptation stay usable; a labeling attempt inside the
  // loop would surface as UnsupervisedContractError from adapt_model.
  Pipeline p(testcfg::tiny(1));
  sculptor::model::OccupancyModel model(p.config.model, tr::model_seed(p.config));
  EXPECT_NO_THROW(tr::adapt_model(model, p.split.source, p.source, p.split.target, p.config, {}));
  EXPECT_FALSE(geo::labeling_forbidden());
}

// ---- datasets ------------------------------------------------------------

TEST(Datasets, CountsAndRoundTrip) {
  const auto c = testcfg::tiny(2);
  const auto data = tr::build_datasets(c);
  ASSERT_EQ(data.meshes.size(), 5u);
  ASSERT_EQ(data.manifest.size(), 5u);
  std::size_t src = 0, tgt_train = 0, tgt_test = 0;
  std::set<std::string> names;
  for (const auto& e : data.manifest) {
    names.insert(e.name);
    if (e.family == geo::Family::source) ++src;
    else if (e.split == "train") ++tgt_train;
    else ++tgt_test;
  }
  EXPECT_EQ(src, 2u);
  EXPECT_EQ(tgt_train, 2u);
  EXPECT_EQ(tgt_test, 1u);
  EXPECT_EQ(names.size(), 5u);

  const auto dir = scratch("datasets");
  tr::write_datasets(dir, data);
  const auto back = tr::read_datasets(dir);
  ASSERT_EQ(back.meshes.size(), data.meshes.size());
  for (std::size_t i = 0; i < data.meshes.size(); ++i) {
    EXPECT_EQ(back.manifest[i].name, data.manifest[i].name);
    EXPECT_EQ(back.manifest[i].seed, data.manifest[i].seed);
    EXPECT_EQ(back.meshes[i].faces, data.meshes[i].faces);
    ASSERT_EQ(back.meshes[i].vertices.size(), data.meshes[i].vertices.size());
    for (std::size_t v = 0; v < data.meshes[i].vertices.size(); ++v)
      EXPECT_NEAR((back.meshes[i].vertices[v] - data.meshes[i].vertices[v]).norm(), 0.0, 1e-9);
  }
  EXPECT_THROW(tr::read_datasets(dir / "absent"), sculptor::IoError);
}

TEST(Datasets, SplitRoles) {
  const auto c = testcfg::tiny(3);
  const auto split = tr::split_datasets(tr::build_datasets(c), c.model.resolution);
  EXPECT_EQ(split.source.size(), 2u);
  EXPECT_EQ(split.target.size(), 2u);
  EXPECT_EQ(split.test.size(), 1u);
  for (const auto& t : split.target) {
    const auto q = t.sample_queries(c.sampling, 1);
    EXPECT_EQ(q.size(), c.sampling.count);
    EXPECT_EQ(t.raster().resolution, c.model.resolution);
  }
}

// ---- training ------------------------------------------------------------

TEST(Training, ScheduleLoggedEveryEpoch) {
  Pipeline p(testcfg::tiny(4));
  sculptor::model::OccupancyModel model(p.config.model, tr::model_seed(p.config));
  const auto log = tr::adapt_model(model, p.split.source, p.source, p.split.target, p.config, {});
  ASSERT_EQ(log.epochs.size(), 8u);
  for (std::size_t i = 0; i < log.epochs.size(); ++i) {
    const auto& r = log.epochs[i];
    const double m = std::clamp((r.epoch - 2) / 4.0, 0.0, 1.0);
    EXPECT_EQ(r.epoch, static_cast<int>(i) + 1);
    EXPECT_EQ(r.momentum, m);
    EXPECT_EQ(r.loss.w3, m);
    EXPECT_EQ(r.loss.w4, m);
    EXPECT_EQ(r.loss.w1, 5.0);
    EXPECT_EQ(r.loss.w2, 2.0);
    EXPECT_TRUE(std::isfinite(r.loss.total));
  }
  std::ostringstream csv;
  tr::write_train_log_csv(csv, log);
  const std::string text = csv.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 9);
}

TEST(Training, AblationWeightsLogged) {
  Pipeline p(testcfg::tiny(4));
  sculptor::model::OccupancyModel model(p.config.model, tr::model_seed(p.config));
  const auto log = tr::adapt_model(model, p.split.source, p.source, p.split.target, p.config,
                                   {.no_mmd = true, .no_mi = true});
  for (const auto& r : log.epochs) {
    EXPECT_EQ(r.loss.w1, 0.0);
    EXPECT_EQ(r.loss.sim, 0.0);
    EXPECT_EQ(r.loss.w4, 0.0);
    EXPECT_EQ(r.loss.mi, 0.0);
  }
}

TEST(Training, PretrainAndAdaptDeterministic) {
  auto run = [] {
    Pipeline p(testcfg::tiny(6));
    sculptor::model::OccupancyModel model(p.config.model, tr::model_seed(p.config));
    const auto pre = tr::pretrain_source(model, p.split.source, p.source, p.config);
    const auto log = tr::adapt_model(model, p.split.source, p.source, p.split.target, p.config, {});
    return std::make_pair(pre, log);
  };
  const auto a = run();
  const auto b = run();
  ASSERT_EQ(a.first.epochs.size(), b.first.epochs.size());
  for (std::size_t i = 0; i < a.first.epochs.size(); ++i) EXPECT_EQ(a.first.epochs[i].loss, b.first.epochs[i].loss);
  ASSERT_EQ(a.second.epochs.size(), b.second.epochs.size());
  for (std::size_t i = 0; i < a.second.epochs.size(); ++i) {
    EXPECT_EQ(a.second.epochs[i].loss.total, b.second.epochs[i].loss.total);
    EXPECT_EQ(a.second.epochs[i].loss.sim, b.second.epochs[i].loss.sim);
  }
}

TEST(Training, PretrainReducesSourceLoss) {
  auto c = testcfg::tiny(8);
  c.train.pretrain_max_epochs = 12;
  c.train.pretrain_target_accuracy = 1.1;  // run every epoch
  Pipeline p(c);
  sculptor::model::OccupancyModel model(c.model, tr::model_seed(c));
  const auto pre = tr::pretrain_source(model, p.split.source, p.source, c);
  ASSERT_EQ(pre.epochs.size(), 12u);
  EXPECT_FALSE(pre.reached_target);
  EXPECT_LT(pre.epochs.back().loss, pre.epochs.front().loss);
  EXPECT_GT(pre.epochs.back().accuracy, 0.5);
}

// ---- reconstruction ------------------------------------------------------

TEST(Reconstruct, UntrainedModelFlagsEmptySurface) {
  const auto c = testcfg::tiny(9);
  const auto split = tr::split_datasets(tr::build_datasets(c), c.model.resolution);
  sculptor::model::OccupancyModel model(c.model, 9);
  model.decoder().zero();
  const auto r = tr::reconstruct(model, split.test.front().raster, 32, 0.05);
  EXPECT_TRUE(r.empty);
  EXPECT_TRUE(r.failed);
  EXPECT_TRUE(r.mesh.empty());
  const auto report = tr::evaluate("untrained", model, split.test, c);
  EXPECT_EQ(report.failures, 1u);
  EXPECT_EQ(report.cd, sculptor::metrics::kFailurePenalty);
}

TEST(Reconstruct, ResolutionConsistency) {
  auto c = testcfg::tiny(10);
  c.train.pretrain_max_epochs = 60;
  c.train.pretrain_target_accuracy = 1.1;
  Pipeline p(c);
  sculptor::model::OccupancyModel model(c.model, tr::model_seed(c));
  tr::pretrain_source(model, p.split.source, p.source, c);
  const auto& input = p.split.source.front().raster();
  const auto coarse = tr::reconstruct(model, input, 32, 0.05);
  const auto fine = tr::reconstruct(model, input, 128, 0.05);
  ASSERT_FALSE(coarse.empty);
  ASSERT_FALSE(fine.empty);
  EXPECT_TRUE(fine.watertight);
  EXPECT_EQ(fine.failed, !fine.watertight);
  EXPECT_LT(sculptor::metrics::chamfer(coarse.mesh, fine.mesh), 0.05);
}

TEST(Experiment, WritesOutputsAndReportsRows) {
  auto c = testcfg::tiny(12);
  c.variants = {"adapted", "no_mmd"};
  c.output_dir = scratch("experiment").string();
  const auto result = tr::run_experiment(c);
  const auto rows = result.reports();
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].method, "pretrained");
  EXPECT_EQ(rows[1].method, "adapted");
  EXPECT_EQ(rows[2].method, "no_mmd");
  EXPECT_NO_THROW(result.variant("no_mmd"));
  EXPECT_THROW(result.variant("no_mi"), std::out_of_range);
  const std::filesystem::path out = c.output_dir;
  EXPECT_TRUE(std::filesystem::exists(out / "config.json"));
  EXPECT_TRUE(std::filesystem::exists(out / "metrics.csv"));
  EXPECT_TRUE(std::filesystem::exists(out / "metrics.txt"));
}
