#include <benchmark/benchmark.h>

#include <random>

#include "sculptor/adapt/losses.hpp"
#include "sculptor/adapt/neighbours.hpp"
#include "sculptor/autodiff/tensor.hpp"
#include "sculptor/geometry/synthetic.hpp"
#include "sculptor/geometry/winding.hpp"
#include "sculptor/metrics/metrics.hpp"
#include "sculptor/model/model.hpp"
#include "sculptor/raster/raster.hpp"
#include "sculptor/runtime.hpp"
#include "sculptor/surface/grid.hpp"
#include "sculptor/surface/marching_cubes.hpp"

namespace ad = sculptor::ad;
namespace geo = sculptor::geometry;

namespace {

ad::Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  ad::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

const geo::TriMesh& source_mesh() {
  static const geo::TriMesh mesh = geo::make_synthetic_dataset(geo::Family::source, 1, 1).front().mesh;
  return mesh;
}

void BM_MlpForwardBackward(benchmark::State& state) {
  const auto n = state.range(0);
  const auto x = ad::DiffValue::constant(gaussian(n, 17, 1));
  const auto w0 = ad::DiffValue::variable(gaussian(17, 128, 2) * 0.1);
  const auto w1 = ad::DiffValue::variable(gaussian(128, 64, 3) * 0.1);
  const auto w2 = ad::DiffValue::variable(gaussian(64, 1, 4) * 0.1);
  for (auto _ : state) {
    const auto h0 = ad::leaky_relu(ad::matmul(x, w0), 0.01);
    const auto h1 = ad::leaky_relu(ad::matmul(h0, w1), 0.01);
    const auto loss = ad::mean(ad::sigmoid(ad::matmul(h1, w2)));
    ad::backward(loss);
    benchmark::DoNotOptimize(loss.item());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_MlpForwardBackward)->Arg(512)->Arg(4096);

void BM_MmdLayer(benchmark::State& state) {
  const auto n = state.range(0);
  const auto s = ad::DiffValue::variable(gaussian(n, 17, 5));
  const auto t = ad::DiffValue::constant(gaussian(n, 17, 6));
  for (auto _ : state) {
    const auto v = sculptor::adapt::mmd_layer(s, t, 1.0);
    ad::backward(v);
    benchmark::DoNotOptimize(v.item());
  }
}
BENCHMARK(BM_MmdLayer)->Arg(128)->Arg(512);

void BM_AggregateNeighbours(benchmark::State& state) {
  const ad::Matrix target = gaussian(state.range(0), 17, 7);
  const ad::Matrix source = gaussian(state.range(1), 17, 8);
  const Eigen::VectorXd labels = (gaussian(state.range(1), 1, 9).array() > 0).cast<double>();
  for (auto _ : state) {
    auto r = sculptor::adapt::aggregate_neighbours(target, source, labels, 8, 256.0);
    benchmark::DoNotOptimize(r.aggregate.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AggregateNeighbours)->Args({512, 1536})->Args({2048, 1536});

void BM_WindingNumber(benchmark::State& state) {
  const geo::WindingNumber wn(source_mesh());
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::vector<geo::Vec3> pts;
  for (int i = 0; i < 256; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
  for (auto _ : state) {
    auto occ = wn.occupancy(pts);
    benchmark::DoNotOptimize(occ.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pts.size()));
  state.counters["faces"] = static_cast<double>(source_mesh().faces.size());
}
BENCHMARK(BM_WindingNumber)->Unit(benchmark::kMillisecond);

void BM_SampleGrid(benchmark::State& state) {
  const sculptor::model::OccupancyModel model;
  const auto input = sculptor::raster::rasterize(source_mesh(), 64);
  const int G = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto grid = sculptor::surface::sample_grid(model, input, G);
    benchmark::DoNotOptimize(grid.values.data());
  }
  state.SetItemsProcessed(state.iterations() * G * G * G);
}
BENCHMARK(BM_SampleGrid)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_MarchingCubes(benchmark::State& state) {
  const int G = static_cast<int>(state.range(0));
  auto grid = sculptor::surface::unit_box_lattice(G);
  for (int k = 0; k < G; ++k)
    for (int j = 0; j < G; ++j)
      for (int i = 0; i < G; ++i) grid.values[grid.index(i, j, k)] = 0.85 - grid.position(i, j, k).norm();
  for (auto _ : state) {
    auto mesh = sculptor::surface::marching_cubes(grid);
    benchmark::DoNotOptimize(mesh.faces.data());
  }
}
BENCHMARK(BM_MarchingCubes)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Chamfer(benchmark::State& state) {
  const auto& a = source_mesh();
  const auto b = geo::make_synthetic_dataset(geo::Family::target, 1, 2).front().mesh;
  const sculptor::metrics::MetricOptions opts{static_cast<std::size_t>(state.range(0)), 0};
  for (auto _ : state) benchmark::DoNotOptimize(sculptor::metrics::chamfer(a, b, opts));
}
BENCHMARK(BM_Chamfer)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Rasterize(benchmark::State& state) {
  for (auto _ : state) {
    auto r = sculptor::raster::rasterize(source_mesh(), 64);
    benchmark::DoNotOptimize(r.depth.data());
  }
}
BENCHMARK(BM_Rasterize)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
  sculptor::tune_allocator();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
