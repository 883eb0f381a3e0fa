#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "sculptor/error.hpp"
#include "sculptor/geometry/sampling.hpp"
#include "sculptor/geometry/synthetic.hpp"
#include "sculptor/raster/raster.hpp"

namespace geo = sculptor::geometry;
namespace rs = sculptor::raster;
using geo::Vec3;

TEST(Raster, UnitCubeFillsImage) {
  const auto r = rs::rasterize(oracle::cube(), 64);
  EXPECT_EQ(r.silhouette_area(), 64u * 64u);
  const double d0 = r.depth_at(0, 0);
  for (int v = 1; v < 63; ++v)
    for (int u = 1; u < 63; ++u) EXPECT_EQ(r.depth_at(u, v), d0);
  EXPECT_EQ(d0, 0.0);
}

TEST(Raster, FrontFaceDepth) {
  const auto r = rs::rasterize(oracle::cube(0.25, Vec3(0.1, -0.1, 0.2)), 64);
  // Front face at z = -0.05 -> depth 0.45.
  EXPECT_EQ(r.mask_at(38, 25), 1);
  EXPECT_NEAR(r.depth_at(38, 25), 0.45, 1e-12);
  EXPECT_EQ(r.mask_at(2, 2), 0);
  EXPECT_EQ(r.depth_at(2, 2), 0.0);
}

TEST(Raster, DiscAreaMatchesSphere) {
  const auto r = rs::rasterize(oracle::icosphere(5, 0.4), 256);
  const double frac = static_cast<double>(r.silhouette_area()) / (256.0 * 256.0);
  EXPECT_NEAR(frac / (std::numbers::pi * 0.16), 1.0, 0.02);
}

TEST(Raster, DepthImpliesMask) {
  const auto shape = geo::make_synthetic_dataset(geo::Family::source, 1, 3).front();
  const auto r = rs::rasterize(shape.mesh, 64);
  for (std::size_t i = 0; i < r.mask.size(); ++i) {
    if (r.depth[i] > 0.0) EXPECT_EQ(r.mask[i], 1);
    EXPECT_GE(r.depth[i], 0.0);
    EXPECT_LE(r.depth[i], 1.0);
  }
}

TEST(Raster, MaskAgreesWithCentreRays) {
  const auto shape = geo::make_synthetic_dataset(geo::Family::target, 1, 4).front();
  const int R = 64;
  const auto r = rs::rasterize(shape.mesh, R);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> pick(0, R - 1);
  const Vec3 dir(0, 0, 1);
  int agree = 0;
  for (int i = 0; i < 1000; ++i) {
    const int u = pick(rng), v = pick(rng);
    const Vec3 origin((u + 0.5) / R - 0.5, (v + 0.5) / R - 0.5, -2.0);
    bool hit = false;
    for (const auto& f : shape.mesh.faces) {
      if (oracle::ray_hits(origin, dir, shape.mesh.vertices[f[0]], shape.mesh.vertices[f[1]],
                           shape.mesh.vertices[f[2]])) {
        hit = true;
        break;
      }
    }
    agree += hit == (r.mask_at(u, v) == 1);
  }
  EXPECT_GE(agree, 995);
}

TEST(Raster, EmptySilhouetteAndSmallResolutionRejected) {
  auto far = oracle::cube(0.2, Vec3(3, 0, 0));
  EXPECT_THROW(rs::rasterize(far, 64), sculptor::ShapeError);
  EXPECT_THROW(rs::rasterize(oracle::cube(), 8), sculptor::ShapeError);
}

TEST(Raster, Deterministic) {
  const auto shape = geo::make_synthetic_dataset(geo::Family::source, 1, 6).front();
  const auto a = rs::rasterize(shape.mesh, 64);
  const auto b = rs::rasterize(shape.mesh, 64);
  EXPECT_EQ(a.mask, b.mask);
  EXPECT_EQ(a.depth, b.depth);
}

TEST(Project, CentreAndCorner) {
  const auto c = rs::project(Vec3::Zero(), 64);
  EXPECT_DOUBLE_EQ(c.u, 32.0);
  EXPECT_DOUBLE_EQ(c.v, 32.0);
  EXPECT_DOUBLE_EQ(c.z, 0.5);
  const auto k = rs::project(Vec3(-0.5, -0.5, -0.5), 64);
  EXPECT_DOUBLE_EQ(k.u, 0.0);
  EXPECT_DOUBLE_EQ(k.v, 0.0);
  EXPECT_DOUBLE_EQ(k.z, 0.0);
}

TEST(Project, VisibleSurfacePointsMatchRasterDepth) {
  // Front face of an axis-aligned box: depth is constant, so the pixel under a
  // visible surface point must carry exactly that point's depth.
  const auto box = oracle::cube(0.3, Vec3(0.05, 0.0, 0.1));
  const int R = 64;
  const auto r = rs::rasterize(box, R);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.24, 0.34);
  for (int i = 0; i < 200; ++i) {
    const Vec3 p(u(rng), u(rng) - 0.05, -0.2);
    const auto pr = rs::project(p, R);
    const int pu = static_cast<int>(std::floor(pr.u));
    const int pv = static_cast<int>(std::floor(pr.v));
    ASSERT_EQ(r.mask_at(pu, pv), 1);
    EXPECT_NEAR(r.depth_at(pu, pv), pr.z, 1e-12);
  }
  // Curved surface: the depth under a visible point differs by at most the
  // depth change across one pixel.
  const auto sphere = oracle::icosphere(5, 0.4);
  const auto rs_sphere = rs::rasterize(sphere, R);
  for (const auto& p : geo::sample_surface(sphere, 500, 8)) {
    if (p.z() > -0.25) continue;  // keep to the front cap where the slope is bounded by ~1.3
    const auto pr = rs::project(p, R);
    const int pu = static_cast<int>(std::floor(pr.u));
    const int pv = static_cast<int>(std::floor(pr.v));
    EXPECT_NEAR(rs_sphere.depth_at(pu, pv), pr.z, 1.3 * std::sqrt(2.0) / R);
  }
}

TEST(Raster, PgmRoundTrip) {
  const auto shape = geo::make_synthetic_dataset(geo::Family::source, 1, 9).front();
  const auto r = rs::rasterize(shape.mesh, 64);
  const auto dir = std::filesystem::temp_directory_path() / "sculptor_tests";
  std::filesystem::create_directories(dir);
  rs::write_mask_pgm(dir / "m.pgm", r);
  rs::write_depth_pgm(dir / "d.pgm", r);
  const auto back = rs::read_pgm_pair(dir / "m.pgm", dir / "d.pgm");
  EXPECT_EQ(back.resolution, 64);
  EXPECT_EQ(back.mask, r.mask);
  for (std::size_t i = 0; i < r.depth.size(); ++i) EXPECT_NEAR(back.depth[i], r.depth[i], 0.5 / 65535.0 + 1e-15);
}
