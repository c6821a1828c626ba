#include <gtest/gtest.h>

#include "mhdflux/regions.hpp"

using namespace mhdflux;

namespace {

const DomainGeometry kUnitBox = DomainGeometry::wall_box({1.0, 1.0, 1.0});
const DomainGeometry kUnitBall = DomainGeometry::ball(1.0);

}  // namespace

TEST(Geometry, DistanceExamples) {
  EXPECT_DOUBLE_EQ(kUnitBall.distance_to_boundary({0.0, 0.0, 0.0}), 1.0);
  EXPECT_DOUBLE_EQ(kUnitBox.distance_to_boundary({0.1, 0.5, 0.5}), 0.1);
  const auto p = DomainGeometry::periodic_box({1.0, 1.0, 1.0});
  EXPECT_TRUE(std::isinf(p.distance_to_boundary({0.3, 0.2, 0.9})));
  EXPECT_THROW(kUnitBox.distance_to_boundary({1.2, 0.5, 0.5}), DomainError);
  EXPECT_THROW(kUnitBall.distance_to_boundary({0.9, 0.9, 0.0}), DomainError);
}

TEST(Geometry, ProjectionExamples) {
  const auto pb = kUnitBox.boundary_projection({0.1, 0.5, 0.5});
  EXPECT_EQ(pb.point, (Vec3{0.0, 0.5, 0.5}));
  EXPECT_EQ(pb.normal, (Vec3{-1.0, 0.0, 0.0}));
  const auto pr = kUnitBall.boundary_projection({0.5, 0.0, 0.0});
  EXPECT_NEAR(pr.point[0], 1.0, 1e-15);
  EXPECT_EQ(pr.normal, (Vec3{1.0, 0.0, 0.0}));
  EXPECT_THROW(kUnitBall.boundary_projection({0.0, 0.0, 0.0}), RangeError);
  EXPECT_THROW(DomainGeometry::periodic_box({1, 1, 1}).boundary_projection({0.5, 0.5, 0.5}), UnsupportedError);
  EXPECT_THROW(kUnitBox.boundary_projection({0.1, 0.1, 0.5}), RangeError);
}

TEST(Geometry, H0PerShape) {
  EXPECT_DOUBLE_EQ(kUnitBall.h0(), 1.0);
  EXPECT_DOUBLE_EQ(DomainGeometry::wall_box({2.0, 1.0, 4.0}).h0(), 0.5);
  EXPECT_DOUBLE_EQ(DomainGeometry::wall_box({2.0, 1.0, 4.0}, {true, false, false}).h0(), 1.0);
  EXPECT_TRUE(std::isinf(DomainGeometry::periodic_box({1, 1, 1}).h0()));
}

TEST(Geometry, DistanceGradientIsMinusNormal) {
  const double step = 1e-4;
  const std::vector<std::pair<DomainGeometry, Vec3>> cases = {
      {kUnitBox, {0.2, 0.5, 0.45}}, {kUnitBox, {0.6, 0.93, 0.4}}, {kUnitBall, {0.3, -0.2, 0.5}}, {kUnitBall, {-0.1, 0.05, -0.7}}};
  for (const auto& [g, x] : cases) {
    Vec3 grad;
    for (int a = 0; a < 3; ++a) {
      Vec3 xp = x, xm = x;
      xp[a] += step;
      xm[a] -= step;
      grad[a] = (g.distance_to_boundary(xp) - g.distance_to_boundary(xm)) / (2 * step);
    }
    const Vec3 n = g.boundary_projection(x).normal;
    EXPECT_NEAR(norm(grad), 1.0, 1e-6);
    for (int a = 0; a < 3; ++a) EXPECT_NEAR(grad[a], -n[a], 1e-6);
  }
}

TEST(Cutoff, EndpointsAndMidpoint) {
  const double h = 0.2, l = h / 16;
  const CutoffProfile prof(h, l);
  const Vec3 at_h{h, 0.5, 0.5};
  auto v = cutoff_evaluate(prof, kUnitBox, at_h);
  EXPECT_NEAR(v.theta, 1.0, 1e-12);
  EXPECT_NEAR(norm(v.gradient), 0.0, 1e-9);
  v = cutoff_evaluate(prof, kUnitBox, {h - l, 0.5, 0.5});
  EXPECT_NEAR(v.theta, 0.0, 1e-12);
  EXPECT_NEAR(norm(v.gradient), 0.0, 1e-9);
  v = cutoff_evaluate(prof, kUnitBox, {h - l / 2, 0.5, 0.5});
  EXPECT_NEAR(v.gradient[0], 15.0 / (8.0 * l), 1e-9);
  EXPECT_LE(v.gradient[0], CutoffProfile::kSlopeBound / l * (1 + 1e-12));
  EXPECT_EQ(v.gradient[1], 0.0);
  EXPECT_EQ(v.gradient[2], 0.0);
}

TEST(Cutoff, MonotoneBoundedAndSlopeBound) {
  const CutoffProfile prof(0.3, 0.05);
  double prev = 0.0;
  for (int k = 0; k <= 1000; ++k) {
    const double z = 0.2 + 0.15 * k / 1000.0;
    const double e = prof.eta(z);
    EXPECT_GE(e, prev);
    EXPECT_GE(e, 0.0);
    EXPECT_LE(e, 1.0);
    EXPECT_LE(prof.eta_prime(z) * 0.05, CutoffProfile::kSlopeBound + 1e-12);
    prev = e;
  }
  EXPECT_EQ(CutoffProfile::with_default_width(0.32).l(), 0.02);
  EXPECT_THROW(CutoffProfile(0.1, 0.1), ArgumentError);
}

TEST(Cutoff, GradientVanishesOutsideBand) {
  const GridSpec grid(kUnitBox, {32, 32, 32});
  const CellGeometry cg = cell_geometry(grid);
  const CutoffProfile prof(0.25, 0.0625);
  const CutoffField cut = sample_cutoff(grid, cg, prof);
  const Mask band = region_mask(grid, cg, Region::band(0.25, 0.0625));
  for (std::size_t c = 0; c < grid.size(); ++c) {
    EXPECT_GE(cut.theta[c], 0.0);
    EXPECT_LE(cut.theta[c], 1.0);
    if (!band[c]) { EXPECT_EQ(norm(cut.gradient[c]), 0.0); }
    EXPECT_LE(norm(cut.gradient[c]), CutoffProfile::kSlopeBound / 0.0625 * (1 + 1e-12));
    if (cg.distance[c] <= 0.25 - 0.0625) { EXPECT_EQ(cut.theta[c], 0.0); }
  }
}

TEST(Regions, ShellDefinitionAndBandIdentity) {
  const GridSpec grid(kUnitBox, {20, 20, 20});
  const CellGeometry cg = cell_geometry(grid);
  const Mask shell = region_mask(grid, cg, Region::shell(0.1));
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const double d = kUnitBox.distance_to_boundary(grid.center(c));
    if (!cg.ambiguous[c]) { EXPECT_EQ(shell[c], d < 0.1); }
  }
  const Mask band = region_mask(grid, cg, Region::band(0.25, 0.125));
  EXPECT_EQ(band, region_mask(grid, cg, Region::shell(0.25)) - region_mask(grid, cg, Region::shell(0.125)));
  EXPECT_FALSE(band.empty());
  EXPECT_THROW(region_mask(grid, Region::shell(0.5)), RangeError);
}

TEST(Regions, NestingAndDisjointness) {
  const GridSpec grid(kUnitBall, {24, 24, 24});
  const CellGeometry cg = cell_geometry(grid);
  const Mask s1 = region_mask(grid, cg, Region::shell(0.1));
  const Mask s2 = region_mask(grid, cg, Region::shell(0.3));
  EXPECT_TRUE(s1.subset_of(s2));
  const Mask in = region_mask(grid, cg, Region::interior(0.3));
  EXPECT_TRUE((in & s2).empty());
  EXPECT_TRUE(in.subset_of(region_mask(grid, cg, Region::interior(0.1))));
}

TEST(Regions, PeriodicShellsAreEmpty) {
  const GridSpec grid(DomainGeometry::periodic_box({1, 1, 1}), {8, 8, 8});
  EXPECT_TRUE(region_mask(grid, Region::shell(0.2)).empty());
  EXPECT_EQ(region_mask(grid, Region::interior(0.2)).count(), grid.size());
}

TEST(Regions, BandMeasureMatchesBoxFormula) {
  for (int n : {64, 128}) {
    const GridSpec grid(kUnitBox, {n, n, n});
    const double l = 4.0 / n, h = 16.0 / n;
    const CellGeometry cg = cell_geometry(grid);
    const Mask band = region_mask(grid, cg, Region::band(h, l));
    const double measured = measure(grid, band) + ambiguous_volume(grid, cg, h) - ambiguous_volume(grid, cg, h - l);
    const double exact = std::pow(1 - 2 * (h - l), 3) - std::pow(1 - 2 * h, 3);
    EXPECT_NEAR(measured, exact, 1e-12) << n;
  }
}

TEST(Regions, AmbiguousCellsAreReported) {
  const GridSpec grid(kUnitBox, {16, 16, 16});
  const CellGeometry cg = cell_geometry(grid);
  EXPECT_TRUE(cg.ambiguous[grid.index(0, 0, 8)]);
  EXPECT_FALSE(cg.ambiguous[grid.index(0, 3, 8)]);
  EXPECT_GT(ambiguous_volume(grid, cg, 0.2), 0.0);
  EXPECT_FALSE(region_mask(grid, cg, Region::shell(0.2))[grid.index(0, 0, 8)]);
}
