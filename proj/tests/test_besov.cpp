#include <gtest/gtest.h>

#include <numbers>

#include "mhdflux/besov.hpp"

using namespace mhdflux;

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

TEST(Increment, LinearFieldOnWalledBox) {
  const int n = 16;
  const GridSpec grid(DomainGeometry::wall_box({1, 1, 1}), {n, n, n});
  const auto f = ScalarField::sample(grid, [](const Vec3& x) { return 3.0 * x[0]; });
  const Mask dom = domain_mask(grid);
  const double dx = 1.0 / n;
  for (int k : {1, 2, 5}) {
    const double overlap = double(n - k) * n * n * grid.cell_volume();
    const double expect = 3.0 * k * dx * std::cbrt(overlap);
    EXPECT_NEAR(translation_increment(f, {k, 0, 0}, dom), expect, 1e-13);
    EXPECT_NEAR(translation_increment(f, {-k, 0, 0}, dom), expect, 1e-13);
    EXPECT_EQ(translation_increment(f, {0, k, 0}, dom), 0.0);
  }
}

TEST(Increment, SineTranslationOnTorus) {
  const int n = 64;
  const GridSpec grid(DomainGeometry::periodic_box({1, 1, 1}), {n, n, n});
  const auto f = ScalarField::sample(grid, [](const Vec3& x) { return std::sin(2 * kPi * x[0]); });
  const Mask dom = domain_mask(grid);
  const double cos3 = std::cbrt(4.0 / (3.0 * kPi));
  for (int k : {1, 4, 8}) {
    const double expect = 2.0 * std::sin(kPi * k / n) * cos3;
    EXPECT_NEAR(translation_increment(f, {k, 0, 0}, dom) / expect, 1.0, 1e-3) << k;
  }
}

TEST(Increment, HomogeneousAndMonotoneInScale) {
  const GridSpec grid(DomainGeometry::periodic_box({1, 1, 1}), {16, 16, 16});
  const auto f = VectorField::sample(grid, [](const Vec3& x) { return Vec3{std::sin(2 * kPi * x[1]), std::cos(2 * kPi * x[2]) * x[0], 0.2}; });
  const Mask dom = domain_mask(grid);
  const auto dirs = default_directions();
  EXPECT_EQ(dirs.size(), 26u + 32u);
  const double a = increment_norm(f, 4.0 / 16, dom, dirs);
  EXPECT_NEAR(increment_norm(-2.5 * f, 4.0 / 16, dom, dirs), 2.5 * a, 1e-12 * a);
  EXPECT_LE(increment_norm(f, 2.0 / 16, dom, dirs), a);
  EXPECT_LE(a, increment_norm_exhaustive(f, 4.0 / 16 * 1.2, dom) * (1 + 1e-12));
  EXPECT_THROW(increment_norm(f, 0.5 / 16, dom, dirs), ResolutionError);
}

TEST(Directions, SeededAndUnit) {
  const auto a = default_directions(7, 10);
  const auto b = default_directions(7, 10);
  const auto c = default_directions(8, 10);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  for (const auto& d : a) EXPECT_NEAR(norm(d), 1.0, 1e-15);
}

TEST(Scaling, RecoversExactPowerLaw) {
  std::vector<ScaleSample> s;
  for (double l : {0.01, 0.02, 0.04, 0.08, 0.16}) s.push_back({l, 3.0 * l * l});
  const ScalingFit fit = scaling_exponent(s);
  EXPECT_NEAR(fit.slope, 2.0, 1e-12);
  EXPECT_NEAR(fit.intercept, std::log(3.0), 1e-11);
  EXPECT_NEAR(fit.halfwidth, 0.0, 1e-6);
  EXPECT_EQ(fit.used, 5u);
}

TEST(Scaling, DropsNonPositiveAndNeedsFourSamples) {
  std::vector<ScaleSample> s{{0.1, 1.0}, {0.2, 0.0}, {0.3, 2.0}, {0.4, -1.0}, {0.5, 3.0}, {0.6, 3.5}};
  const ScalingFit fit = scaling_exponent(s);
  EXPECT_EQ(fit.dropped, (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(fit.used, 4u);
  s.pop_back();
  EXPECT_THROW(scaling_exponent(s), InsufficientDataError);
  EXPECT_THROW(scaling_exponent({{0.1, 1}, {0.1, 2}, {0.2, 3}, {0.3, 4}}), ArgumentError);
}

TEST(Seminorm, AlphaRangeAndHomogeneity) {
  const GridSpec grid(DomainGeometry::wall_box({1, 1, 1}), {16, 16, 16});
  const auto f = ScalarField::sample(grid, [](const Vec3& x) { return std::sin(3 * x[0]) + x[1] * x[2]; });
  const Mask dom = domain_mask(grid);
  const auto dirs = default_directions(1, 4);
  EXPECT_THROW(besov_seminorm(f, 0.0, dom, dirs), ArgumentError);
  EXPECT_THROW(besov_seminorm(f, 1.5, dom, dirs), ArgumentError);
  const auto s1 = besov_seminorm(f, 0.5, dom, dirs);
  const auto s2 = besov_seminorm(4.0 * f, 0.5, dom, dirs);
  EXPECT_NEAR(s2.value, 4.0 * s1.value, 1e-12 * s2.value);
  EXPECT_GT(s1.value, 0.0);
  // |y| from dx doubling up to diam / 4.
  EXPECT_EQ(s1.samples.size(), 3u);
  const auto capped = besov_seminorm(f, 1.0, dom, dirs, SeminormRange::capped, 1.0 / 16);
  EXPECT_EQ(capped.samples.size(), 1u);
  EXPECT_DOUBLE_EQ(capped.value, capped.samples[0].value / (1.0 / 16));
}

TEST(Seminorm, ReportFitsSmoothFieldWithUnitSlope) {
  const int n = 512;
  const GridSpec grid(DomainGeometry::periodic_box({1, 1.0 / n, 1.0 / n}), {n, 1, 1});
  const auto f = ScalarField::sample(grid, [](const Vec3& x) { return std::sin(2 * kPi * x[0]); });
  const BesovReport r = besov_report(f, 0.5, domain_mask(grid), {4.0 / n, 1.0 / n, 2.0 / n, 3.0 / n}, default_directions(3, 8));
  ASSERT_TRUE(r.fitted);
  EXPECT_EQ(r.samples.front().scale, 1.0 / n);
  EXPECT_NEAR(r.fitted_slope, 1.0, 1e-3);
}

TEST(WallNormal, NormalComponentOnSlab) {
  const int n = 16;
  const GridSpec grid(DomainGeometry::wall_box({1, 1, 1}, {true, false, false}), {n, n, n});
  const auto w = VectorField::sample(grid, [](const Vec3& x) { return Vec3{std::sin(kPi * x[0]), 1.0, -2.0}; });
  const double h = 4.0 / n;
  // Shell of depth h: the first four cell layers on each wall.
  double s = 0.0;
  for (int i = 0; i < 4; ++i) s += 2.0 * std::pow(std::sin(kPi * (i + 0.5) / n), 3) * (1.0 / n);
  const auto r = wall_normal_besov(w, 1.0, {h});
  EXPECT_NEAR(r.value, std::cbrt(s) / h, 1e-13);
  EXPECT_NEAR(wall_normal_sup(w, h), std::sin(kPi * 3.5 / n), 1e-15);
  const auto tangent = VectorField::constant(grid, {0.0, 1.0, 1.0});
  EXPECT_EQ(wall_normal_sup(tangent, h), 0.0);
  const GridSpec torus(DomainGeometry::periodic_box({1, 1, 1}), {8, 8, 8});
  EXPECT_THROW(wall_normal_sup(VectorField(torus), 0.1), UnsupportedError);
}
