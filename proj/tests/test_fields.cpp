#include <gtest/gtest.h>

#include <numbers>

#include "mhdflux/fields.hpp"

using namespace mhdflux;

namespace {

constexpr double kPi = std::numbers::pi;
const double kInf = std::numeric_limits<double>::infinity();

GridSpec periodic(int n) { return GridSpec(DomainGeometry::periodic_box({1.0, 1.0, 1.0}), {n, n, n}); }

}  // namespace

TEST(LpNorm, SineOverUnitTorus) {
  const GridSpec grid = periodic(32);
  const auto f = ScalarField::sample(grid, [](const Vec3& x) { return std::sin(2 * kPi * x[0]); });
  const Mask dom = domain_mask(grid);
  EXPECT_NEAR(lp_region_norm(f, 2.0, dom), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(lp_region_norm(f, kInf, dom), std::sin(2 * kPi * (7.5 / 32)), 1e-15);
  // Mean of |sin|^3 over a period is 4 / (3 pi).
  EXPECT_NEAR(lp_region_norm(f, 3.0, dom), std::cbrt(4.0 / (3.0 * kPi)), 2e-3);
  EXPECT_THROW(lp_region_norm(f, 1.0, dom), ArgumentError);
  EXPECT_THROW(lp_region_norm(f, 2.0, Mask(7)), ArgumentError);
}

TEST(LpNorm, EmptyMaskGivesZero) {
  const GridSpec grid = periodic(8);
  const auto f = VectorField::constant(grid, {1.0, 2.0, 3.0});
  EXPECT_EQ(lp_region_norm(f, 2.0, Mask(grid.size())), 0.0);
  EXPECT_EQ(lp_region_norm(f, kInf, Mask(grid.size())), 0.0);
  EXPECT_NEAR(lp_region_norm(f, 2.0, domain_mask(grid)), std::sqrt(14.0), 1e-13);
}

TEST(LpNorm, MonotoneInRegion) {
  const GridSpec grid(DomainGeometry::wall_box({1, 1, 1}), {16, 16, 16});
  const auto f = VectorField::sample(grid, [](const Vec3& x) { return Vec3{x[0], x[1] * x[2], 1.0 - x[0]}; });
  const Mask small = region_mask(grid, Region::shell(0.1));
  const Mask big = region_mask(grid, Region::shell(0.3));
  for (double p : {2.0, 3.0, kInf}) EXPECT_LE(lp_region_norm(f, p, small), lp_region_norm(f, p, big));
}

TEST(Divergence, LinearFieldIsExactOnWalledBox) {
  const GridSpec grid(DomainGeometry::wall_box({1, 2, 1}), {8, 12, 10});
  const auto w = VectorField::sample(grid, [](const Vec3& x) { return Vec3{2 * x[0] + x[1], -3 * x[1], 0.5 * x[2] - x[0]}; });
  const ScalarField d = discrete_divergence(w);
  for (std::size_t c = 0; c < grid.size(); ++c) EXPECT_NEAR(d(0, c), -0.5, 1e-12);
}

TEST(Divergence, DivergenceFreeTrigFieldIsSmall) {
  const GridSpec grid = periodic(32);
  const auto w = VectorField::sample(grid, [](const Vec3& x) {
    return Vec3{std::sin(2 * kPi * x[1]), std::sin(2 * kPi * x[2]), std::sin(2 * kPi * x[0])};
  });
  EXPECT_LT(FieldSnapshot::relative_divergence(w), 1e-14);
  const auto v = VectorField::sample(grid, [](const Vec3& x) { return Vec3{std::sin(2 * kPi * x[0]), 0.0, 0.0}; });
  EXPECT_GT(FieldSnapshot::relative_divergence(v), 0.1);
}

TEST(Snapshot, ValidateRejectsNonFiniteAndCompressible) {
  const GridSpec grid = periodic(8);
  auto u = VectorField::constant(grid, {1, 0, 0});
  const auto b = VectorField::constant(grid, {0, 1, 0});
  const ScalarField pi(grid);
  FieldSnapshot ok(u, b, pi);
  EXPECT_NO_THROW(ok.validate(kSpectralDivergenceTolerance));
  u(0, 5) = std::nan("");
  EXPECT_THROW(FieldSnapshot(u, b, pi).validate(kRoughDivergenceTolerance), ArgumentError);
  const auto c = VectorField::sample(grid, [](const Vec3& x) { return Vec3{std::sin(2 * kPi * x[0]), 0, 0}; });
  EXPECT_THROW(FieldSnapshot(c, b, pi).validate(kRoughDivergenceTolerance), ArgumentError);
  const GridSpec other = periodic(4);
  EXPECT_THROW(FieldSnapshot(VectorField(other), b, pi), ArgumentError);
}

TEST(Snapshot, HelicityBoundedByHalfEnergy) {
  const GridSpec grid = periodic(16);
  const auto u = VectorField::sample(grid, [](const Vec3& x) { return Vec3{std::cos(2 * kPi * x[2]), 0.3, std::sin(2 * kPi * x[1])}; });
  const auto b = VectorField::sample(grid, [](const Vec3& x) { return Vec3{0.1, std::sin(2 * kPi * x[0]), -0.7}; });
  const ScalarField pi(grid);
  const FieldSnapshot s(u, b, pi);
  EXPECT_LE(std::abs(cross_helicity(s)), 0.5 * total_energy(s));
  const FieldSnapshot same(u, u, pi);
  EXPECT_NEAR(cross_helicity(same), 0.5 * total_energy(same), 1e-12 * total_energy(same));
  const FieldSnapshot anti(u, -1.0 * u, pi);
  EXPECT_NEAR(cross_helicity(anti), -0.5 * total_energy(anti), 1e-12 * total_energy(anti));
}

TEST(Snapshot, EnergyOfConstantField) {
  const GridSpec grid(DomainGeometry::wall_box({2, 1, 1}), {8, 4, 4});
  const FieldSnapshot s(VectorField::constant(grid, {1, 2, 2}), VectorField::constant(grid, {0, 0, 1}), ScalarField(grid));
  EXPECT_NEAR(total_energy(s), 2.0 * (9.0 + 1.0), 1e-13);
  EXPECT_NEAR(cross_helicity(s), 2.0 * 2.0, 1e-13);
}

TEST(Boundedness, ShellSupremum) {
  const GridSpec grid(DomainGeometry::wall_box({1, 1, 1}), {16, 16, 16});
  const auto u = VectorField::sample(grid, [](const Vec3& x) { return Vec3{x[0], 0, 0}; });
  const FieldSnapshot s(u, VectorField(grid), ScalarField::sample(grid, [](const Vec3& x) { return x[1]; }));
  const BoundednessReport r = boundedness_near_boundary(s, 0.25);
  EXPECT_DOUBLE_EQ(r.u_sup, 15.5 / 16);
  EXPECT_EQ(r.b_sup, 0.0);
  EXPECT_DOUBLE_EQ(r.pi_sup, 15.5 / 16);
  EXPECT_THROW(boundedness_near_boundary(s, 0.5), RangeError);
}
