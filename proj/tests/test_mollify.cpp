#include <gtest/gtest.h>

#include <numbers>

#include "mhdflux/fields.hpp"
#include "mhdflux/mollify.hpp"

using namespace mhdflux;

namespace {

constexpr double kPi = std::numbers::pi;

GridSpec periodic(int n) { return GridSpec(DomainGeometry::periodic_box({1.0, 1.0, 1.0}), {n, n, n}); }
GridSpec walled(int n) { return GridSpec(DomainGeometry::wall_box({1.0, 1.0, 1.0}), {n, n, n}); }

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b, const Mask& m) {
  double e = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c)
    if (m[c]) e = std::max(e, std::abs(a[c] - b[c]));
  return e;
}

}  // namespace

TEST(Kernel, RejectsUnderResolvedScale) {
  const GridSpec grid = periodic(32);
  EXPECT_THROW(build_kernel(2.0 / 32, KernelShape::polynomial, grid), ResolutionError);
  EXPECT_NO_THROW(build_kernel(4.0 / 32, KernelShape::polynomial, grid));
}

TEST(Kernel, MassMomentsAndSymmetry) {
  for (auto shape : {KernelShape::polynomial, KernelShape::bump}) {
    const GridSpec grid = periodic(32);
    const MollifierKernel k = build_kernel(5.0 / 32, shape, grid, ConvolutionPath::direct);
    EXPECT_NEAR(k.mass(), 1.0, 1e-14);
    Vec3 first{0, 0, 0};
    for (std::size_t s = 0; s < k.offsets().size(); ++s) {
      EXPECT_GE(k.values()[s], 0.0);
      EXPECT_LE(norm(k.displacement(s)), k.l() * (1 + 1e-12));
      first = first + (k.values()[s] * grid.cell_volume()) * k.displacement(s);
    }
    for (int a = 0; a < 3; ++a) EXPECT_NEAR(first[a], 0.0, 1e-15);
    for (int a = 0; a < 3; ++a) {
      Derivative d{0, 0, 0};
      d[a] = 1;
      EXPECT_NEAR(pairwise_sum(k.derivative_values(d)), 0.0, 1e-9 * std::pow(k.l(), -4));
    }
    EXPECT_THROW(k.derivative_values({0, 0, 0}), UnsupportedError);
    EXPECT_THROW(k.derivative_values({3, 0, 0}), UnsupportedError);
  }
}

TEST(Kernel, ShapeNames) {
  EXPECT_EQ(kernel_shape_from_string("bump"), KernelShape::bump);
  EXPECT_EQ(to_string(KernelShape::polynomial), "polynomial");
  EXPECT_EQ(convolution_path_from_string("fft"), ConvolutionPath::fft);
  EXPECT_THROW(kernel_shape_from_string("gauss"), ArgumentError);
}

TEST(Mollify, ReproducesAffineFieldsOnSupport) {
  const GridSpec grid = walled(24);
  const MollifierKernel k = build_kernel(4.0 / 24, KernelShape::polynomial, grid, ConvolutionPath::direct);
  const auto f = ScalarField::sample(grid, [](const Vec3& x) { return 1.0 + 2.0 * x[0] - 0.5 * x[1] + 3.0 * x[2]; });
  const auto fl = mollify(f, k);
  EXPECT_LT(max_abs_diff(f.component(0), fl.component(0), k.support()), 1e-13);
  const double expect[3] = {2.0, -0.5, 3.0};
  for (int a = 0; a < 3; ++a) {
    Derivative d{0, 0, 0};
    d[a] = 1;
    const auto g = mollified_derivative(f, k, d);
    for (std::size_t c = 0; c < grid.size(); ++c)
      if (k.support()[c]) { EXPECT_NEAR(g(0, c), expect[a], 1e-10); }
  }
  for (std::size_t c = 0; c < grid.size(); ++c)
    if (!k.support()[c]) { EXPECT_EQ(fl(0, c), 0.0); }
}

TEST(Mollify, SecondDerivativeOfQuadratic) {
  const GridSpec grid = walled(24);
  const MollifierKernel k = build_kernel(4.0 / 24, KernelShape::polynomial, grid, ConvolutionPath::direct);
  const auto f = ScalarField::sample(grid, [](const Vec3& x) { return x[0] * x[0] + 3.0 * x[0] * x[2]; });
  const auto dxx = mollified_derivative(f, k, {2, 0, 0});
  const auto dxz = mollified_derivative(f, k, {1, 0, 1});
  const auto dyy = mollified_derivative(f, k, {0, 2, 0});
  for (std::size_t c = 0; c < grid.size(); ++c) {
    if (!k.support()[c]) continue;
    EXPECT_NEAR(dxx(0, c), 2.0, 1e-8);
    EXPECT_NEAR(dxz(0, c), 3.0, 1e-8);
    EXPECT_NEAR(dyy(0, c), 0.0, 1e-8);
  }
}

TEST(Mollify, SupportIsInteriorOfWalledBox) {
  const GridSpec grid = walled(24);
  const MollifierKernel k = build_kernel(4.0 / 24, KernelShape::polynomial, grid);
  const CellGeometry cg = cell_geometry(grid);
  for (std::size_t c = 0; c < grid.size(); ++c) EXPECT_EQ(k.support()[c], cg.distance[c] > 4.0 / 24);
  EXPECT_EQ(build_kernel(4.0 / 24, KernelShape::polynomial, periodic(24)).support().count(), grid.size());
}

TEST(Mollify, SmoothErrorIsSecondOrderInL) {
  const GridSpec grid = periodic(64);
  const auto f = ScalarField::sample(grid, [](const Vec3& x) { return std::sin(2 * kPi * x[0]) * std::cos(2 * kPi * x[1]); });
  const Mask dom = domain_mask(grid);
  std::vector<double> err;
  for (double cells : {4.0, 8.0}) {
    const MollifierKernel k = build_kernel(cells / 64, KernelShape::polynomial, grid);
    err.push_back(lp_region_norm(f - mollify(f, k), 2.0, dom));
  }
  EXPECT_NEAR(err[1] / err[0], 4.0, 0.4);
}

TEST(Mollify, FftMatchesDirect) {
  const GridSpec grid = periodic(24);
  const auto f = ScalarField::sample(grid, [](const Vec3& x) {
    return std::sin(2 * kPi * x[0] + 0.3) * std::cos(4 * kPi * x[1]) + std::sin(6 * kPi * x[2]) * x[0];
  });
  const double l = 5.0 / 24;
  const MollifierKernel kd = build_kernel(l, KernelShape::polynomial, grid, ConvolutionPath::direct);
  const MollifierKernel kf = build_kernel(l, KernelShape::polynomial, grid, ConvolutionPath::fft);
  EXPECT_TRUE(kf.uses_fft());
  const std::vector<Derivative> which{{0, 0, 0}, {1, 0, 0}, {0, 1, 1}, {0, 0, 2}};
  const auto a = convolve_all(kd, f.component(0), which);
  const auto b = convolve_all(kf, f.component(0), which);
  for (std::size_t n = 0; n < which.size(); ++n) {
    double scale = 0.0;
    for (double v : a[n]) scale = std::max(scale, std::abs(v));
    EXPECT_LT(max_abs_diff(a[n], b[n], kd.support()), 1e-12 * std::max(scale, 1.0)) << n;
  }
}

TEST(Commutator, IdentityHoldsPointwise) {
  const GridSpec grid = periodic(16);
  const auto f = ScalarField::sample(grid, [](const Vec3& x) { return std::sin(2 * kPi * x[0]) + x[1] * 0.0 + std::cos(2 * kPi * x[2]); });
  const auto g = ScalarField::sample(grid, [](const Vec3& x) { return std::cos(2 * kPi * (x[0] + x[1])) * 2.0; });
  for (auto path : {ConvolutionPath::direct, ConvolutionPath::fft}) {
    const MollifierKernel k = build_kernel(4.0 / 16, KernelShape::polynomial, grid, path);
    const CommutatorSplit s = commutator_split(f, g, k);
    for (std::size_t c = 0; c < grid.size(); ++c) {
      const double rhs = s.resolved(0, c) + s.increment_term(0, c) - s.defect_term(0, c);
      EXPECT_NEAR(s.lhs(0, c), rhs, 1e-12 * 2.0 * 2.0);
    }
  }
}

TEST(Commutator, SelfIncrementTermIsNonNegative) {
  const GridSpec grid = walled(20);
  const auto f = ScalarField::sample(grid, [](const Vec3& x) { return std::sin(7 * x[0]) * std::exp(x[1]) - x[2] * x[2]; });
  const MollifierKernel k = build_kernel(4.0 / 20, KernelShape::bump, grid, ConvolutionPath::direct);
  const CommutatorSplit s = commutator_split(f, f, k);
  for (std::size_t c = 0; c < grid.size(); ++c) {
    EXPECT_GE(s.increment_term(0, c), 0.0);
    EXPECT_GE(s.defect_term(0, c), 0.0);
  }
}

TEST(Mollify, FoldedAxisMatchesFullGrid) {
  // A field independent of z on a 1-cell periodic z axis must mollify like
  // the same field on a full grid.
  const auto f = [](const Vec3& x) { return std::sin(2 * kPi * x[0]) * std::cos(2 * kPi * x[1]); };
  const GridSpec full = periodic(32);
  const GridSpec flat(DomainGeometry::periodic_box({1.0, 1.0, 1.0 / 32}), {32, 32, 1});
  const double l = 6.0 / 32;
  const auto a = mollify(ScalarField::sample(full, f), build_kernel(l, KernelShape::polynomial, full, ConvolutionPath::direct));
  const MollifierKernel kflat = build_kernel(l, KernelShape::polynomial, flat, ConvolutionPath::direct);
  const auto b = mollify(ScalarField::sample(flat, f), kflat);
  EXPECT_NEAR(kflat.mass(), 1.0, 1e-14);
  for (int j = 0; j < 32; ++j)
    for (int i = 0; i < 32; ++i) EXPECT_NEAR(a(0, full.index(i, j, 5)), b(0, flat.index(i, j, 0)), 1e-13);
  for (double w : kflat.derivative_values({0, 0, 1})) EXPECT_EQ(w, 0.0);
}
