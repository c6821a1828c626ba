#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mhdflux/core.hpp"
#include "mhdflux/geometry.hpp"

namespace mhdflux {

using Cells = std::array<int, 3>;

/// Uniform cell-centred grid covering a domain. Cell centres are the
/// quadrature nodes of every integral in the library (midpoint rule).
class GridSpec {
 public:
  /// Grid that exactly covers the domain's bounding box ([0, L) for boxes,
  /// [-R, R) for balls).
  GridSpec(const DomainGeometry& geometry, Cells cells) : geometry_(geometry), cells_(cells) {
    for (int a = 0; a < 3; ++a) {
      if (cells[a] < 1) throw ArgumentError("grid needs at least one cell per axis");
      spacing_[a] = geometry.extent()[a] / cells[a];
      origin_[a] = geometry.shape() == Shape::ball ? -geometry.radius() : 0.0;
    }
  }

  const DomainGeometry& geometry() const { return geometry_; }
  const Cells& cells() const { return cells_; }
  const Vec3& spacing() const { return spacing_; }
  const Vec3& origin() const { return origin_; }
  double max_spacing() const { return std::max({spacing_[0], spacing_[1], spacing_[2]}); }
  double min_spacing() const { return std::min({spacing_[0], spacing_[1], spacing_[2]}); }
  double cell_volume() const { return spacing_[0] * spacing_[1] * spacing_[2]; }
  std::size_t size() const {
    return static_cast<std::size_t>(cells_[0]) * static_cast<std::size_t>(cells_[1]) * static_cast<std::size_t>(cells_[2]);
  }

  /// x-fastest linear index.
  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(cells_[0]) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(cells_[1]) * static_cast<std::size_t>(k));
  }
  std::array<int, 3> unravel(std::size_t n) const {
    const int i = static_cast<int>(n % cells_[0]);
    n /= cells_[0];
    const int j = static_cast<int>(n % cells_[1]);
    return {i, j, static_cast<int>(n / cells_[1])};
  }
  Vec3 center(int i, int j, int k) const {
    return {origin_[0] + (i + 0.5) * spacing_[0], origin_[1] + (j + 0.5) * spacing_[1], origin_[2] + (k + 0.5) * spacing_[2]};
  }
  Vec3 center(std::size_t n) const {
    const auto c = unravel(n);
    return center(c[0], c[1], c[2]);
  }

  bool same_layout(const GridSpec& o) const {
    return cells_ == o.cells_ && spacing_ == o.spacing_ && origin_ == o.origin_ && geometry_.shape() == o.geometry_.shape() &&
           geometry_.walls() == o.geometry_.walls();
  }

 private:
  DomainGeometry geometry_;
  Cells cells_;
  Vec3 spacing_{};
  Vec3 origin_{};
};

/// Boolean cell mask on a grid.
class Mask {
 public:
  Mask() = default;
  explicit Mask(std::size_t n, bool value = false) : on_(n, value ? 1 : 0) {}

  std::size_t size() const { return on_.size(); }
  bool operator[](std::size_t n) const { return on_[n] != 0; }
  void set(std::size_t n, bool v) { on_[n] = v ? 1 : 0; }
  std::size_t count() const { return static_cast<std::size_t>(std::count(on_.begin(), on_.end(), std::uint8_t{1})); }
  bool empty() const { return count() == 0; }
  bool operator==(const Mask&) const = default;

  friend Mask operator&(const Mask& a, const Mask& b) { return combine(a, b, [](bool x, bool y) { return x && y; }); }
  friend Mask operator|(const Mask& a, const Mask& b) { return combine(a, b, [](bool x, bool y) { return x || y; }); }
  /// Set difference a \ b.
  friend Mask operator-(const Mask& a, const Mask& b) { return combine(a, b, [](bool x, bool y) { return x && !y; }); }

  /// True when every cell of this mask is also in `o`.
  bool subset_of(const Mask& o) const {
    for (std::size_t n = 0; n < on_.size(); ++n)
      if (on_[n] && !o.on_[n]) return false;
    return true;
  }

 private:
  template <class Op>
  static Mask combine(const Mask& a, const Mask& b, Op op) {
    if (a.size() != b.size()) throw ArgumentError("mask size mismatch");
    Mask m(a.size());
    for (std::size_t n = 0; n < a.size(); ++n) m.on_[n] = op(a[n], b[n]) ? 1 : 0;
    return m;
  }
  std::vector<std::uint8_t> on_;
};

/// Cell-centred field with Rank components, stored component-major.
template <int Rank>
class Field {
 public:
  static constexpr int rank = Rank;

  explicit Field(const GridSpec& grid) : grid_(grid) {
    for (auto& c : comp_) c.assign(grid.size(), 0.0);
  }

  /// Samples f at every cell centre; f returns double (Rank 1) or Vec3.
  template <class F>
  static Field sample(const GridSpec& grid, F&& f) {
    Field out(grid);
    const auto n = static_cast<std::ptrdiff_t>(grid.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < n; ++c) {
      const auto v = f(grid.center(static_cast<std::size_t>(c)));
      if constexpr (Rank == 1) {
        out.comp_[0][c] = v;
      } else {
        for (int a = 0; a < Rank; ++a) out.comp_[a][c] = v[a];
      }
    }
    return out;
  }

  static Field constant(const GridSpec& grid, const std::array<double, Rank>& value) {
    Field out(grid);
    for (int a = 0; a < Rank; ++a) std::fill(out.comp_[a].begin(), out.comp_[a].end(), value[a]);
    return out;
  }

  const GridSpec& grid() const { return grid_; }
  std::vector<double>& component(int a) { return comp_[a]; }
  const std::vector<double>& component(int a) const { return comp_[a]; }
  double& operator()(int a, std::size_t n) { return comp_[a][n]; }
  double operator()(int a, std::size_t n) const { return comp_[a][n]; }

  /// Pointwise Euclidean magnitude.
  double magnitude(std::size_t n) const {
    if constexpr (Rank == 1) {
      return std::abs(comp_[0][n]);
    } else {
      double s = 0.0;
      for (int a = 0; a < Rank; ++a) s += comp_[a][n] * comp_[a][n];
      return std::sqrt(s);
    }
  }

  Field& operator*=(double s) {
    for (auto& c : comp_)
      for (double& x : c) x *= s;
    return *this;
  }
  friend Field operator*(double s, Field f) { return f *= s; }
  friend Field operator+(Field a, const Field& b) {
    check_same(a, b);
    for (int c = 0; c < Rank; ++c)
      for (std::size_t n = 0; n < a.comp_[c].size(); ++n) a.comp_[c][n] += b.comp_[c][n];
    return a;
  }
  friend Field operator-(Field a, const Field& b) {
    check_same(a, b);
    for (int c = 0; c < Rank; ++c)
      for (std::size_t n = 0; n < a.comp_[c].size(); ++n) a.comp_[c][n] -= b.comp_[c][n];
    return a;
  }

  bool all_finite() const {
    for (const auto& c : comp_)
      for (double x : c)
        if (!std::isfinite(x)) return false;
    return true;
  }

  static void check_same(const Field& a, const Field& b) {
    if (!a.grid_.same_layout(b.grid_)) throw ArgumentError("fields live on different grids");
  }

 private:
  GridSpec grid_;
  std::array<std::vector<double>, Rank> comp_;
};

using ScalarField = Field<1>;
using VectorField = Field<3>;

template <int R1, int R2>
void require_same_grid(const Field<R1>& a, const Field<R2>& b) {
  if (!a.grid().same_layout(b.grid())) throw ArgumentError("fields live on different grids");
}

inline void require_mask_fits(const GridSpec& grid, const Mask& m) {
  if (m.size() != grid.size()) throw ArgumentError("mask does not match the grid");
}

/// Runs body(n) for every cell, in parallel; body must only write cell n.
template <class Body>
void for_each_cell(const GridSpec& grid, Body&& body) {
  const auto n = static_cast<std::ptrdiff_t>(grid.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < n; ++c) body(static_cast<std::size_t>(c));
}

/// Midpoint-rule integral of a per-cell integrand over a mask, summed
/// pairwise in cell order.
template <class Integrand>
double integrate(const GridSpec& grid, const Mask& mask, Integrand&& f) {
  require_mask_fits(grid, mask);
  std::vector<double> terms(grid.size(), 0.0);
  for_each_cell(grid, [&](std::size_t n) {
    if (mask[n]) terms[n] = f(n);
  });
  return pairwise_sum(terms) * grid.cell_volume();
}

}  // namespace mhdflux
