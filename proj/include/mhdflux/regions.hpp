#pragma once

#include <limits>
#include <vector>

#include "mhdflux/grid.hpp"

namespace mhdflux {

/// Per-cell boundary data: d(x), n(m(x)), domain membership, and whether
/// the nearest-point projection of the cell centre is ambiguous (box edges
/// and corners, the ball centre).
struct CellGeometry {
  std::vector<double> distance;
  std::vector<Vec3> normal;
  std::vector<std::uint8_t> inside;
  std::vector<std::uint8_t> ambiguous;
};

inline CellGeometry cell_geometry(const GridSpec& grid) {
  const DomainGeometry& g = grid.geometry();
  const std::size_t n = grid.size();
  CellGeometry cg;
  cg.distance.assign(n, std::numeric_limits<double>::infinity());
  cg.normal.assign(n, Vec3{0.0, 0.0, 0.0});
  cg.inside.assign(n, 1);
  cg.ambiguous.assign(n, 0);
  if (!g.has_boundary()) return cg;

  const Cells& N = grid.cells();
  const Vec3& dx = grid.spacing();
  for_each_cell(grid, [&](std::size_t c) {
    const auto ijk = grid.unravel(c);
    if (g.shape() == Shape::ball) {
      const Vec3 x = grid.center(ijk[0], ijk[1], ijk[2]);
      const double r = norm(x);
      if (r >= g.radius()) {
        cg.inside[c] = 0;
        return;
      }
      cg.distance[c] = g.radius() - r;
      if (r == 0.0) {
        cg.ambiguous[c] = 1;
      } else {
        cg.normal[c] = (1.0 / r) * x;
      }
      return;
    }
    // Box: distances in half-integer cell units.
    double best = std::numeric_limits<double>::infinity();
    int ties = 0;
    Vec3 nrm{0.0, 0.0, 0.0};
    for (int a = 0; a < 3; ++a) {
      if (!g.walls()[a]) continue;
      const double lo = (ijk[a] + 0.5) * dx[a];
      const double hi = (N[a] - ijk[a] - 0.5) * dx[a];
      for (int side = 0; side < 2; ++side) {
        const double d = side == 0 ? lo : hi;
        if (d < best) {
          best = d;
          ties = 1;
          nrm = {0.0, 0.0, 0.0};
          nrm[a] = side == 0 ? -1.0 : 1.0;
        } else if (d == best) {
          ++ties;
        }
      }
    }
    cg.distance[c] = best;
    cg.normal[c] = nrm;
    if (ties > 1) cg.ambiguous[c] = 1;
  });
  return cg;
}

/// Subdomain selectors: shell(eps) = {d < eps}, interior(eps) = {d > eps},
/// band(h, l) = {h - l <= d < h}.
struct Region {
  enum class Kind { domain, shell, interior, band };
  Kind kind = Kind::domain;
  double eps = 0.0;  // shell / interior depth, band outer edge h
  double width = 0.0;  // band width l

  static Region domain() { return {Kind::domain, 0.0, 0.0}; }
  static Region shell(double eps) { return {Kind::shell, eps, 0.0}; }
  static Region interior(double eps) { return {Kind::interior, eps, 0.0}; }
  static Region band(double h, double l) { return {Kind::band, h, l}; }
};

inline Mask region_mask(const GridSpec& grid, const CellGeometry& cg, const Region& region) {
  const DomainGeometry& g = grid.geometry();
  if (region.kind != Region::Kind::domain && region.eps >= g.h0())
    throw RangeError("region depth must stay below h0 = " + std::to_string(g.h0()));
  if (region.kind == Region::Kind::band && !(region.width > 0.0 && region.width < region.eps))
    throw ArgumentError("band needs 0 < l < h");
  Mask m(grid.size());
  for (std::size_t c = 0; c < grid.size(); ++c) {
    if (!cg.inside[c]) continue;
    const double d = cg.distance[c];
    const bool clean = cg.ambiguous[c] == 0;
    bool on = false;
    switch (region.kind) {
      case Region::Kind::domain: on = true; break;
      case Region::Kind::shell: on = clean && d < region.eps; break;
      case Region::Kind::interior: on = d > region.eps; break;
      case Region::Kind::band: on = clean && d < region.eps && d >= region.eps - region.width; break;
    }
    m.set(c, on);
  }
  return m;
}

inline Mask region_mask(const GridSpec& grid, const Region& region) { return region_mask(grid, cell_geometry(grid), region); }

/// Volume of cells within depth eps whose projection is ambiguous, i.e. the
/// cells dropped from shell and band masks.
inline double ambiguous_volume(const GridSpec& grid, const CellGeometry& cg, double eps) {
  std::size_t k = 0;
  for (std::size_t c = 0; c < grid.size(); ++c)
    if (cg.inside[c] && cg.ambiguous[c] && cg.distance[c] < eps) ++k;
  return static_cast<double>(k) * grid.cell_volume();
}

inline double measure(const GridSpec& grid, const Mask& m) { return static_cast<double>(m.count()) * grid.cell_volume(); }

/// Cut-off theta and its gradient sampled at every cell. The gradient is
/// zero on ambiguous cells so band integrals skip them consistently.
struct CutoffField {
  std::vector<double> theta;
  std::vector<Vec3> gradient;
};

inline CutoffField sample_cutoff(const GridSpec& grid, const CellGeometry& cg, const CutoffProfile& profile) {
  CutoffField f;
  f.theta.assign(grid.size(), 0.0);
  f.gradient.assign(grid.size(), Vec3{0.0, 0.0, 0.0});
  const bool walls = grid.geometry().has_boundary();
  for_each_cell(grid, [&](std::size_t c) {
    if (!cg.inside[c]) return;
    if (!walls) {
      f.theta[c] = 1.0;
      return;
    }
    const double d = cg.distance[c];
    f.theta[c] = profile.eta(d);
    const double s = profile.eta_prime(d);
    if (s != 0.0 && !cg.ambiguous[c]) f.gradient[c] = (-s) * cg.normal[c];
  });
  return f;
}

}  // namespace mhdflux
