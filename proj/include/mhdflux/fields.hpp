#pragma once

#include <limits>

#include "mhdflux/regions.hpp"

namespace mhdflux {

/// Midpoint-rule L^p norm over masked cells; p = infinity gives the max.
/// Vector fields use the pointwise Euclidean magnitude. Empty mask -> 0.
template <int Rank>
double lp_region_norm(const Field<Rank>& f, double p, const Mask& mask) {
  require_mask_fits(f.grid(), mask);
  if (p == std::numeric_limits<double>::infinity()) {
    double m = 0.0;
    for (std::size_t c = 0; c < mask.size(); ++c)
      if (mask[c]) m = std::max(m, f.magnitude(c));
    return m;
  }
  if (p != 2.0 && p != 3.0) throw ArgumentError("lp_region_norm supports p in {2, 3, inf}");
  const double s = integrate(f.grid(), mask, [&](std::size_t c) { return std::pow(f.magnitude(c), p); });
  return std::pow(s, 1.0 / p);
}

inline Mask domain_mask(const GridSpec& grid) { return region_mask(grid, Region::domain()); }

/// Second-order centred divergence. Periodic axes wrap; walled axes (and
/// every axis of a ball grid) switch to the one-sided second-order stencil
/// on the outermost layer.
inline ScalarField discrete_divergence(const VectorField& v) {
  const GridSpec& grid = v.grid();
  const Cells& N = grid.cells();
  const Vec3& dx = grid.spacing();
  const DomainGeometry& g = grid.geometry();
  ScalarField out(grid);
  for_each_cell(grid, [&](std::size_t c) {
    const auto ijk = grid.unravel(c);
    double div = 0.0;
    for (int a = 0; a < 3; ++a) {
      if (N[a] == 1) continue;
      const auto& f = v.component(a);
      auto at = [&](int shift) {
        auto p = ijk;
        p[a] += shift;
        return f[grid.index(p[0], p[1], p[2])];
      };
      const int i = ijk[a];
      if (g.periodic_axis(a)) {
        auto wrapped = [&](int shift) {
          auto p = ijk;
          p[a] = ((p[a] + shift) % N[a] + N[a]) % N[a];
          return f[grid.index(p[0], p[1], p[2])];
        };
        div += (wrapped(1) - wrapped(-1)) / (2.0 * dx[a]);
      } else if (N[a] < 3) {
        div += N[a] == 2 ? (i == 0 ? at(1) - at(0) : at(0) - at(-1)) / dx[a] : 0.0;
      } else if (i == 0) {
        div += (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * dx[a]);
      } else if (i == N[a] - 1) {
        div += (3.0 * at(0) - 4.0 * at(-1) + at(-2)) / (2.0 * dx[a]);
      } else {
        div += (at(1) - at(-1)) / (2.0 * dx[a]);
      }
    }
    out(0, c) = div;
  });
  return out;
}

/// Accepting tolerances for ||div||_inf relative to ||field||_inf / dx.
inline constexpr double kSpectralDivergenceTolerance = 1e-6;
inline constexpr double kRoughDivergenceTolerance = 1e-2;

/// One instant of (u, b, pi) on a common grid.
struct FieldSnapshot {
  VectorField u;
  VectorField b;
  ScalarField pi;
  double t = 0.0;

  FieldSnapshot(VectorField u_, VectorField b_, ScalarField pi_, double t_ = 0.0)
      : u(std::move(u_)), b(std::move(b_)), pi(std::move(pi_)), t(t_) {
    require_same_grid(u, b);
    require_same_grid(u, pi);
  }

  const GridSpec& grid() const { return u.grid(); }

  /// Relative discrete divergence ||div w||_inf * dx / ||w||_inf over the
  /// domain (0 for a zero field).
  static double relative_divergence(const VectorField& w) {
    const Mask dom = domain_mask(w.grid());
    const double scale = lp_region_norm(w, std::numeric_limits<double>::infinity(), dom);
    if (scale == 0.0) return 0.0;
    const double div = lp_region_norm(discrete_divergence(w), std::numeric_limits<double>::infinity(), dom);
    return div * w.grid().max_spacing() / scale;
  }

  /// Throws ArgumentError when u or b is not discretely solenoidal within
  /// the given relative tolerance, or when any value is non-finite.
  void validate(double relative_tolerance) const {
    if (!u.all_finite() || !b.all_finite() || !pi.all_finite()) throw ArgumentError("snapshot contains non-finite values");
    if (relative_divergence(u) > relative_tolerance) throw ArgumentError("u fails the divergence tolerance");
    if (relative_divergence(b) > relative_tolerance) throw ArgumentError("b fails the divergence tolerance");
  }
};

/// E = int |u|^2 + |b|^2.
inline double total_energy(const FieldSnapshot& s) {
  return integrate(s.grid(), domain_mask(s.grid()), [&](std::size_t c) {
    double e = 0.0;
    for (int a = 0; a < 3; ++a) e += s.u(a, c) * s.u(a, c) + s.b(a, c) * s.b(a, c);
    return e;
  });
}

/// H = int u . b.
inline double cross_helicity(const FieldSnapshot& s) {
  return integrate(s.grid(), domain_mask(s.grid()), [&](std::size_t c) {
    double h = 0.0;
    for (int a = 0; a < 3; ++a) h += s.u(a, c) * s.b(a, c);
    return h;
  });
}

/// Sup norms of u, b, pi over shell(sigma0): the boundedness check.
struct BoundednessReport {
  double sigma0 = 0.0;
  double u_sup = 0.0;
  double b_sup = 0.0;
  double pi_sup = 0.0;
};

inline BoundednessReport boundedness_near_boundary(const FieldSnapshot& s, double sigma0) {
  const Mask shell = region_mask(s.grid(), Region::shell(sigma0));
  const double inf = std::numeric_limits<double>::infinity();
  return {sigma0, lp_region_norm(s.u, inf, shell), lp_region_norm(s.b, inf, shell), lp_region_norm(s.pi, inf, shell)};
}

}  // namespace mhdflux
