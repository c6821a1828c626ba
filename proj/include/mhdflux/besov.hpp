#pragma once

#include <cstdint>
#include <random>
#include <set>

#include "mhdflux/fields.hpp"

namespace mhdflux {

using Offset = std::array<int, 3>;

/// The 26 lattice directions (normalised) followed by `random_count` seeded
/// uniform unit vectors.
inline std::vector<Vec3> default_directions(std::uint64_t seed = 0x5eed, int random_count = 32) {
  std::vector<Vec3> dirs;
  for (int k = -1; k <= 1; ++k)
    for (int j = -1; j <= 1; ++j)
      for (int i = -1; i <= 1; ++i) {
        if (i == 0 && j == 0 && k == 0) continue;
        const Vec3 v{double(i), double(j), double(k)};
        dirs.push_back((1.0 / norm(v)) * v);
      }
  std::mt19937_64 rng(seed);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  for (int n = 0; n < random_count; ++n) {
    const double z = 2.0 * uniform() - 1.0;
    const double phi = 2.0 * M_PI * uniform();
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    dirs.push_back({r * std::cos(phi), r * std::sin(phi), z});
  }
  return dirs;
}

/// Lattice offset nearest to the displacement y.
inline Offset nearest_offset(const GridSpec& grid, const Vec3& y) {
  const Vec3& dx = grid.spacing();
  return {static_cast<int>(std::lround(y[0] / dx[0])), static_cast<int>(std::lround(y[1] / dx[1])),
          static_cast<int>(std::lround(y[2] / dx[2]))};
}

inline double offset_length(const GridSpec& grid, const Offset& o) {
  const Vec3& dx = grid.spacing();
  return norm(Vec3{o[0] * dx[0], o[1] * dx[1], o[2] * dx[2]});
}

/// Sampled |y| for scale l: four per octave from l down to dx, so the set
/// for 2l contains the set for l.
inline std::vector<double> increment_magnitudes(const GridSpec& grid, double l) {
  std::vector<double> m;
  const double floor_scale = grid.min_spacing() * (1.0 - 1e-12);
  for (int k = 0;; ++k) {
    const double s = l * std::exp2(-0.25 * k);
    if (s < floor_scale) break;
    m.push_back(s);
  }
  return m;
}

/// Distinct nonzero lattice offsets for all (direction, magnitude) pairs.
inline std::vector<Offset> sampled_offsets(const GridSpec& grid, const std::vector<double>& magnitudes, const std::vector<Vec3>& directions) {
  std::set<Offset> out;
  for (double m : magnitudes)
    for (const Vec3& d : directions) {
      const Offset o = nearest_offset(grid, m * d);
      if (o != Offset{0, 0, 0}) out.insert(o);
    }
  return {out.begin(), out.end()};
}

/// Every nonzero lattice offset with |y| <= l.
inline std::vector<Offset> lattice_offsets(const GridSpec& grid, double l) {
  const Vec3& dx = grid.spacing();
  int r[3];
  for (int a = 0; a < 3; ++a) r[a] = static_cast<int>(std::floor(l / dx[a] * (1.0 + 1e-12)));
  std::vector<Offset> out;
  for (int k = -r[2]; k <= r[2]; ++k)
    for (int j = -r[1]; j <= r[1]; ++j)
      for (int i = -r[0]; i <= r[0]; ++i) {
        const Offset o{i, j, k};
        if (o == Offset{0, 0, 0}) continue;
        if (offset_length(grid, o) <= l * (1.0 + 1e-12)) out.push_back(o);
      }
  return out;
}

/// Where translated samples may land: both x and x - y in the region (the
/// Besov definition), or x in the region and x - y anywhere in the domain.
enum class TranslationRule { both_in_region, source_in_domain };

/// ||f(.) - f(. - y)||_{L^3} for one lattice offset y. Periodic axes wrap;
/// on walled axes x - y must stay on the grid.
template <int Rank>
double translation_increment(const Field<Rank>& f, const Offset& y, const Mask& region, TranslationRule rule = TranslationRule::both_in_region) {
  const GridSpec& grid = f.grid();
  require_mask_fits(grid, region);
  const Cells& N = grid.cells();
  const DomainGeometry& g = grid.geometry();
  const Mask* source = &region;
  Mask dom;
  if (rule == TranslationRule::source_in_domain) {
    dom = domain_mask(grid);
    source = &dom;
  }
  const double s = integrate(grid, region, [&](std::size_t c) {
    auto p = grid.unravel(c);
    for (int a = 0; a < 3; ++a) {
      p[a] -= y[a];
      if (g.periodic_axis(a)) {
        p[a] = ((p[a] % N[a]) + N[a]) % N[a];
      } else if (p[a] < 0 || p[a] >= N[a]) {
        return 0.0;
      }
    }
    const std::size_t m = grid.index(p[0], p[1], p[2]);
    if (!(*source)[m]) return 0.0;
    double d2 = 0.0;
    for (int a = 0; a < Rank; ++a) {
      const double d = f(a, c) - f(a, m);
      d2 += d * d;
    }
    const double d = std::sqrt(d2);
    return d * d * d;
  });
  return std::cbrt(s);
}

template <int Rank>
double max_translation_increment(const Field<Rank>& f, const std::vector<Offset>& offsets, const Mask& region,
                                 TranslationRule rule = TranslationRule::both_in_region) {
  double best = 0.0;
  for (const auto& o : offsets) best = std::max(best, translation_increment(f, o, region, rule));
  return best;
}

/// Lower estimate of sup_{|y| <= l} ||f(.) - f(. - y)||_{L^3(region)} from
/// the sampled directions.
template <int Rank>
double increment_norm(const Field<Rank>& f, double l, const Mask& region, const std::vector<Vec3>& directions,
                      TranslationRule rule = TranslationRule::both_in_region) {
  if (!(l >= f.grid().max_spacing() * (1.0 - 1e-12))) throw ResolutionError("increment scale below the grid spacing");
  return max_translation_increment(f, sampled_offsets(f.grid(), increment_magnitudes(f.grid(), l), directions), region, rule);
}

/// Exhaustive variant over every lattice offset with |y| <= l.
template <int Rank>
double increment_norm_exhaustive(const Field<Rank>& f, double l, const Mask& region, TranslationRule rule = TranslationRule::both_in_region) {
  if (!(l >= f.grid().max_spacing() * (1.0 - 1e-12))) throw ResolutionError("increment scale below the grid spacing");
  return max_translation_increment(f, lattice_offsets(f.grid(), l), region, rule);
}

/// Diameter of the bounding box of the masked cells (cell extents included).
inline double region_diameter(const GridSpec& grid, const Mask& region) {
  std::array<int, 3> lo{std::numeric_limits<int>::max(), std::numeric_limits<int>::max(), std::numeric_limits<int>::max()};
  std::array<int, 3> hi{-1, -1, -1};
  for (std::size_t c = 0; c < region.size(); ++c) {
    if (!region[c]) continue;
    const auto p = grid.unravel(c);
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  if (hi[0] < 0) return 0.0;
  const Vec3& dx = grid.spacing();
  return norm(Vec3{(hi[0] - lo[0] + 1) * dx[0], (hi[1] - lo[1] + 1) * dx[1], (hi[2] - lo[2] + 1) * dx[2]});
}

/// capped: |y| runs up to `cap`. dyadic_global: |y| runs up to diam / 4.
enum class SeminormRange { dyadic_global, capped };

inline std::string to_string(SeminormRange r) { return r == SeminormRange::capped ? "capped" : "dyadic_global"; }

struct ScaleSample {
  double scale = 0.0;
  double value = 0.0;
};

struct BesovSeminorm {
  double value = 0.0;
  double lp_norm = 0.0;  // ||f||_{L^3(region)}; the full norm is value + lp_norm
  SeminormRange range = SeminormRange::dyadic_global;
  std::vector<ScaleSample> samples;  // (|y|, max increment at |y|)
};

/// max over dyadic |y| in [dx, top] of max_dir ||f(.) - f(. - y)|| / |y|^alpha.
/// alpha = 1 is accepted and gives the Lipschitz-type quotient.
template <int Rank>
BesovSeminorm besov_seminorm(const Field<Rank>& f, double alpha, const Mask& region, const std::vector<Vec3>& directions,
                             SeminormRange range = SeminormRange::dyadic_global, double cap = 0.0) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ArgumentError("Besov exponent must lie in (0, 1]");
  const GridSpec& grid = f.grid();
  BesovSeminorm r;
  r.range = range;
  r.lp_norm = lp_region_norm(f, 3.0, region);
  const double top = range == SeminormRange::capped ? cap : region_diameter(grid, region) / 4.0;
  for (double s = grid.max_spacing(); s <= top * (1.0 + 1e-12); s *= 2.0) {
    const double inc = max_translation_increment(f, sampled_offsets(grid, {s}, directions), region);
    r.samples.push_back({s, inc});
    r.value = std::max(r.value, inc / std::pow(s, alpha));
  }
  return r;
}

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double halfwidth = 0.0;  // two standard errors of the slope
  std::size_t used = 0;
  std::vector<std::size_t> dropped;  // indices of nonpositive samples
};

/// Least squares on (log l, log value). Nonpositive values are dropped;
/// fewer than four remaining samples is an error.
inline ScalingFit scaling_exponent(const std::vector<ScaleSample>& samples) {
  ScalingFit fit;
  std::vector<double> x, y;
  for (std::size_t n = 0; n < samples.size(); ++n) {
    if (!(samples[n].value > 0.0) || !std::isfinite(samples[n].value)) {
      fit.dropped.push_back(n);
      continue;
    }
    if (!(samples[n].scale > 0.0)) throw ArgumentError("scales must be positive");
    x.push_back(std::log(samples[n].scale));
    y.push_back(std::log(samples[n].value));
  }
  if (x.size() < 4) throw InsufficientDataError("scaling fit needs at least 4 positive samples, got " + std::to_string(x.size()));
  {
    auto sorted = x;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw ArgumentError("scaling fit needs distinct scales");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double e = y[k] - (fit.intercept + fit.slope * x[k]);
    rss += e * e;
  }
  fit.halfwidth = 2.0 * std::sqrt(rss / (n - 2.0) / sxx);
  fit.used = x.size();
  return fit;
}

struct BesovReport {
  double alpha_target = 0.0;
  double seminorm_estimate = 0.0;
  double lp_norm = 0.0;
  SeminormRange range = SeminormRange::dyadic_global;
  std::vector<ScaleSample> samples;  // (l, increment_norm), ascending l
  double fitted_slope = 0.0;
  double confidence_halfwidth = 0.0;
  bool fitted = false;
};

/// Increment norms at the given scales, their fitted exponent and the
/// seminorm estimate.
template <int Rank>
BesovReport besov_report(const Field<Rank>& f, double alpha, const Mask& region, std::vector<double> scales,
                         const std::vector<Vec3>& directions, SeminormRange range = SeminormRange::dyadic_global, double cap = 0.0) {
  BesovReport r;
  r.alpha_target = alpha;
  std::sort(scales.begin(), scales.end());
  for (double l : scales) r.samples.push_back({l, increment_norm(f, l, region, directions)});
  const auto semi = besov_seminorm(f, alpha, region, directions, range, cap);
  r.seminorm_estimate = semi.value;
  r.lp_norm = semi.lp_norm;
  r.range = range;
  if (r.samples.size() >= 4) {
    try {
      const auto fit = scaling_exponent(r.samples);
      r.fitted_slope = fit.slope;
      r.confidence_halfwidth = fit.halfwidth;
      r.fitted = true;
    } catch (const InsufficientDataError&) {
    }
  }
  return r;
}

struct WallNormalBesov {
  double value = 0.0;
  std::vector<ScaleSample> per_h;  // (h, ||w.n||_{L^3(shell h)} / h^alpha)
};

namespace detail {
inline void require_boundary(const GridSpec& grid) {
  if (!grid.geometry().has_boundary()) throw UnsupportedError("wall-normal functionals need a domain with a boundary");
}
}  // namespace detail

/// max over sampled h of ||w . n(m(x))||_{L^3(shell h)} / h^alpha.
inline WallNormalBesov wall_normal_besov(const VectorField& w, double alpha, const std::vector<double>& h_samples) {
  const GridSpec& grid = w.grid();
  detail::require_boundary(grid);
  const CellGeometry cg = cell_geometry(grid);
  WallNormalBesov r;
  for (double h : h_samples) {
    const Mask shell = region_mask(grid, cg, Region::shell(h));
    const double s = integrate(grid, shell, [&](std::size_t c) {
      const double wn = std::abs(w(0, c) * cg.normal[c][0] + w(1, c) * cg.normal[c][1] + w(2, c) * cg.normal[c][2]);
      return wn * wn * wn;
    });
    const double ratio = std::cbrt(s) / std::pow(h, alpha);
    r.per_h.push_back({h, ratio});
    r.value = std::max(r.value, ratio);
  }
  return r;
}

/// max over shell(h) of |w . n(m(x))|.
inline double wall_normal_sup(const VectorField& w, double h) {
  const GridSpec& grid = w.grid();
  detail::require_boundary(grid);
  const CellGeometry cg = cell_geometry(grid);
  const Mask shell = region_mask(grid, cg, Region::shell(h));
  double m = 0.0;
  for (std::size_t c = 0; c < grid.size(); ++c)
    if (shell[c]) m = std::max(m, std::abs(w(0, c) * cg.normal[c][0] + w(1, c) * cg.normal[c][1] + w(2, c) * cg.normal[c][2]));
  return m;
}

}  // namespace mhdflux
