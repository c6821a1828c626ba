#pragma once

#include <optional>

#include "mhdflux/besov.hpp"
#include "mhdflux/mollify.hpp"

namespace mhdflux {

/// Midpoint-rule integrals of K per-cell integrands at once, each summed
/// pairwise in cell order.
template <std::size_t K, class Integrand>
std::array<double, K> integrate_many(const GridSpec& grid, const Mask& mask, Integrand&& f) {
  require_mask_fits(grid, mask);
  std::array<std::vector<double>, K> terms;
  for (auto& t : terms) t.assign(grid.size(), 0.0);
  for_each_cell(grid, [&](std::size_t c) {
    if (!mask[c]) return;
    std::array<double, K> v{};
    f(c, v);
    for (std::size_t k = 0; k < K; ++k) terms[k][c] = v[k];
  });
  std::array<double, K> out;
  for (std::size_t k = 0; k < K; ++k) out[k] = pairwise_sum(terms[k]) * grid.cell_volume();
  return out;
}

/// Split of int (A_i B_j)^l d_j(theta C_i^l) through the commutator
/// identity. band_* integrate against C_i^l d_j theta over the band,
/// interior_* against theta d_j C_i^l over interior(h - l); the defect
/// entries carry their minus sign. total is the unsplit integral.
struct TermParts {
  double band_resolved = 0.0;
  double interior_resolved = 0.0;
  double band_increment = 0.0;
  double interior_increment = 0.0;
  double band_defect = 0.0;
  double interior_defect = 0.0;
  double total = 0.0;

  double resolved() const { return band_resolved + interior_resolved; }
  double sum() const { return band_resolved + interior_resolved + band_increment + interior_increment + band_defect + interior_defect; }
  TermParts& operator+=(const TermParts& o) {
    band_resolved += o.band_resolved;
    interior_resolved += o.interior_resolved;
    band_increment += o.band_increment;
    interior_increment += o.interior_increment;
    band_defect += o.band_defect;
    interior_defect += o.interior_defect;
    total += o.total;
    return *this;
  }
  TermParts operator-() const {
    return {-band_resolved, -interior_resolved, -band_increment, -interior_increment, -band_defect, -interior_defect, -total};
  }
};

struct RegionBookkeeping {
  double support_measure = 0.0;   // discrete Omega^l
  double band_measure = 0.0;      // band(h, l)
  double interior_measure = 0.0;  // interior(h - l)
  double ambiguous_volume = 0.0;  // cells within depth h without a unique projection
  std::size_t band_cells_outside_support = 0;
};

/// Cross-helicity flux parts, arranged like the energy flux: each convective
/// term split as TermParts plus the post-integration-by-parts band forms.
struct CrossHelicityFlux {
  std::array<TermParts, 4> parts;  // K1..K4
  double k5 = 0.0;                 // -int theta b^l . grad pi^l
  double k13_direct = 0.0;         // int_band (u^l . grad theta)(u^l . b^l)
  double k2_band = 0.0;            // -int_band (b^l . grad theta)|b^l|^2/2
  double k4_band = 0.0;            // -int_band (b^l . grad theta)|u^l|^2/2
  double k5_band = 0.0;            // int_band pi^l (b^l . grad theta)
  std::optional<std::array<double, 5>> divergence_form;

  std::array<double, 5> totals() const { return {parts[0].total, parts[1].total, parts[2].total, parts[3].total, k5}; }
  double total() const {
    const auto t = totals();
    return (((t[0] + t[1]) + t[2]) + t[3]) + t[4];
  }
};

struct FluxBreakdown {
  double h = 0.0;
  double l = 0.0;

  double i11 = 0.0, r11 = 0.0, r12 = 0.0, r13 = 0.0, r14 = 0.0;
  double i21 = 0.0;
  std::array<double, 4> i22{};
  double i31 = 0.0;
  std::array<double, 4> i32{};
  double i41 = 0.0;
  std::array<double, 4> i42{};
  double i21_plus_i41_direct = 0.0;
  double i5 = 0.0;
  std::array<double, 5> k{};

  struct Totals {
    double I1 = 0.0, I2 = 0.0, I3 = 0.0, I4 = 0.0, I5 = 0.0, I = 0.0, K = 0.0;
  } totals;

  // Unsplit terms and pre-integration-by-parts forms.
  std::array<TermParts, 4> i_parts;  // I1..I4
  double i11_pre_ibp = 0.0;
  double i31_pre_ibp = 0.0;
  double i21_plus_i41_assembled = 0.0;
  std::optional<std::array<double, 5>> i_divergence_form;
  CrossHelicityFlux cross;
  RegionBookkeeping regions;
};

struct FluxOptions {
  /// Also evaluate every term from its divergence form
  /// -int div(A (x) B)^l . theta C^l (three extra convolutions per product).
  bool divergence_form = true;
};

namespace detail {

using Components = std::array<std::vector<double>, 3>;
using Gradient = std::array<Components, 3>;  // g[i][j] = d_j f_i

struct Mollified {
  Components value;
  Gradient gradient;
};

inline Mollified mollify_vector(const MollifierKernel& k, const VectorField& f) {
  Mollified m;
  for (int i = 0; i < 3; ++i) {
    auto r = convolve_all(k, f.component(i), {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    m.value[i] = std::move(r[0]);
    for (int j = 0; j < 3; ++j) m.gradient[i][j] = std::move(r[1 + j]);
  }
  return m;
}

inline Derivative unit_derivative(int a) {
  Derivative d{0, 0, 0};
  d[a] = 1;
  return d;
}

/// Masks and cut-off shared by every term of one breakdown.
struct FluxContext {
  const GridSpec& grid;
  Mask support;
  Mask band;
  Mask interior;
  CutoffField cut;
  RegionBookkeeping regions;
};

inline FluxContext make_context(const GridSpec& grid, double h, const MollifierKernel& kernel) {
  const DomainGeometry& g = grid.geometry();
  const double l = kernel.l();
  if (!kernel.grid().same_layout(grid)) throw ArgumentError("kernel and fields live on different grids");
  if (g.has_boundary() && !(h < g.h0())) throw RangeError("h = " + std::to_string(h) + " must stay below h0 = " + std::to_string(g.h0()));
  const CutoffProfile profile(h, l);
  const CellGeometry cg = cell_geometry(grid);
  FluxContext ctx{grid, kernel.support(), Mask(grid.size()), Mask(grid.size()), sample_cutoff(grid, cg, profile), {}};
  if (g.has_boundary()) {
    const Mask band = region_mask(grid, cg, Region::band(h, l));
    ctx.band = band & ctx.support;
    ctx.regions.band_cells_outside_support = (band - ctx.support).count();
    ctx.interior = region_mask(grid, cg, Region::interior(h - l)) & ctx.support;
    ctx.regions.ambiguous_volume = ambiguous_volume(grid, cg, h);
  } else {
    ctx.interior = ctx.support;
  }
  ctx.regions.support_measure = measure(grid, ctx.support);
  ctx.regions.band_measure = measure(grid, ctx.band);
  ctx.regions.interior_measure = measure(grid, ctx.interior);
  return ctx;
}

/// Target of a product term: C^l and its gradient.
struct Target {
  const Components* value;
  const Gradient* gradient;
};

/// Split contribution of the (i, j) entry of (A_i B_j)^l against d_j(theta C_i^l).
inline TermParts pair_parts(const FluxContext& ctx, const std::vector<double>& product, const std::vector<double>& a_raw,
                            const std::vector<double>& a_moll, const std::vector<double>& b_raw, const std::vector<double>& b_moll,
                            const Target& target, int i, int j) {
  const auto& c_moll = (*target.value)[i];
  const auto& c_grad = (*target.gradient)[i][j];
  const auto v = integrate_many<7>(ctx.grid, ctx.support, [&](std::size_t c, std::array<double, 7>& out) {
    const double incr = product[c] - a_raw[c] * b_moll[c] - a_moll[c] * b_raw[c] + a_raw[c] * b_raw[c];
    const double def = (a_raw[c] - a_moll[c]) * (b_raw[c] - b_moll[c]);
    const double res = a_moll[c] * b_moll[c];
    const double band_factor = ctx.band[c] ? c_moll[c] * ctx.cut.gradient[c][j] : 0.0;
    const double interior_factor = ctx.interior[c] ? ctx.cut.theta[c] * c_grad[c] : 0.0;
    out = {res * band_factor, res * interior_factor, incr * band_factor, incr * interior_factor, -def * band_factor, -def * interior_factor,
           product[c] * (band_factor + interior_factor)};
  });
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
}

/// -int theta C^l_i d_j P, the divergence-form contribution of one entry.
inline double divergence_pair(const FluxContext& ctx, const std::vector<double>& dproduct, const std::vector<double>& c_moll) {
  return -integrate(ctx.grid, ctx.support, [&](std::size_t c) { return ctx.cut.theta[c] * c_moll[c] * dproduct[c]; });
}

inline TermParts sum_pairs(const std::array<std::array<TermParts, 3>, 3>& p) {
  TermParts t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t += p[i][j];
  return t;
}

inline double sum_pairs(const std::array<std::array<double, 3>, 3>& p) {
  double t = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t += p[i][j];
  return t;
}

inline std::vector<double> product_of(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> p(a.size());
  for (std::size_t c = 0; c < a.size(); ++c) p[c] = a[c] * b[c];
  return p;
}

}  // namespace detail

/// Energy and cross-helicity flux breakdowns of one snapshot at one (h, l).
/// The kernel fixes l; the cut-off is theta_{h,l}.
inline FluxBreakdown flux_breakdown(const FieldSnapshot& s, double h, const MollifierKernel& kernel, const FluxOptions& opt = {}) {
  using detail::Gradient;
  using detail::Target;
  const GridSpec& grid = s.grid();
  auto ctx = detail::make_context(grid, h, kernel);
  const auto um = detail::mollify_vector(kernel, s.u);
  const auto bm = detail::mollify_vector(kernel, s.b);
  const auto pm = mollify_with_gradient(kernel, s.pi.component(0));

  const Target tu{&um.value, &um.gradient};
  const Target tb{&bm.value, &bm.gradient};

  // Per-entry parts for T(u,u,u), T(u,u,b), T(b,b,u), T(b,b,b), T(b,u,b),
  // T(b,u,u), T(u,b,b), T(u,b,u).
  enum { UUU, UUB, BBU, BBB, BUB, BUU, UBB, UBU, kTerms };
  std::array<std::array<std::array<TermParts, 3>, 3>, kTerms> parts{};
  std::array<std::array<std::array<double, 3>, 3>, kTerms> divp{};

  auto derivs_for = [&](int i, int j) {
    std::vector<Derivative> d{{0, 0, 0}, detail::unit_derivative(i)};
    if (j != i) d.push_back(detail::unit_derivative(j));
    return d;
  };
  // r = {P, d_i P, d_j P (when j != i)}
  auto pick = [](const std::vector<std::vector<double>>& r, int i, int j, int which) -> const std::vector<double>& {
    if (which == i) return r[1];
    return j == i ? r[1] : r[2];
  };

  // Symmetric products u_i u_j and b_i b_j.
  auto symmetric = [&](const VectorField& f, const detail::Mollified& fm, int t_u, int t_b) {
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) {
        const auto prod = detail::product_of(f.component(i), f.component(j));
        std::vector<std::vector<double>> r;
        if (opt.divergence_form) {
          r = convolve_all(kernel, prod, derivs_for(i, j));
        } else {
          r.push_back(convolve(kernel, prod));
        }
        const auto& P = r[0];
        for (int pass = 0; pass < (i == j ? 1 : 2); ++pass) {
          const int a = pass == 0 ? i : j;
          const int b = pass == 0 ? j : i;
          parts[t_u][a][b] = detail::pair_parts(ctx, P, f.component(a), fm.value[a], f.component(b), fm.value[b], tu, a, b);
          parts[t_b][a][b] = detail::pair_parts(ctx, P, f.component(a), fm.value[a], f.component(b), fm.value[b], tb, a, b);
          if (opt.divergence_form) {
            const auto& dP = pick(r, i, j, b);  // d_b P_ab
            divp[t_u][a][b] = detail::divergence_pair(ctx, dP, um.value[a]);
            divp[t_b][a][b] = detail::divergence_pair(ctx, dP, bm.value[a]);
          }
        }
      }
  };
  symmetric(s.u, um, UUU, UUB);
  symmetric(s.b, bm, BBU, BBB);

  // Mixed products b_i u_j; the transpose gives u_j b_i.
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const auto prod = detail::product_of(s.b.component(i), s.u.component(j));
      std::vector<std::vector<double>> r;
      if (opt.divergence_form) {
        r = convolve_all(kernel, prod, derivs_for(i, j));
      } else {
        r.push_back(convolve(kernel, prod));
      }
      const auto& P = r[0];
      // (b_i u_j)^l against d_j(theta C_i^l): T(b,u,b), T(b,u,u).
      parts[BUB][i][j] = detail::pair_parts(ctx, P, s.b.component(i), bm.value[i], s.u.component(j), um.value[j], tb, i, j);
      parts[BUU][i][j] = detail::pair_parts(ctx, P, s.b.component(i), bm.value[i], s.u.component(j), um.value[j], tu, i, j);
      // (u_j b_i)^l against d_i(theta C_j^l): T(u,b,b), T(u,b,u).
      parts[UBB][j][i] = detail::pair_parts(ctx, P, s.u.component(j), um.value[j], s.b.component(i), bm.value[i], tb, j, i);
      parts[UBU][j][i] = detail::pair_parts(ctx, P, s.u.component(j), um.value[j], s.b.component(i), bm.value[i], tu, j, i);
      if (opt.divergence_form) {
        const auto& dj = pick(r, i, j, j);  // d_j (b_i u_j)^l
        const auto& di = pick(r, i, j, i);  // d_i (u_j b_i)^l
        divp[BUB][i][j] = detail::divergence_pair(ctx, dj, bm.value[i]);
        divp[BUU][i][j] = detail::divergence_pair(ctx, dj, um.value[i]);
        divp[UBB][j][i] = detail::divergence_pair(ctx, di, bm.value[j]);
        divp[UBU][j][i] = detail::divergence_pair(ctx, di, um.value[j]);
      }
    }

  std::array<TermParts, kTerms> T;
  for (int t = 0; t < kTerms; ++t) T[t] = detail::sum_pairs(parts[t]);

  FluxBreakdown f;
  f.h = h;
  f.l = kernel.l();
  f.regions = ctx.regions;
  f.i_parts = {T[UUU], -T[BBU], T[BUB], -T[UBB]};
  f.cross.parts = {T[UUB], -T[BBB], T[BUU], -T[UBU]};

  // Band forms after integration by parts.
  const auto band = integrate_many<9>(grid, ctx.band, [&](std::size_t c, std::array<double, 9>& out) {
    const Vec3& gt = ctx.cut.gradient[c];
    Vec3 u{um.value[0][c], um.value[1][c], um.value[2][c]};
    Vec3 b{bm.value[0][c], bm.value[1][c], bm.value[2][c]};
    const double ug = dot(u, gt), bg = dot(b, gt), uu = dot(u, u), bb = dot(b, b), ub = dot(u, b);
    const double p = pm.value[c];
    out = {0.5 * ug * uu, 0.5 * ug * bb, -bg * ub, p * ug, ug * ub, -0.5 * bg * bb, -0.5 * bg * uu, p * bg, 0.0};
  });
  const auto pressure = integrate_many<2>(grid, ctx.support, [&](std::size_t c, std::array<double, 2>& out) {
    double gu = 0.0, gb = 0.0;
    for (int i = 0; i < 3; ++i) {
      gu += um.value[i][c] * pm.gradient[i][c];
      gb += bm.value[i][c] * pm.gradient[i][c];
    }
    out = {-ctx.cut.theta[c] * gu, -ctx.cut.theta[c] * gb};
  });

  const TermParts& I1 = f.i_parts[0];
  const TermParts& I2 = f.i_parts[1];
  const TermParts& I3 = f.i_parts[2];
  const TermParts& I4 = f.i_parts[3];
  f.i11 = band[0];
  f.i11_pre_ibp = I1.resolved();
  f.r11 = I1.band_increment;
  f.r12 = I1.interior_increment;
  f.r13 = I1.band_defect;
  f.r14 = I1.interior_defect;
  f.i21 = I2.resolved();
  f.i22 = {I2.band_increment, I2.interior_increment, I2.band_defect, I2.interior_defect};
  f.i31 = band[1];
  f.i31_pre_ibp = I3.resolved();
  f.i32 = {I3.band_increment, I3.interior_increment, I3.band_defect, I3.interior_defect};
  f.i41 = I4.resolved();
  f.i42 = {I4.band_increment, I4.interior_increment, I4.band_defect, I4.interior_defect};
  f.i21_plus_i41_assembled = f.i21 + f.i41;
  f.i21_plus_i41_direct = band[2];
  f.i5 = band[3];

  f.cross.k5 = pressure[1];
  f.cross.k13_direct = band[4];
  f.cross.k2_band = band[5];
  f.cross.k4_band = band[6];
  f.cross.k5_band = band[7];
  f.k = f.cross.totals();

  f.totals.I1 = I1.total;
  f.totals.I2 = I2.total;
  f.totals.I3 = I3.total;
  f.totals.I4 = I4.total;
  f.totals.I5 = pressure[0];
  f.totals.I = (((f.totals.I1 + f.totals.I2) + f.totals.I3) + f.totals.I4) + f.totals.I5;
  f.totals.K = f.cross.total();

  if (opt.divergence_form) {
    std::array<double, kTerms> d;
    for (int t = 0; t < kTerms; ++t) d[t] = detail::sum_pairs(divp[t]);
    f.i_divergence_form = std::array<double, 5>{d[UUU], -d[BBU], d[BUB], -d[UBB], pressure[0]};
    f.cross.divergence_form = std::array<double, 5>{d[UUB], -d[BBB], d[BUU], -d[UBU], pressure[1]};
  }
  return f;
}

/// Energy flux breakdown (the cross-helicity part is computed alongside).
inline FluxBreakdown energy_flux_breakdown(const FieldSnapshot& s, double h, const MollifierKernel& kernel, const FluxOptions& opt = {}) {
  return flux_breakdown(s, h, kernel, opt);
}

inline CrossHelicityFlux cross_helicity_flux_breakdown(const FieldSnapshot& s, double h, const MollifierKernel& kernel, const FluxOptions& opt = {}) {
  return flux_breakdown(s, h, kernel, opt).cross;
}

/// Sides of the boundary flux bound
///   ||w^l . grad theta||_{L^3(band)} <= C l^-1 (l^alpha |w|_{B^alpha(interior h/2)} + h^alpha).
struct BoundaryBoundCheck {
  double lhs = 0.0;
  double seminorm = 0.0;
  double seminorm_part = 0.0;  // l^(alpha - 1) * seminorm
  double wall_part = 0.0;      // l^-1 * h^alpha
  double ratio() const {
    const double r = seminorm_part + wall_part;
    return r > 0.0 ? lhs / r : 0.0;
  }
};

inline BoundaryBoundCheck boundary_term_bound_check(const VectorField& w, double h, double alpha, const MollifierKernel& kernel,
                                                    const std::vector<Vec3>& directions) {
  const GridSpec& grid = w.grid();
  const double l = kernel.l();
  if (!(l <= h)) throw ArgumentError("boundary bound needs l <= h");
  const auto ctx = detail::make_context(grid, h, kernel);
  const VectorField wl = mollify(w, kernel);
  BoundaryBoundCheck r;
  const double s = integrate(grid, ctx.band, [&](std::size_t c) {
    const double v = std::abs(wl(0, c) * ctx.cut.gradient[c][0] + wl(1, c) * ctx.cut.gradient[c][1] + wl(2, c) * ctx.cut.gradient[c][2]);
    return v * v * v;
  });
  r.lhs = std::cbrt(s);
  const Mask inner = region_mask(grid, Region::interior(h / 2.0));
  r.seminorm = besov_seminorm(w, alpha, inner, directions).value;
  r.seminorm_part = std::pow(l, alpha - 1.0) * r.seminorm;
  r.wall_part = std::pow(h, alpha) / l;
  return r;
}

struct SteadyResiduals {
  VectorField momentum;   // -div(u (x) u)^l + div(b (x) b)^l - grad pi^l
  VectorField induction;  // -div(b (x) u)^l + div(u (x) b)^l
};

/// Spatial part of the mollified equations on the discrete Omega^l, with
/// every divergence taken on the kernel.
inline SteadyResiduals steady_residuals(const FieldSnapshot& s, const MollifierKernel& kernel) {
  const GridSpec& grid = s.grid();
  if (!kernel.grid().same_layout(grid)) throw ArgumentError("kernel and fields live on different grids");
  SteadyResiduals r{VectorField(grid), VectorField(grid)};
  auto add_div = [&](VectorField& out, const VectorField& A, const VectorField& B, double sign) {
    // out_i += sign * sum_j d_j (A_i B_j)^l
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const auto d = convolve(kernel, detail::product_of(A.component(i), B.component(j)), detail::unit_derivative(j));
        auto& o = out.component(i);
        for (std::size_t c = 0; c < o.size(); ++c) o[c] += sign * d[c];
      }
  };
  add_div(r.momentum, s.u, s.u, -1.0);
  add_div(r.momentum, s.b, s.b, 1.0);
  const auto gp = mollify_with_gradient(kernel, s.pi.component(0));
  for (int i = 0; i < 3; ++i) {
    auto& o = r.momentum.component(i);
    for (std::size_t c = 0; c < o.size(); ++c) o[c] -= gp.gradient[i][c];
  }
  add_div(r.induction, s.b, s.u, -1.0);
  add_div(r.induction, s.u, s.b, 1.0);
  return r;
}

/// Terms bounding the gap between the localized mollified energy and the
/// total energy:
///   J1 = |int_{Omega^l} theta (|f^l|^2 - |f|^2)|
///   J2 = |int_{Omega^l} (theta - 1) |f|^2|
///   J3 = int_{Omega \ Omega^l} |f|^2
struct EnergyGap {
  double j1 = 0.0;
  double j2 = 0.0;
  double j3 = 0.0;
  double sum() const { return j1 + j2 + j3; }
};

struct LocalizedEnergyGap {
  EnergyGap u;
  EnergyGap b;
};

inline EnergyGap energy_gap_of(const VectorField& f, const MollifierKernel& kernel, const CutoffField& cut) {
  const GridSpec& grid = f.grid();
  const VectorField fl = mollify(f, kernel);
  const Mask& support = kernel.support();
  const auto v = integrate_many<2>(grid, support, [&](std::size_t c, std::array<double, 2>& out) {
    double ml = 0.0, m = 0.0;
    for (int a = 0; a < 3; ++a) {
      ml += fl(a, c) * fl(a, c);
      m += f(a, c) * f(a, c);
    }
    out = {cut.theta[c] * (ml - m), (cut.theta[c] - 1.0) * m};
  });
  const Mask outside = domain_mask(grid) - support;
  EnergyGap g;
  g.j1 = std::abs(v[0]);
  g.j2 = std::abs(v[1]);
  g.j3 = integrate(grid, outside, [&](std::size_t c) {
    double m = 0.0;
    for (int a = 0; a < 3; ++a) m += f(a, c) * f(a, c);
    return m;
  });
  return g;
}

inline LocalizedEnergyGap localized_energy_gap(const FieldSnapshot& s, const CutoffProfile& profile, const MollifierKernel& kernel) {
  const GridSpec& grid = s.grid();
  const DomainGeometry& g = grid.geometry();
  if (!kernel.grid().same_layout(grid)) throw ArgumentError("kernel and fields live on different grids");
  if (std::abs(profile.l() - kernel.l()) > 1e-12 * kernel.l()) throw ArgumentError("cut-off width must equal the kernel scale");
  if (g.has_boundary() && !(profile.h() < g.h0())) throw RangeError("h must stay below h0");
  const CutoffField cut = sample_cutoff(grid, cell_geometry(grid), profile);
  return {energy_gap_of(s.u, kernel, cut), energy_gap_of(s.b, kernel, cut)};
}

}  // namespace mhdflux
