#pragma once

#include <chrono>

#include "mhdflux/harness.hpp"

namespace mhdflux {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string measured;
  double seconds = 0.0;
};

struct AcceptanceReport {
  std::vector<CriterionResult> criteria;
  bool passed() const {
    return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.passed; });
  }
};

inline std::string result_line(const CriterionResult& r) {
  char t[32];
  std::snprintf(t, sizeof t, "%.1fs", r.seconds);
  return std::string(r.passed ? "PASS" : "FAIL") + " [" + std::to_string(r.id) + "] " + r.name + ": " + r.measured + " (" + t + ")";
}

namespace acceptance {

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

inline std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline double slope_of(const std::vector<double>& scales, const std::vector<double>& values) {
  std::vector<ScaleSample> s;
  for (std::size_t n = 0; n < scales.size(); ++n) s.push_back({scales[n], values[n]});
  return scaling_exponent(s).slope;
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

/// Smooth seeded pairs on the periodic 32^3 box, direct stencil path.
inline CriterionResult commutator_identity(const Tolerances& tol) {
  CriterionResult r{1, "commutator identity", false, "", 0.0};
  const GridSpec grid(DomainGeometry::periodic_box({1.0, 1.0, 1.0}), {32, 32, 32});
  const double dx = grid.max_spacing();
  std::vector<MollifierKernel> kernels;
  for (double m : {4.0, 8.0}) kernels.push_back(build_kernel(m * dx, KernelShape::polynomial, grid, ConvolutionPath::direct));
  double worst = 0.0;
  for (int pair = 0; pair < 5; ++pair) {
    const VectorField a = smooth_divfree(grid, 100 + 2 * pair, 3);
    const VectorField b = smooth_divfree(grid, 101 + 2 * pair, 3);
    ScalarField f(grid), g(grid);
    f.component(0) = a.component(pair % 3);
    g.component(0) = b.component((pair + 1) % 3);
    const double scale = max_abs(f.component(0)) * max_abs(g.component(0));
    for (const auto& k : kernels) {
      const CommutatorSplit cs = commutator_split(f, g, k);
      for (std::size_t c = 0; c < grid.size(); ++c) {
        const double res = cs.lhs(0, c) - (cs.resolved(0, c) + cs.increment_term(0, c) - cs.defect_term(0, c));
        worst = std::max(worst, std::abs(res) / scale);
      }
    }
  }
  r.passed = worst <= tol.commutator;
  r.measured = "max residual / (max|f| max|g|) = " + sci(worst) + " (limit " + sci(tol.commutator) + ")";
  return r;
}

/// Lacunary alpha = 0.4 field refined along x (2048 x 1 x 1, y and z
/// folded), l = 16..256 dx.
inline CriterionResult mollification_rates(const Tolerances& tol) {
  CriterionResult r{2, "mollification rates", false, "", 0.0};
  const int n = 2048;
  const double dx = 1.0 / n;
  const GridSpec grid(DomainGeometry::periodic_box({1.0, dx, dx}), {n, 1, 1});
  const VectorField f = rough_divfree(grid, 0.4, 7, 9);
  const Mask all = domain_mask(grid);
  std::vector<double> scales, err, grad;
  for (int m = 16; m <= 256; m *= 2) {
    const double l = m * dx;
    const MollifierKernel k = build_kernel(l, KernelShape::polynomial, grid, ConvolutionPath::fft);
    const VectorField fl = mollify(f, k);
    err.push_back(lp_region_norm(VectorField(f - fl), 3.0, all));
    std::vector<double> g2(grid.size(), 0.0);
    for (int i = 0; i < 3; ++i) {
      const auto d = convolve_all(k, f.component(i), {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
      for (const auto& dj : d)
        for (std::size_t c = 0; c < grid.size(); ++c) g2[c] += dj[c] * dj[c];
    }
    ScalarField gm(grid);
    for (std::size_t c = 0; c < grid.size(); ++c) gm(0, c) = std::sqrt(g2[c]);
    grad.push_back(lp_region_norm(gm, 3.0, all));
    scales.push_back(l);
  }
  const double se = slope_of(scales, err);
  const double sg = slope_of(scales, grad);
  r.passed = se >= tol.mollify_error_slope_min && se <= tol.mollify_error_slope_max && sg >= tol.mollify_gradient_slope_min &&
             sg <= tol.mollify_gradient_slope_max;
  r.measured = "slope ||f - f^l||_3 = " + fixed3(se) + " in [" + fixed3(tol.mollify_error_slope_min) + ", " + fixed3(tol.mollify_error_slope_max) +
               "], slope ||grad f^l||_3 = " + fixed3(sg) + " in [" + fixed3(tol.mollify_gradient_slope_min) + ", " +
               fixed3(tol.mollify_gradient_slope_max) + "]";
  return r;
}

/// wall_box 64^3, l = 4 dx. h = 16 l exceeds h0 on this grid, so the
/// largest admissible multiple h = 7 l is used.
inline CriterionResult cancellation_identity(const Tolerances& tol) {
  CriterionResult r{3, "cancellation identity", false, "", 0.0};
  const GridSpec grid(DomainGeometry::wall_box({1.0, 1.0, 1.0}), {64, 64, 64});
  const double l = 4.0 * grid.max_spacing();
  const double h = 7.0 * l;
  const FieldSnapshot s(wall_compatible_field(grid, 11, 3), wall_compatible_field(grid, 12, 3), ScalarField(grid));
  const MollifierKernel k = build_kernel(l, KernelShape::polynomial, grid, ConvolutionPath::direct);
  const FluxBreakdown f = flux_breakdown(s, h, k, {false});
  const double gap = std::abs(f.i21_plus_i41_assembled - f.i21_plus_i41_direct);
  const double rel = gap / (std::abs(f.i21) + std::abs(f.i41) + tol.cancellation_epsilon);
  r.passed = rel <= tol.cancellation;
  r.measured = "|(i21 + i41) - direct| / (|i21| + |i41|) = " + sci(rel) + " (limit " + sci(tol.cancellation) + "; assembled " +
               sci(f.i21_plus_i41_assembled) + ", direct " + sci(f.i21_plus_i41_direct) + ", h = 7l)";
  return r;
}

/// alfven_steady on the periodic 64^3 box, l = 4..32 dx. With u = b the
/// convective terms cancel pairwise and I, K vanish identically; the rate is
/// then measured on the term family |I1| + |I2| + |I3| + |I4| + |I5| (and
/// likewise for K).
inline CriterionResult smooth_flux_vanishing(const Tolerances& tol) {
  CriterionResult r{4, "smooth flux vanishing", false, "", 0.0};
  const GridSpec grid(DomainGeometry::periodic_box({1.0, 1.0, 1.0}), {64, 64, 64});
  const FieldSnapshot s = alfven_steady(grid, 3, 2);
  std::vector<double> scales, I, K, fi, fk;
  for (int m = 4; m <= 32; m *= 2) {
    const double l = m * grid.max_spacing();
    const MollifierKernel k = build_kernel(l, KernelShape::polynomial, grid, ConvolutionPath::fft);
    const FluxBreakdown f = flux_breakdown(s, 16.0 * l, k, {false});
    scales.push_back(l);
    I.push_back(std::abs(f.totals.I));
    K.push_back(std::abs(f.totals.K));
    fi.push_back(std::abs(f.totals.I1) + std::abs(f.totals.I2) + std::abs(f.totals.I3) + std::abs(f.totals.I4) + std::abs(f.totals.I5));
    double sk = 0.0;
    for (double x : f.k) sk += std::abs(x);
    fk.push_back(sk);
  }
  auto rate = [&](const std::vector<double>& total, const std::vector<double>& family, const char* name, bool& ok) {
    bool vanishes = true;
    for (std::size_t n = 0; n < total.size(); ++n) vanishes = vanishes && total[n] <= 1e-12 * family[n];
    const double sf = slope_of(scales, family);
    std::string out = std::string("|") + name + "| ";
    if (vanishes) {
      out += "identically 0 (max " + sci(max_abs(total)) + ")";
    } else {
      double st = -1e300;
      try {
        st = slope_of(scales, total);
      } catch (const Error&) {
      }
      out += "slope " + fixed3(st);
      vanishes = st >= tol.smooth_flux_slope_min;
    }
    ok = vanishes && sf >= tol.smooth_flux_slope_min;
    return out + ", family slope " + fixed3(sf);
  };
  bool oki = false, okk = false;
  const std::string mi = rate(I, fi, "I", oki);
  const std::string mk = rate(K, fk, "K", okk);
  r.passed = oki && okk;
  r.measured = mi + "; " + mk + " (minimum " + fixed3(tol.smooth_flux_slope_min) + ")";
  return r;
}

/// Rough u (alpha = 0.4), b = pi = 0 on a periodic 1024 x 1024 x 1 slab
/// (z folded), l = 8..64 dx.
inline CriterionResult rough_interior_rate(const Tolerances& tol) {
  CriterionResult r{5, "rough interior rate", false, "", 0.0};
  const int n = 1024;
  const double dx = 1.0 / n;
  const GridSpec grid(DomainGeometry::periodic_box({1.0, 1.0, dx}), {n, n, 1});
  const FieldSnapshot s(rough_divfree(grid, 0.4, 8, 8), VectorField(grid), ScalarField(grid));
  std::vector<double> scales, r12;
  for (int m = 8; m <= 64; m *= 2) {
    const double l = m * dx;
    const MollifierKernel k = build_kernel(l, KernelShape::polynomial, grid, ConvolutionPath::fft);
    const FluxBreakdown f = flux_breakdown(s, 16.0 * l, k, {false});
    scales.push_back(l);
    r12.push_back(std::abs(f.r12));
  }
  const double sl = slope_of(scales, r12);
  r.passed = std::abs(sl - tol.rough_r12_slope_target) <= tol.rough_r12_slope_halfwidth;
  r.measured = "slope |R12| = " + fixed3(sl) + ", target " + fixed3(tol.rough_r12_slope_target) + " +- " + fixed3(tol.rough_r12_slope_halfwidth);
  return r;
}

struct SlabSweep {
  std::vector<double> scales;
  std::vector<double> ratios;
  std::vector<EnergyGap> gaps;
};

/// Wall-compatible field on a slab walled in x (4096 x 256 x 1, z folded),
/// l = 4..32 dx with h = 16 l.
inline SlabSweep slab_sweep() {
  const int nx = 4096, ny = 256;
  const double dx = 1.0 / nx;
  const GridSpec grid(DomainGeometry::wall_box({1.0, ny * dx, dx}, {true, false, false}), {nx, ny, 1});
  const VectorField w = wall_compatible_field(grid, 5, 2);
  const FieldSnapshot s(w, VectorField(grid), ScalarField(grid));
  const auto dirs = default_directions();
  SlabSweep out;
  for (int m = 4; m <= 32; m *= 2) {
    const double l = m * dx;
    const double h = 16.0 * l;
    const MollifierKernel k = build_kernel(l, KernelShape::polynomial, grid, ConvolutionPath::fft);
    out.scales.push_back(l);
    out.ratios.push_back(boundary_term_bound_check(w, h, 1.0, k, dirs).ratio());
    out.gaps.push_back(localized_energy_gap(s, CutoffProfile(h, l), k).u);
  }
  return out;
}

inline CriterionResult boundary_bound(const Tolerances& tol, const SlabSweep& sweep) {
  CriterionResult r{6, "boundary bound", false, "", 0.0};
  const auto [lo, hi] = std::minmax_element(sweep.ratios.begin(), sweep.ratios.end());
  const double band = *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
  r.passed = band <= tol.boundary_ratio_band;
  std::string list;
  for (double x : sweep.ratios) list += (list.empty() ? "" : ", ") + sci(x);
  r.measured = "ratio max/min = " + fixed3(band) + " (limit " + fixed3(tol.boundary_ratio_band) + "; ratios " + list + ")";
  return r;
}

inline CriterionResult energy_gap(const Tolerances& tol, const SlabSweep& sweep) {
  CriterionResult r{8, "energy gap", false, "", 0.0};
  bool monotone = true;
  std::vector<double> j1;
  for (std::size_t n = 0; n < sweep.gaps.size(); ++n) {
    j1.push_back(sweep.gaps[n].j1);
    if (n > 0) monotone = monotone && sweep.gaps[n - 1].sum() < sweep.gaps[n].sum();
  }
  const double sl = slope_of(sweep.scales, j1);
  r.passed = monotone && sl >= tol.energy_gap_slope_min;
  r.measured = std::string("J1+J2+J3 ") + (monotone ? "decreases" : "does not decrease") + " monotonically as l decreases, J1 slope = " + fixed3(sl) +
               " (minimum " + fixed3(tol.energy_gap_slope_min) + ")";
  return r;
}

inline double max_abs_field(const VectorField& f) {
  double m = 0.0;
  for (int a = 0; a < 3; ++a) m = std::max(m, max_abs(f.component(a)));
  return m;
}

/// Helicity, steady residuals and constant-field fluxes.
inline CriterionResult conserved_quantities(const Tolerances& tol) {
  CriterionResult r{7, "conserved quantities", false, "", 0.0};
  const GridSpec grid(DomainGeometry::periodic_box({1.0, 1.0, 1.0}), {32, 32, 32});
  double hel = 0.0, steady = 0.0;
  for (double sign : {1.0, -1.0}) {
    const FieldSnapshot s = alfven_steady(grid, 4, 2, sign);
    const double e = total_energy(s);
    hel = std::max(hel, std::abs(cross_helicity(s) - sign * e / 2.0) / (e / 2.0));
    const double l = 4.0 * grid.max_spacing();
    const MollifierKernel k = build_kernel(l, KernelShape::polynomial, grid, ConvolutionPath::direct);
    const SteadyResiduals res = steady_residuals(s, k);
    const double scale = max_abs_field(s.u) * max_abs_field(s.u) / l;
    steady = std::max(steady, std::max(max_abs_field(res.momentum), max_abs_field(res.induction)) / scale);
  }

  double flux = 0.0;
  const Vec3 cu{0.3, -0.2, 0.5}, cb{0.1, 0.4, -0.3};
  const double cpi = 0.7;
  const GridSpec periodic = grid;
  const GridSpec walled(DomainGeometry::wall_box({1.0, 1.0, 1.0}), {32, 32, 32});
  for (const GridSpec* g : {&periodic, &walled}) {
    const Mask dom = domain_mask(*g);
    VectorField u(*g), b(*g);
    ScalarField pi(*g);
    for (std::size_t c = 0; c < g->size(); ++c) {
      if (!dom[c]) continue;
      for (int a = 0; a < 3; ++a) {
        u(a, c) = cu[a];
        b(a, c) = cb[a];
      }
      pi(0, c) = cpi;
    }
    const FieldSnapshot s(std::move(u), std::move(b), std::move(pi));
    const double l = 4.0 * g->max_spacing();
    const double h = 12.0 * g->max_spacing();
    const MollifierKernel k = build_kernel(l, KernelShape::polynomial, *g, ConvolutionPath::direct);
    const FluxBreakdown f = flux_breakdown(s, h, k);
    const double speed = norm(cu) + norm(cb);
    const double scale = (speed * speed * speed + cpi * speed) * g->geometry().volume() / l;
    double worst = 0.0;
    for (const auto& t : flux_terms()) worst = std::max(worst, std::abs(t.get(f)));
    for (const auto& p : f.i_parts) worst = std::max({worst, std::abs(p.sum()), std::abs(p.total)});
    for (const auto& p : f.cross.parts) worst = std::max({worst, std::abs(p.sum()), std::abs(p.total)});
    for (double x : *f.i_divergence_form) worst = std::max(worst, std::abs(x));
    for (double x : *f.cross.divergence_form) worst = std::max(worst, std::abs(x));
    worst = std::max({worst, std::abs(f.i11_pre_ibp), std::abs(f.i31_pre_ibp), std::abs(f.i21_plus_i41_assembled), std::abs(f.cross.k13_direct),
                      std::abs(f.cross.k2_band), std::abs(f.cross.k4_band), std::abs(f.cross.k5_band)});
    flux = std::max(flux, worst / scale);
  }
  r.passed = hel <= tol.helicity_relative && steady <= tol.steady_residual && flux <= tol.constant_flux;
  r.measured = "|H -+ E/2| / (E/2) = " + sci(hel) + " (limit " + sci(tol.helicity_relative) + "), steady residual / scale = " + sci(steady) +
               " (limit " + sci(tol.steady_residual) + "), constant-field flux / scale = " + sci(flux) + " (limit " + sci(tol.constant_flux) + ")";
  return r;
}

/// The configuration used for the determinism check: a walled 32^3 box
/// with smooth fields and four l values at fixed h.
inline std::string determinism_config_text() {
  return "geometry.shape = wall_box\n"
         "grid.cells = 32 32 32\n"
         "field.type = smooth_divfree\n"
         "field.seed = 21\n"
         "field.modes = 2\n"
         "sweep.l_cells = 4 5 6 7\n"
         "sweep.h_rule = fixed\n"
         "sweep.h = 0.375\n";
}

inline CriterionResult determinism(const Tolerances&) {
  CriterionResult r{9, "determinism", false, "", 0.0};
  const SweepConfig cfg = SweepConfig::from(Config::parse(determinism_config_text(), "determinism"));
  const int before = thread_count();
  std::string json[2], csv[2];
  const int threads[2] = {1, 8};
  for (int n = 0; n < 2; ++n) {
    set_thread_count(threads[n]);
    const SweepReport rep = run_sweep(cfg);
    json[n] = to_json(rep).dump(2);
    csv[n] = sweep_csv(rep);
  }
  set_thread_count(before);
  r.passed = json[0] == json[1] && csv[0] == csv[1];
  r.measured = std::string("1-thread and 8-thread reports ") + (r.passed ? "are byte-identical" : "differ") + " (" + std::to_string(json[0].size()) +
               " JSON bytes, " + std::to_string(csv[0].size()) + " CSV bytes)";
  return r;
}

}  // namespace acceptance

/// Runs the selected criteria (all when `ids` is empty) in numeric order,
/// reporting each result as soon as it is known.
inline AcceptanceReport run_acceptance(const Tolerances& tol, const std::vector<int>& ids = {},
                                       const std::function<void(const CriterionResult&)>& on_result = {}) {
  auto wanted = [&](int id) { return ids.empty() || std::find(ids.begin(), ids.end(), id) != ids.end(); };
  AcceptanceReport report;
  std::optional<acceptance::SlabSweep> slab;
  auto timed = [&](int id, auto&& run) {
    if (!wanted(id)) return;
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r = run();
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (on_result) on_result(r);
    report.criteria.push_back(r);
  };
  timed(1, [&] { return acceptance::commutator_identity(tol); });
  timed(2, [&] { return acceptance::mollification_rates(tol); });
  timed(3, [&] { return acceptance::cancellation_identity(tol); });
  timed(4, [&] { return acceptance::smooth_flux_vanishing(tol); });
  timed(5, [&] { return acceptance::rough_interior_rate(tol); });
  timed(6, [&] {
    slab = acceptance::slab_sweep();
    return acceptance::boundary_bound(tol, *slab);
  });
  timed(7, [&] { return acceptance::conserved_quantities(tol); });
  timed(8, [&] {
    if (!slab) slab = acceptance::slab_sweep();
    return acceptance::energy_gap(tol, *slab);
  });
  timed(9, [&] { return acceptance::determinism(tol); });
  return report;
}

inline Json to_json(const AcceptanceReport& a) {
  Json j;
  j["passed"] = a.passed();
  j["criteria"] = Json::array();
  for (const auto& c : a.criteria) j["criteria"].push_back(Json{{"id", c.id}, {"name", c.name}, {"passed", c.passed}, {"measured", c.measured}});
  return j;
}

}  // namespace mhdflux
