#pragma once

#include <filesystem>
#include <set>

#include "mhdflux/config.hpp"
#include "mhdflux/io.hpp"
#include "mhdflux/report.hpp"
#include "mhdflux/synthetic.hpp"

namespace mhdflux {

/// Acceptance thresholds, overridable through the tolerances.* section.
struct Tolerances {
  double commutator = 1e-12;
  double mollify_error_slope_min = 0.30;
  double mollify_error_slope_max = 0.50;
  double mollify_gradient_slope_min = -0.70;
  double mollify_gradient_slope_max = -0.50;
  double cancellation = 1e-10;
  double cancellation_epsilon = 1e-300;
  double smooth_flux_slope_min = 1.8;
  double rough_r12_slope_target = 0.2;
  double rough_r12_slope_halfwidth = 0.15;
  double boundary_ratio_band = 3.0;
  double helicity_relative = 1e-12;
  double steady_residual = 1e-8;
  double constant_flux = 1e-12;
  double energy_gap_slope_min = 1.8;
  double divergence_spectral = kSpectralDivergenceTolerance;
  double divergence_rough = kRoughDivergenceTolerance;

  template <class F>
  void visit(F&& f) {
    f("commutator", commutator);
    f("mollify_error_slope_min", mollify_error_slope_min);
    f("mollify_error_slope_max", mollify_error_slope_max);
    f("mollify_gradient_slope_min", mollify_gradient_slope_min);
    f("mollify_gradient_slope_max", mollify_gradient_slope_max);
    f("cancellation", cancellation);
    f("cancellation_epsilon", cancellation_epsilon);
    f("smooth_flux_slope_min", smooth_flux_slope_min);
    f("rough_r12_slope_target", rough_r12_slope_target);
    f("rough_r12_slope_halfwidth", rough_r12_slope_halfwidth);
    f("boundary_ratio_band", boundary_ratio_band);
    f("helicity_relative", helicity_relative);
    f("steady_residual", steady_residual);
    f("constant_flux", constant_flux);
    f("energy_gap_slope_min", energy_gap_slope_min);
    f("divergence_spectral", divergence_spectral);
    f("divergence_rough", divergence_rough);
  }
  template <class F>
  void visit(F&& f) const {
    const_cast<Tolerances*>(this)->visit([&](const char* name, double& v) { f(name, static_cast<const double&>(v)); });
  }
};

struct FieldSpec {
  std::string type = "smooth_divfree";
  std::uint64_t seed = 1;
  int modes = 2;
  double alpha = 0.4;
  int octaves = 4;
  double sign = 1.0;
  Vec3 u{0.0, 0.0, 0.0};
  Vec3 b{0.0, 0.0, 0.0};
  double pi = 0.0;
  std::string path;
};

struct HRule {
  enum Kind { fixed, ratio } kind = ratio;
  double h = 0.0;
  double factor = 16.0;
  double of(double l) const { return kind == fixed ? h : factor * l; }
};

struct AnalysisSpec {
  bool besov = true;
  double besov_alpha = 0.0;  // 0: use field.alpha for rough fields, 1/3 otherwise
  int directions = 32;
  std::uint64_t direction_seed = 0x5eed;
  bool divergence_form = true;
  bool energy_gap = true;
  bool boundary_bound = true;
  double wall_alpha = 1.0;
  double sigma0 = 0.0;  // 0: use h of each point
  double divergence_tolerance = kRoughDivergenceTolerance;
};

struct SweepConfig {
  Shape shape = Shape::periodic_box;
  Vec3 extent{1.0, 1.0, 1.0};
  std::array<bool, 3> walls{true, true, true};
  double radius = 0.5;
  Cells cells{32, 32, 32};
  FieldSpec field;
  std::vector<double> l;
  HRule h_rule;
  KernelShape kernel_shape = KernelShape::polynomial;
  ConvolutionPath path = ConvolutionPath::automatic;
  AnalysisSpec analysis;
  std::string output_dir = "out";
  std::string output_format = "json";
  Tolerances tolerances;

  DomainGeometry geometry() const {
    switch (shape) {
      case Shape::periodic_box: return DomainGeometry::periodic_box(extent);
      case Shape::wall_box: return DomainGeometry::wall_box(extent, walls);
      case Shape::ball: return DomainGeometry::ball(radius);
    }
    throw ConfigError("geometry.shape: unknown shape");
  }
  GridSpec grid() const { return GridSpec(geometry(), cells); }

  /// Every setting with its resolved value, in a fixed order.
  std::vector<std::pair<std::string, std::string>> echo() const {
    std::vector<std::pair<std::string, std::string>> e;
    auto num = [](double v) { return format_number(v); };
    auto vec = [&](const Vec3& v) { return num(v[0]) + " " + num(v[1]) + " " + num(v[2]); };
    e.emplace_back("geometry.shape", to_string(shape));
    e.emplace_back("geometry.extent", vec(extent));
    e.emplace_back("geometry.walls", std::to_string(walls[0]) + " " + std::to_string(walls[1]) + " " + std::to_string(walls[2]));
    e.emplace_back("geometry.radius", num(radius));
    e.emplace_back("grid.cells", std::to_string(cells[0]) + " " + std::to_string(cells[1]) + " " + std::to_string(cells[2]));
    e.emplace_back("field.type", field.type);
    e.emplace_back("field.seed", std::to_string(field.seed));
    e.emplace_back("field.modes", std::to_string(field.modes));
    e.emplace_back("field.alpha", num(field.alpha));
    e.emplace_back("field.octaves", std::to_string(field.octaves));
    e.emplace_back("field.sign", num(field.sign));
    e.emplace_back("field.u", vec(field.u));
    e.emplace_back("field.b", vec(field.b));
    e.emplace_back("field.pi", num(field.pi));
    e.emplace_back("field.path", field.path);
    std::string ls;
    for (double x : l) ls += (ls.empty() ? "" : " ") + num(x);
    e.emplace_back("sweep.l", ls);
    e.emplace_back("sweep.h_rule", h_rule.kind == HRule::fixed ? "fixed" : "ratio");
    e.emplace_back("sweep.h", num(h_rule.h));
    e.emplace_back("sweep.h_ratio", num(h_rule.factor));
    e.emplace_back("kernel.shape", to_string(kernel_shape));
    e.emplace_back("kernel.path", to_string(path));
    e.emplace_back("analysis.besov", analysis.besov ? "true" : "false");
    e.emplace_back("analysis.besov_alpha", num(analysis.besov_alpha));
    e.emplace_back("analysis.directions", std::to_string(analysis.directions));
    e.emplace_back("analysis.direction_seed", std::to_string(analysis.direction_seed));
    e.emplace_back("analysis.divergence_form", analysis.divergence_form ? "true" : "false");
    e.emplace_back("analysis.energy_gap", analysis.energy_gap ? "true" : "false");
    e.emplace_back("analysis.boundary_bound", analysis.boundary_bound ? "true" : "false");
    e.emplace_back("analysis.wall_alpha", num(analysis.wall_alpha));
    e.emplace_back("analysis.sigma0", num(analysis.sigma0));
    e.emplace_back("analysis.divergence_tolerance", num(analysis.divergence_tolerance));
    e.emplace_back("output.dir", output_dir);
    e.emplace_back("output.format", output_format);
    tolerances.visit([&](const char* name, const double& v) { e.emplace_back(std::string("tolerances.") + name, num(v)); });
    return e;
  }

  static SweepConfig from(const Config& c);
};

namespace detail {

inline Vec3 vec3_of(const Config& c, const std::string& key, const Vec3& fallback) {
  if (!c.has(key)) return fallback;
  const auto v = c.numbers(key);
  if (v.size() != 3) throw ConfigError(key + ": expected three numbers");
  return {v[0], v[1], v[2]};
}

inline const std::set<std::string>& field_types() {
  static const std::set<std::string> t{"smooth_divfree", "rough_divfree", "alfven_steady", "wall_compatible", "constant", "load"};
  return t;
}

}  // namespace detail

/// Validates every key and value. Sweep scales below 4 dx are rejected here.
inline SweepConfig SweepConfig::from(const Config& c) {
  SweepConfig s;
  std::set<std::string> known;
  for (const auto& [k, v] : s.echo()) known.insert(k);
  known.insert("sweep.l_cells");
  for (const auto& [k, v] : c.entries())
    if (!known.count(k)) throw ConfigError("unknown key '" + k + "'");

  try {
    s.shape = shape_from_string(c.text("geometry.shape", "periodic_box"));
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("geometry.shape: ") + e.what());
  }
  s.extent = detail::vec3_of(c, "geometry.extent", s.extent);
  if (c.has("geometry.walls")) {
    const auto w = c.integers("geometry.walls");
    if (w.size() != 3) throw ConfigError("geometry.walls: expected three 0/1 flags");
    for (int a = 0; a < 3; ++a) s.walls[a] = w[a] != 0;
  }
  s.radius = c.number("geometry.radius", s.radius);
  if (s.shape == Shape::ball) s.extent = {2.0 * s.radius, 2.0 * s.radius, 2.0 * s.radius};
  if (c.has("grid.cells")) {
    const auto n = c.integers("grid.cells");
    if (n.size() != 3) throw ConfigError("grid.cells: expected three integers");
    for (int a = 0; a < 3; ++a) {
      if (n[a] < 1 || n[a] > (1 << 20)) throw ConfigError("grid.cells: cell counts must lie in [1, 2^20]");
      s.cells[a] = static_cast<int>(n[a]);
    }
  }
  try {
    (void)s.grid();
  } catch (const Error& e) {
    throw ConfigError(std::string("geometry: ") + e.what());
  }

  FieldSpec& f = s.field;
  f.type = c.text("field.type", f.type);
  if (!detail::field_types().count(f.type)) throw ConfigError("field.type: unknown generator '" + f.type + "'");
  const long long seed = c.integer("field.seed", static_cast<long long>(f.seed));
  if (seed < 0) throw ConfigError("field.seed: must be nonnegative");
  f.seed = static_cast<std::uint64_t>(seed);
  f.modes = static_cast<int>(c.integer("field.modes", f.modes));
  if (f.modes < 0) throw ConfigError("field.modes: must be nonnegative");
  f.alpha = c.number("field.alpha", f.alpha);
  if (f.type == "rough_divfree" && !(f.alpha > 0.0 && f.alpha < 1.0)) throw ConfigError("field.alpha: must lie in (0, 1)");
  f.octaves = static_cast<int>(c.integer("field.octaves", f.octaves));
  if (f.octaves < 1) throw ConfigError("field.octaves: must be at least 1");
  f.sign = c.number("field.sign", f.sign);
  if (f.sign != 1.0 && f.sign != -1.0) throw ConfigError("field.sign: must be 1 or -1");
  f.u = detail::vec3_of(c, "field.u", f.u);
  f.b = detail::vec3_of(c, "field.b", f.b);
  f.pi = c.number("field.pi", f.pi);
  f.path = c.text("field.path", "");
  if (f.type == "load" && f.path.empty()) throw ConfigError("field.path: required when field.type = load");
  if (f.type == "wall_compatible" && s.shape != Shape::wall_box) throw ConfigError("field.type: wall_compatible needs geometry.shape = wall_box");
  if ((f.type == "smooth_divfree" || f.type == "rough_divfree" || f.type == "alfven_steady") && s.shape == Shape::ball)
    throw ConfigError("field.type: " + f.type + " needs a box geometry");

  const GridSpec grid = s.grid();
  if (c.has("sweep.l") && c.has("sweep.l_cells")) throw ConfigError("sweep.l and sweep.l_cells are mutually exclusive");
  if (c.has("sweep.l")) s.l = c.numbers("sweep.l");
  for (double m : c.numbers("sweep.l_cells")) s.l.push_back(m * grid.max_spacing());
  const double four_dx = 4.0 * grid.max_spacing();
  for (double l : s.l)
    if (!(l >= four_dx * (1.0 - 1e-12)))
      throw ConfigError("sweep.l: l = " + format_number(l) + " violates l >= 4 dx (4 dx = " + format_number(four_dx) + ")");
  {
    auto sorted = s.l;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw ConfigError("sweep.l: scales must be distinct");
  }
  const std::string rule = c.text("sweep.h_rule", c.has("sweep.h") ? "fixed" : "ratio");
  if (rule == "fixed") {
    s.h_rule.kind = HRule::fixed;
    if (!c.has("sweep.h")) throw ConfigError("sweep.h: required when sweep.h_rule = fixed");
  } else if (rule == "ratio") {
    s.h_rule.kind = HRule::ratio;
  } else {
    throw ConfigError("sweep.h_rule: expected fixed or ratio");
  }
  s.h_rule.h = c.number("sweep.h", 0.0);
  s.h_rule.factor = c.number("sweep.h_ratio", s.h_rule.factor);
  if (s.h_rule.kind == HRule::fixed && !(s.h_rule.h > 0.0)) throw ConfigError("sweep.h: must be positive");
  if (s.h_rule.kind == HRule::ratio && !(s.h_rule.factor > 1.0)) throw ConfigError("sweep.h_ratio: must exceed 1");
  for (double l : s.l)
    if (!(l < s.h_rule.of(l))) throw ConfigError("sweep.h: h must exceed l at every sweep point (l = " + format_number(l) + ")");

  try {
    s.kernel_shape = kernel_shape_from_string(c.text("kernel.shape", "polynomial"));
    s.path = convolution_path_from_string(c.text("kernel.path", "automatic"));
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("kernel: ") + e.what());
  }

  AnalysisSpec& a = s.analysis;
  a.besov = c.flag("analysis.besov", a.besov);
  a.besov_alpha = c.number("analysis.besov_alpha", a.besov_alpha);
  if (a.besov_alpha < 0.0 || a.besov_alpha > 1.0) throw ConfigError("analysis.besov_alpha: must lie in (0, 1], or 0 for the default");
  a.directions = static_cast<int>(c.integer("analysis.directions", a.directions));
  if (a.directions < 0) throw ConfigError("analysis.directions: must be nonnegative");
  a.direction_seed = static_cast<std::uint64_t>(c.integer("analysis.direction_seed", static_cast<long long>(a.direction_seed)));
  a.divergence_form = c.flag("analysis.divergence_form", a.divergence_form);
  a.energy_gap = c.flag("analysis.energy_gap", a.energy_gap);
  a.boundary_bound = c.flag("analysis.boundary_bound", a.boundary_bound);
  a.wall_alpha = c.number("analysis.wall_alpha", a.wall_alpha);
  if (!(a.wall_alpha > 0.0 && a.wall_alpha <= 1.0)) throw ConfigError("analysis.wall_alpha: must lie in (0, 1]");
  a.sigma0 = c.number("analysis.sigma0", a.sigma0);
  if (a.sigma0 < 0.0) throw ConfigError("analysis.sigma0: must be nonnegative");
  a.divergence_tolerance = c.number("analysis.divergence_tolerance", a.divergence_tolerance);

  s.output_dir = c.text("output.dir", s.output_dir);
  s.output_format = c.text("output.format", s.output_format);
  if (s.output_format != "json" && s.output_format != "csv") throw ConfigError("output.format: expected json or csv");

  s.tolerances.visit([&](const char* name, double& v) {
    const std::string key = std::string("tolerances.") + name;
    v = c.number(key, v);
    if (!(v >= 0.0) && std::string(name).find("slope") == std::string::npos) throw ConfigError(key + ": must be nonnegative");
  });
  return s;
}

/// Builds (or loads) the snapshot described by the field section.
inline FieldSnapshot make_snapshot(const SweepConfig& cfg) {
  const GridSpec grid = cfg.grid();
  const FieldSpec& f = cfg.field;
  if (f.type == "smooth_divfree")
    return FieldSnapshot(smooth_divfree(grid, f.seed, f.modes), smooth_divfree(grid, f.seed + 1, f.modes), ScalarField(grid));
  if (f.type == "rough_divfree") return FieldSnapshot(rough_divfree(grid, f.alpha, f.seed, f.octaves), VectorField(grid), ScalarField(grid));
  if (f.type == "alfven_steady") return alfven_steady(grid, f.seed, f.modes, f.sign);
  if (f.type == "wall_compatible")
    return FieldSnapshot(wall_compatible_field(grid, f.seed, f.modes), wall_compatible_field(grid, f.seed + 1, f.modes), ScalarField(grid));
  if (f.type == "constant") {
    const Mask dom = domain_mask(grid);
    VectorField u(grid), b(grid);
    ScalarField pi(grid);
    for (std::size_t c = 0; c < grid.size(); ++c) {
      if (!dom[c]) continue;
      for (int a = 0; a < 3; ++a) {
        u(a, c) = f.u[a];
        b(a, c) = f.b[a];
      }
      pi(0, c) = f.pi;
    }
    return FieldSnapshot(std::move(u), std::move(b), std::move(pi));
  }
  FieldSnapshot s = read_snapshot(f.path);
  if (!s.grid().same_layout(grid)) throw ConfigError("field.path: snapshot grid does not match geometry and grid.cells");
  return s;
}

struct WallFunctionals {
  double normal_sup_u = 0.0;
  double normal_sup_b = 0.0;
  WallNormalBesov besov_u;
  WallNormalBesov besov_b;
};

struct SweepPoint {
  std::size_t index = 0;
  double l = 0.0;
  double h = 0.0;
  FluxBreakdown flux;
  std::optional<LocalizedEnergyGap> energy_gap;
  std::optional<BoundaryBoundCheck> bound_u;
  std::optional<BoundaryBoundCheck> bound_b;
  std::optional<WallFunctionals> wall;
  std::optional<BoundednessReport> boundedness;
};

struct TermFit {
  std::string term;
  bool ok = false;
  ScalingFit fit;
  std::string error;
};

struct FieldSummary {
  double energy = 0.0;
  double cross_helicity = 0.0;
  double divergence_u = 0.0;
  double divergence_b = 0.0;
};

struct SweepReport {
  std::vector<std::pair<std::string, std::string>> config;
  FieldSummary fields;
  std::optional<BesovReport> besov;
  std::vector<SweepPoint> results;
  std::vector<TermFit> fits;
};

namespace detail {

/// Rethrows a library error with the sweep point prefixed, keeping its kind.
template <class F>
auto at_point(const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ResolutionError& e) {
    throw ResolutionError(where + ": " + e.what());
  } catch (const RangeError& e) {
    throw RangeError(where + ": " + e.what());
  } catch (const DomainError& e) {
    throw DomainError(where + ": " + e.what());
  } catch (const UnsupportedError& e) {
    throw UnsupportedError(where + ": " + e.what());
  } catch (const ArgumentError& e) {
    throw ArgumentError(where + ": " + e.what());
  } catch (const InsufficientDataError& e) {
    throw InsufficientDataError(where + ": " + e.what());
  }
}

inline double default_besov_alpha(const SweepConfig& cfg) {
  if (cfg.analysis.besov_alpha > 0.0) return cfg.analysis.besov_alpha;
  return cfg.field.type == "rough_divfree" ? cfg.field.alpha : 1.0 / 3.0;
}

inline std::vector<std::pair<std::string, std::function<double(const SweepPoint&)>>> fitted_quantities(const SweepConfig& cfg) {
  std::vector<std::pair<std::string, std::function<double(const SweepPoint&)>>> q;
  for (const auto& t : flux_terms()) q.emplace_back(t.name, [get = t.get](const SweepPoint& p) { return std::abs(get(p.flux)); });
  if (cfg.analysis.energy_gap) {
    q.emplace_back("energy_gap.u.j1", [](const SweepPoint& p) { return p.energy_gap->u.j1; });
    q.emplace_back("energy_gap.u.sum", [](const SweepPoint& p) { return p.energy_gap->u.sum(); });
    q.emplace_back("energy_gap.b.j1", [](const SweepPoint& p) { return p.energy_gap->b.j1; });
    q.emplace_back("energy_gap.b.sum", [](const SweepPoint& p) { return p.energy_gap->b.sum(); });
  }
  return q;
}

}  // namespace detail

/// Runs every sweep point in config order. Each point is data-parallel
/// internally; the report does not depend on the thread count.
inline SweepReport run_sweep(const SweepConfig& cfg) {
  SweepReport r;
  r.config = cfg.echo();
  const FieldSnapshot s = make_snapshot(cfg);
  if (!s.u.all_finite() || !s.b.all_finite() || !s.pi.all_finite()) throw ArgumentError("snapshot contains non-finite values");
  r.fields = {total_energy(s), cross_helicity(s), FieldSnapshot::relative_divergence(s.u), FieldSnapshot::relative_divergence(s.b)};
  if (r.fields.divergence_u > cfg.analysis.divergence_tolerance || r.fields.divergence_b > cfg.analysis.divergence_tolerance)
    throw ArgumentError("snapshot fails the divergence tolerance " + format_number(cfg.analysis.divergence_tolerance));

  const GridSpec& grid = s.grid();
  const DomainGeometry& g = grid.geometry();
  const auto dirs = default_directions(cfg.analysis.direction_seed, cfg.analysis.directions);
  if (cfg.analysis.besov && !cfg.l.empty())
    r.besov = besov_report(s.u, detail::default_besov_alpha(cfg), domain_mask(grid), cfg.l, dirs);

  for (std::size_t n = 0; n < cfg.l.size(); ++n) {
    const double l = cfg.l[n];
    const double h = cfg.h_rule.of(l);
    const std::string where = "sweep point " + std::to_string(n) + " (l = " + format_number(l) + ", h = " + format_number(h) + ")";
    r.results.push_back(detail::at_point(where, [&] {
      SweepPoint p;
      p.index = n;
      p.l = l;
      p.h = h;
      const MollifierKernel k = build_kernel(l, cfg.kernel_shape, grid, cfg.path);
      p.flux = flux_breakdown(s, h, k, {cfg.analysis.divergence_form});
      if (cfg.analysis.energy_gap) p.energy_gap = localized_energy_gap(s, CutoffProfile(h, l), k);
      if (g.has_boundary()) {
        if (cfg.analysis.boundary_bound) {
          p.bound_u = boundary_term_bound_check(s.u, h, cfg.analysis.wall_alpha, k, dirs);
          p.bound_b = boundary_term_bound_check(s.b, h, cfg.analysis.wall_alpha, k, dirs);
        }
        WallFunctionals w;
        w.normal_sup_u = wall_normal_sup(s.u, h);
        w.normal_sup_b = wall_normal_sup(s.b, h);
        w.besov_u = wall_normal_besov(s.u, cfg.analysis.wall_alpha, {h});
        w.besov_b = wall_normal_besov(s.b, cfg.analysis.wall_alpha, {h});
        p.wall = w;
        const double sigma0 = cfg.analysis.sigma0 > 0.0 ? cfg.analysis.sigma0 : h;
        p.boundedness = boundedness_near_boundary(s, sigma0);
      }
      return p;
    }));
  }

  for (const auto& [name, value] : detail::fitted_quantities(cfg)) {
    TermFit t;
    t.term = name;
    std::vector<ScaleSample> samples;
    for (const auto& p : r.results) samples.push_back({p.l, value(p)});
    try {
      t.fit = scaling_exponent(samples);
      t.ok = true;
    } catch (const Error& e) {
      t.error = e.what();
    }
    r.fits.push_back(t);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Report serialization.

inline Json to_json(const EnergyGap& g) { return Json{{"j1", g.j1}, {"j2", g.j2}, {"j3", g.j3}, {"sum", g.sum()}}; }

inline EnergyGap energy_gap_from_json(const Json& j) { return {j.at("j1").get<double>(), j.at("j2").get<double>(), j.at("j3").get<double>()}; }

inline Json to_json(const BoundaryBoundCheck& b) {
  return Json{{"lhs", b.lhs}, {"seminorm", b.seminorm}, {"seminorm_part", b.seminorm_part}, {"wall_part", b.wall_part}, {"ratio", b.ratio()}};
}

inline BoundaryBoundCheck boundary_bound_from_json(const Json& j) {
  BoundaryBoundCheck b;
  b.lhs = j.at("lhs").get<double>();
  b.seminorm = j.at("seminorm").get<double>();
  b.seminorm_part = j.at("seminorm_part").get<double>();
  b.wall_part = j.at("wall_part").get<double>();
  return b;
}

inline Json to_json(const WallNormalBesov& w) { return Json{{"value", w.value}, {"per_h", to_json(w.per_h)}}; }

inline WallNormalBesov wall_normal_besov_from_json(const Json& j) { return {j.at("value").get<double>(), samples_from_json(j.at("per_h"))}; }

template <class T, class F>
Json optional_json(const std::optional<T>& v, F&& f) {
  if (!v) return nullptr;
  return f(*v);
}

inline Json to_json(const SweepPoint& p) {
  Json j;
  j["index"] = p.index;
  j["l"] = p.l;
  j["h"] = p.h;
  j["flux"] = to_json(p.flux);
  j["energy_gap"] = optional_json(p.energy_gap, [](const LocalizedEnergyGap& g) { return Json{{"u", to_json(g.u)}, {"b", to_json(g.b)}}; });
  j["boundary_bound"] = p.bound_u ? Json{{"u", to_json(*p.bound_u)}, {"b", to_json(*p.bound_b)}} : Json(nullptr);
  j["wall"] = optional_json(p.wall, [](const WallFunctionals& w) {
    return Json{{"normal_sup_u", w.normal_sup_u}, {"normal_sup_b", w.normal_sup_b}, {"besov_u", to_json(w.besov_u)}, {"besov_b", to_json(w.besov_b)}};
  });
  j["boundedness"] = optional_json(p.boundedness, [](const BoundednessReport& b) {
    return Json{{"sigma0", b.sigma0}, {"u_sup", b.u_sup}, {"b_sup", b.b_sup}, {"pi_sup", b.pi_sup}};
  });
  return j;
}

inline SweepPoint sweep_point_from_json(const Json& j) {
  SweepPoint p;
  p.index = j.at("index").get<std::size_t>();
  p.l = j.at("l").get<double>();
  p.h = j.at("h").get<double>();
  p.flux = flux_breakdown_from_json(j.at("flux"));
  if (!j.at("energy_gap").is_null())
    p.energy_gap = LocalizedEnergyGap{energy_gap_from_json(j["energy_gap"].at("u")), energy_gap_from_json(j["energy_gap"].at("b"))};
  if (!j.at("boundary_bound").is_null()) {
    p.bound_u = boundary_bound_from_json(j["boundary_bound"].at("u"));
    p.bound_b = boundary_bound_from_json(j["boundary_bound"].at("b"));
  }
  if (!j.at("wall").is_null()) {
    const Json& w = j["wall"];
    p.wall = WallFunctionals{w.at("normal_sup_u").get<double>(), w.at("normal_sup_b").get<double>(), wall_normal_besov_from_json(w.at("besov_u")),
                             wall_normal_besov_from_json(w.at("besov_b"))};
  }
  if (!j.at("boundedness").is_null()) {
    const Json& b = j["boundedness"];
    p.boundedness = BoundednessReport{b.at("sigma0").get<double>(), b.at("u_sup").get<double>(), b.at("b_sup").get<double>(), b.at("pi_sup").get<double>()};
  }
  return p;
}

inline Json to_json(const TermFit& t) {
  Json j;
  j["term"] = t.term;
  if (t.ok) {
    j["slope"] = t.fit.slope;
    j["intercept"] = t.fit.intercept;
    j["halfwidth"] = t.fit.halfwidth;
    j["used"] = t.fit.used;
    j["dropped"] = t.fit.dropped;
  } else {
    j["error"] = t.error;
  }
  return j;
}

inline TermFit term_fit_from_json(const Json& j) {
  TermFit t;
  t.term = j.at("term").get<std::string>();
  if (j.contains("error")) {
    t.error = j["error"].get<std::string>();
    return t;
  }
  t.ok = true;
  t.fit.slope = j.at("slope").get<double>();
  t.fit.intercept = j.at("intercept").get<double>();
  t.fit.halfwidth = j.at("halfwidth").get<double>();
  t.fit.used = j.at("used").get<std::size_t>();
  t.fit.dropped = j.at("dropped").get<std::vector<std::size_t>>();
  return t;
}

inline Json config_json(const std::vector<std::pair<std::string, std::string>>& echo) {
  Json c = Json::object();
  for (const auto& [k, v] : echo) c[k] = v;
  return c;
}

inline Json to_json(const SweepReport& r) {
  Json j;
  j["config"] = config_json(r.config);
  j["fields"] = Json{{"energy", r.fields.energy},
                     {"cross_helicity", r.fields.cross_helicity},
                     {"divergence_u", r.fields.divergence_u},
                     {"divergence_b", r.fields.divergence_b}};
  j["besov"] = optional_json(r.besov, [](const BesovReport& b) { return to_json(b); });
  j["results"] = Json::array();
  for (const auto& p : r.results) j["results"].push_back(to_json(p));
  j["fits"] = Json::array();
  for (const auto& t : r.fits) j["fits"].push_back(to_json(t));
  return j;
}

inline SweepReport sweep_report_from_json(const Json& j) {
  SweepReport r;
  for (const auto& [k, v] : j.at("config").items()) r.config.emplace_back(k, v.get<std::string>());
  const Json& f = j.at("fields");
  r.fields = {f.at("energy").get<double>(), f.at("cross_helicity").get<double>(), f.at("divergence_u").get<double>(), f.at("divergence_b").get<double>()};
  if (!j.at("besov").is_null()) r.besov = besov_report_from_json(j["besov"]);
  for (const auto& p : j.at("results")) r.results.push_back(sweep_point_from_json(p));
  for (const auto& t : j.at("fits")) r.fits.push_back(term_fit_from_json(t));
  return r;
}

/// CSV: one row per (sweep point, flux term).
inline std::string sweep_csv(const SweepReport& r) {
  std::string out = kFluxCsvHeader;
  for (const auto& p : r.results) out += flux_csv_rows(p.flux);
  return out;
}

inline std::string config_comment_block(const std::vector<std::pair<std::string, std::string>>& echo) {
  std::string out;
  for (const auto& [k, v] : echo) out += "# " + k + " = " + v + "\n";
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

/// Writes <dir>/<stem>.json, or <dir>/<stem>.csv with the config echoed as
/// a leading comment block. Returns the written path.
inline std::filesystem::path emit_report(const SweepReport& r, const std::string& format, const std::filesystem::path& dir,
                                         const std::string& stem = "sweep") {
  if (format == "json") {
    const auto path = dir / (stem + ".json");
    write_text(path, to_json(r).dump(2) + "\n");
    return path;
  }
  if (format == "csv") {
    const auto path = dir / (stem + ".csv");
    write_text(path, config_comment_block(r.config) + sweep_csv(r));
    return path;
  }
  throw ArgumentError("unknown report format '" + format + "'");
}

}  // namespace mhdflux
