#pragma once

#include <cstdio>
#include <functional>

#include "json.hpp"
#include "mhdflux/flux.hpp"

namespace mhdflux {

using Json = nlohmann::ordered_json;

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Named scalar entries of a FluxBreakdown in report order. CSV rows and
/// the flat part of the JSON object use exactly these names.
struct FluxTerm {
  std::string name;
  std::function<double(const FluxBreakdown&)> get;
  std::function<void(FluxBreakdown&, double)> set;
};

inline const std::vector<FluxTerm>& flux_terms() {
  static const std::vector<FluxTerm> terms = [] {
    std::vector<FluxTerm> t;
    auto scalar = [&](std::string name, double FluxBreakdown::*m) {
      t.push_back({std::move(name), [m](const FluxBreakdown& f) { return f.*m; }, [m](FluxBreakdown& f, double v) { f.*m = v; }});
    };
    auto part = [&](const std::string& stem, std::array<double, 4> FluxBreakdown::*m) {
      for (int n = 0; n < 4; ++n)
        t.push_back({stem + "_" + std::to_string(n + 1), [m, n](const FluxBreakdown& f) { return (f.*m)[n]; },
                     [m, n](FluxBreakdown& f, double v) { (f.*m)[n] = v; }});
    };
    scalar("i11", &FluxBreakdown::i11);
    scalar("r11", &FluxBreakdown::r11);
    scalar("r12", &FluxBreakdown::r12);
    scalar("r13", &FluxBreakdown::r13);
    scalar("r14", &FluxBreakdown::r14);
    scalar("i21", &FluxBreakdown::i21);
    part("i22", &FluxBreakdown::i22);
    scalar("i31", &FluxBreakdown::i31);
    part("i32", &FluxBreakdown::i32);
    scalar("i41", &FluxBreakdown::i41);
    part("i42", &FluxBreakdown::i42);
    scalar("i21_plus_i41_direct", &FluxBreakdown::i21_plus_i41_direct);
    scalar("i5", &FluxBreakdown::i5);
    for (int n = 0; n < 5; ++n)
      t.push_back({"k" + std::to_string(n + 1), [n](const FluxBreakdown& f) { return f.k[n]; }, [n](FluxBreakdown& f, double v) { f.k[n] = v; }});
    auto total = [&](const std::string& name, double FluxBreakdown::Totals::*m) {
      t.push_back({"totals." + name, [m](const FluxBreakdown& f) { return f.totals.*m; }, [m](FluxBreakdown& f, double v) { f.totals.*m = v; }});
    };
    total("I1", &FluxBreakdown::Totals::I1);
    total("I2", &FluxBreakdown::Totals::I2);
    total("I3", &FluxBreakdown::Totals::I3);
    total("I4", &FluxBreakdown::Totals::I4);
    total("I5", &FluxBreakdown::Totals::I5);
    total("I", &FluxBreakdown::Totals::I);
    total("K", &FluxBreakdown::Totals::K);
    return t;
  }();
  return terms;
}

inline Json to_json(const TermParts& p) {
  return Json{{"band_resolved", p.band_resolved},           {"interior_resolved", p.interior_resolved}, {"band_increment", p.band_increment},
              {"interior_increment", p.interior_increment}, {"band_defect", p.band_defect},             {"interior_defect", p.interior_defect},
              {"total", p.total}};
}

inline TermParts term_parts_from_json(const Json& j) {
  TermParts p;
  p.band_resolved = j.at("band_resolved").get<double>();
  p.interior_resolved = j.at("interior_resolved").get<double>();
  p.band_increment = j.at("band_increment").get<double>();
  p.interior_increment = j.at("interior_increment").get<double>();
  p.band_defect = j.at("band_defect").get<double>();
  p.interior_defect = j.at("interior_defect").get<double>();
  p.total = j.at("total").get<double>();
  return p;
}

namespace detail {

inline Json optional_array(const std::optional<std::array<double, 5>>& a) {
  if (!a) return nullptr;
  return Json(*a);
}

inline std::optional<std::array<double, 5>> optional_array_from(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::array<double, 5>>();
}

}  // namespace detail

/// Full nested breakdown: the named entries, totals, the mirrored K parts,
/// diagnostics and region bookkeeping.
inline Json to_json(const FluxBreakdown& f) {
  Json j;
  j["h"] = f.h;
  j["l"] = f.l;
  for (const auto& t : flux_terms()) {
    if (t.name.rfind("totals.", 0) == 0) continue;
    j[t.name] = t.get(f);
  }
  j["totals"] = Json{{"I1", f.totals.I1}, {"I2", f.totals.I2}, {"I3", f.totals.I3}, {"I4", f.totals.I4},
                     {"I5", f.totals.I5}, {"I", f.totals.I},   {"K", f.totals.K}};
  Json kb;
  for (int n = 0; n < 4; ++n) kb["k" + std::to_string(n + 1)] = to_json(f.cross.parts[n]);
  kb["k5"] = f.cross.k5;
  kb["k13_direct"] = f.cross.k13_direct;
  kb["k2_band"] = f.cross.k2_band;
  kb["k4_band"] = f.cross.k4_band;
  kb["k5_band"] = f.cross.k5_band;
  kb["divergence_form"] = detail::optional_array(f.cross.divergence_form);
  j["k_breakdown"] = kb;
  Json d;
  Json parts = Json::object();
  for (int n = 0; n < 4; ++n) parts["I" + std::to_string(n + 1)] = to_json(f.i_parts[n]);
  d["i_parts"] = parts;
  d["i11_pre_ibp"] = f.i11_pre_ibp;
  d["i31_pre_ibp"] = f.i31_pre_ibp;
  d["i21_plus_i41_assembled"] = f.i21_plus_i41_assembled;
  d["i_divergence_form"] = detail::optional_array(f.i_divergence_form);
  j["diagnostics"] = d;
  j["regions"] = Json{{"support_measure", f.regions.support_measure},
                      {"band_measure", f.regions.band_measure},
                      {"interior_measure", f.regions.interior_measure},
                      {"ambiguous_volume", f.regions.ambiguous_volume},
                      {"band_cells_outside_support", f.regions.band_cells_outside_support}};
  return j;
}

inline FluxBreakdown flux_breakdown_from_json(const Json& j) {
  FluxBreakdown f;
  f.h = j.at("h").get<double>();
  f.l = j.at("l").get<double>();
  for (const auto& t : flux_terms()) {
    if (t.name.rfind("totals.", 0) == 0) {
      t.set(f, j.at("totals").at(t.name.substr(7)).get<double>());
    } else {
      t.set(f, j.at(t.name).get<double>());
    }
  }
  const Json& kb = j.at("k_breakdown");
  for (int n = 0; n < 4; ++n) f.cross.parts[n] = term_parts_from_json(kb.at("k" + std::to_string(n + 1)));
  f.cross.k5 = kb.at("k5").get<double>();
  f.cross.k13_direct = kb.at("k13_direct").get<double>();
  f.cross.k2_band = kb.at("k2_band").get<double>();
  f.cross.k4_band = kb.at("k4_band").get<double>();
  f.cross.k5_band = kb.at("k5_band").get<double>();
  f.cross.divergence_form = detail::optional_array_from(kb.at("divergence_form"));
  const Json& d = j.at("diagnostics");
  for (int n = 0; n < 4; ++n) f.i_parts[n] = term_parts_from_json(d.at("i_parts").at("I" + std::to_string(n + 1)));
  f.i11_pre_ibp = d.at("i11_pre_ibp").get<double>();
  f.i31_pre_ibp = d.at("i31_pre_ibp").get<double>();
  f.i21_plus_i41_assembled = d.at("i21_plus_i41_assembled").get<double>();
  f.i_divergence_form = detail::optional_array_from(d.at("i_divergence_form"));
  const Json& r = j.at("regions");
  f.regions.support_measure = r.at("support_measure").get<double>();
  f.regions.band_measure = r.at("band_measure").get<double>();
  f.regions.interior_measure = r.at("interior_measure").get<double>();
  f.regions.ambiguous_volume = r.at("ambiguous_volume").get<double>();
  f.regions.band_cells_outside_support = r.at("band_cells_outside_support").get<std::size_t>();
  return f;
}

inline const char* kFluxCsvHeader = "h,l,term_name,value\n";

/// One row per named term: h, l, term_name, value.
inline std::string flux_csv_rows(const FluxBreakdown& f) {
  std::string out;
  for (const auto& t : flux_terms()) out += format_number(f.h) + "," + format_number(f.l) + "," + t.name + "," + format_number(t.get(f)) + "\n";
  return out;
}

inline Json to_json(const std::vector<ScaleSample>& samples) {
  Json a = Json::array();
  for (const auto& s : samples) a.push_back(Json{{"scale", s.scale}, {"value", s.value}});
  return a;
}

inline std::vector<ScaleSample> samples_from_json(const Json& j) {
  std::vector<ScaleSample> out;
  for (const auto& e : j) out.push_back({e.at("scale").get<double>(), e.at("value").get<double>()});
  return out;
}

inline Json to_json(const BesovReport& b) {
  return Json{{"alpha_target", b.alpha_target},
              {"seminorm_estimate", b.seminorm_estimate},
              {"lp_norm", b.lp_norm},
              {"range", to_string(b.range)},
              {"samples", to_json(b.samples)},
              {"fitted", b.fitted},
              {"fitted_slope", b.fitted_slope},
              {"confidence_halfwidth", b.confidence_halfwidth}};
}

inline BesovReport besov_report_from_json(const Json& j) {
  BesovReport b;
  b.alpha_target = j.at("alpha_target").get<double>();
  b.seminorm_estimate = j.at("seminorm_estimate").get<double>();
  b.lp_norm = j.at("lp_norm").get<double>();
  b.range = j.at("range").get<std::string>() == "capped" ? SeminormRange::capped : SeminormRange::dyadic_global;
  b.samples = samples_from_json(j.at("samples"));
  b.fitted = j.at("fitted").get<bool>();
  b.fitted_slope = j.at("fitted_slope").get<double>();
  b.confidence_halfwidth = j.at("confidence_halfwidth").get<double>();
  return b;
}

/// Per-scale rows: l, increment norm, ratio to l^alpha.
inline std::string besov_csv(const BesovReport& b) {
  std::string out = "l,increment_norm,ratio\n";
  for (const auto& s : b.samples)
    out += format_number(s.scale) + "," + format_number(s.value) + "," + format_number(s.value / std::pow(s.scale, b.alpha_target)) + "\n";
  return out;
}

struct RegionNorm {
  std::string region;
  std::string field;
  double p = 3.0;
  double value = 0.0;
};

/// L^2, L^3 and sup norms of u, b, pi over each named mask.
inline std::vector<RegionNorm> region_norms(const FieldSnapshot& s, const std::vector<std::pair<std::string, Mask>>& regions) {
  std::vector<RegionNorm> out;
  const double ps[3] = {2.0, 3.0, std::numeric_limits<double>::infinity()};
  for (const auto& [name, mask] : regions)
    for (double p : ps) {
      out.push_back({name, "u", p, lp_region_norm(s.u, p, mask)});
      out.push_back({name, "b", p, lp_region_norm(s.b, p, mask)});
      out.push_back({name, "pi", p, lp_region_norm(s.pi, p, mask)});
    }
  return out;
}

inline std::string region_norms_csv(const std::vector<RegionNorm>& rows) {
  std::string out = "region,field,p,value\n";
  for (const auto& r : rows) out += r.region + "," + r.field + "," + (std::isinf(r.p) ? std::string("inf") : format_number(r.p)) + "," + format_number(r.value) + "\n";
  return out;
}

}  // namespace mhdflux
