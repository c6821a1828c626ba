#include <iostream>

#include "CLI11.hpp"
#include "mhdflux/acceptance.hpp"

using namespace mhdflux;

namespace {

enum Exit { kOk = 0, kValidation = 1, kRuntime = 2, kAcceptance = 3 };

struct Options {
  std::string config;
  std::string out;
  int threads = 0;
  std::optional<long long> seed;
  std::string format;
  std::string only;
};

SweepConfig load_config(const Options& o) {
  Config c = o.config.empty() ? Config() : Config::load(o.config);
  if (o.seed) c.set("field.seed", std::to_string(*o.seed));
  if (!o.format.empty()) c.set("output.format", o.format);
  if (!o.out.empty()) c.set("output.dir", o.out);
  return SweepConfig::from(c);
}

std::filesystem::path write_json(const std::filesystem::path& dir, const std::string& stem, const Json& j) {
  const auto path = dir / (stem + ".json");
  write_text(path, j.dump(2) + "\n");
  return path;
}

int cmd_generate(const Options& o) {
  const SweepConfig cfg = load_config(o);
  const FieldSnapshot s = make_snapshot(cfg);
  const std::filesystem::path dir = cfg.output_dir;
  write_snapshot(dir / "snapshot", s);
  std::vector<std::pair<std::string, Mask>> regions{{"domain", domain_mask(s.grid())}};
  const DomainGeometry& g = s.grid().geometry();
  if (g.has_boundary()) {
    const double eps = std::min(0.25 * g.h0(), 8.0 * s.grid().max_spacing());
    regions.emplace_back("shell", region_mask(s.grid(), Region::shell(eps)));
    regions.emplace_back("interior", region_mask(s.grid(), Region::interior(eps)));
  }
  const auto norms = region_norms(s, regions);
  std::filesystem::path path;
  if (cfg.output_format == "csv") {
    path = dir / "generate.csv";
    write_text(path, config_comment_block(cfg.echo()) + region_norms_csv(norms));
  } else {
    Json j;
    j["config"] = config_json(cfg.echo());
    j["energy"] = total_energy(s);
    j["cross_helicity"] = cross_helicity(s);
    j["divergence_u"] = FieldSnapshot::relative_divergence(s.u);
    j["divergence_b"] = FieldSnapshot::relative_divergence(s.b);
    Json rows = Json::array();
    for (const auto& r : norms)
      rows.push_back(Json{{"region", r.region}, {"field", r.field}, {"p", std::isinf(r.p) ? Json("inf") : Json(r.p)}, {"value", r.value}});
    j["region_norms"] = rows;
    path = write_json(dir, "generate", j);
  }
  std::cout << "wrote " << (dir / "snapshot").string() << " and " << path.string() << "\n";
  return kOk;
}

int cmd_besov(const Options& o) {
  const SweepConfig cfg = load_config(o);
  if (cfg.l.empty()) throw ConfigError("besov needs sweep.l or sweep.l_cells");
  const FieldSnapshot s = make_snapshot(cfg);
  const auto dirs = default_directions(cfg.analysis.direction_seed, cfg.analysis.directions);
  const BesovReport b = besov_report(s.u, detail::default_besov_alpha(cfg), domain_mask(s.grid()), cfg.l, dirs);
  const std::filesystem::path dir = cfg.output_dir;
  std::filesystem::path path;
  if (cfg.output_format == "csv") {
    path = dir / "besov.csv";
    write_text(path, config_comment_block(cfg.echo()) + besov_csv(b));
  } else {
    path = write_json(dir, "besov", Json{{"config", config_json(cfg.echo())}, {"besov", to_json(b)}});
  }
  std::cout << "wrote " << path.string() << "\n";
  return kOk;
}

int cmd_flux(const Options& o) {
  SweepConfig cfg = load_config(o);
  if (cfg.l.empty()) throw ConfigError("flux needs one value in sweep.l or sweep.l_cells");
  cfg.l.resize(1);
  cfg.analysis.besov = false;
  const SweepReport r = run_sweep(cfg);
  const std::filesystem::path dir = cfg.output_dir;
  std::filesystem::path path;
  if (cfg.output_format == "csv") {
    path = dir / "flux.csv";
    write_text(path, config_comment_block(r.config) + kFluxCsvHeader + flux_csv_rows(r.results.front().flux));
  } else {
    path = write_json(dir, "flux", Json{{"config", config_json(r.config)}, {"flux", to_json(r.results.front().flux)}});
  }
  std::cout << "wrote " << path.string() << "\n";
  return kOk;
}

int cmd_sweep(const Options& o) {
  const SweepConfig cfg = load_config(o);
  const SweepReport r = run_sweep(cfg);
  const auto path = emit_report(r, cfg.output_format, cfg.output_dir);
  std::cout << "wrote " << path.string() << " (" << r.results.size() << " sweep points)\n";
  return kOk;
}

int cmd_check(const Options& o) {
  const SweepConfig cfg = load_config(o);
  std::vector<int> ids;
  if (!o.only.empty()) {
    std::stringstream ss(o.only);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        ids.push_back(std::stoi(tok));
      } catch (const std::exception&) {
        throw ConfigError("--only: expected comma-separated criterion numbers");
      }
    }
  }
  const AcceptanceReport a = run_acceptance(cfg.tolerances, ids, [](const CriterionResult& r) { std::cout << result_line(r) << std::endl; });
  Json j = to_json(a);
  j["config"] = config_json(cfg.echo());
  const auto path = write_json(cfg.output_dir, "check", j);
  std::cout << (a.passed() ? "all criteria passed" : "acceptance failed") << "; wrote " << path.string() << "\n";
  return a.passed() ? kOk : kAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coarse-grained energy and cross-helicity flux analysis for MHD fields"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Config file (dotted key = value lines)");
    sub->add_option("--out", o.out, "Output directory (overrides output.dir)");
    sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "Field seed (overrides field.seed)")->check(CLI::NonNegativeNumber);
    sub->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  };
  std::map<CLI::App*, int (*)(const Options&)> commands;
  auto add = [&](const char* name, const char* help, int (*fn)(const Options&)) {
    CLI::App* sub = app.add_subcommand(name, help);
    common(sub);
    commands[sub] = fn;
    return sub;
  };
  add("generate", "Write the configured fields to disk", cmd_generate);
  add("besov", "Increment norms, fitted exponent and Besov seminorm of u", cmd_besov);
  add("flux", "Flux breakdown at the first sweep scale", cmd_flux);
  add("sweep", "Flux, energy-gap and wall functionals over the l sweep", cmd_sweep);
  CLI::App* check = add("check", "Run the acceptance suite", cmd_check);
  check->add_option("--only", o.only, "Comma-separated criterion numbers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }
  if (o.threads > 0) set_thread_count(o.threads);
  try {
    for (const auto& [sub, fn] : commands)
      if (sub->parsed()) return fn(o);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kRuntime;
}
