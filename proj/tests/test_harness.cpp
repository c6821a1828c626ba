#include <gtest/gtest.h>

#include <unistd.h>

#include "mhdflux/harness.hpp"

using namespace mhdflux;
namespace fs = std::filesystem;

namespace {

const char* kSmallSweep = R"(
geometry.shape = periodic_box
grid.cells = 16 16 16
field.type = smooth_divfree
field.seed = 3
field.modes = 1
sweep.l_cells = 4 5 6 7
analysis.directions = 4
)";

SweepConfig parse(const std::string& text) { return SweepConfig::from(Config::parse(text, "test")); }

std::string config_error(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, ParsesKeysCommentsAndTypes) {
  const Config c = Config::parse("# header\n a.b = 1 2 3  # trailing\nflag.on = yes\nx.y_z = hello world\n");
  EXPECT_EQ(c.entries().size(), 3u);
  EXPECT_EQ(c.numbers("a.b"), (std::vector<double>{1, 2, 3}));
  EXPECT_TRUE(c.flag("flag.on", false));
  EXPECT_EQ(c.text("x.y_z", ""), "hello world");
  EXPECT_EQ(c.number("missing.key", 4.5), 4.5);
  EXPECT_THROW(c.integer("a.b", 0), ConfigError);
  EXPECT_THROW(c.flag("x.y_z", false), ConfigError);
}

TEST(Config, ReportsLineOfSyntaxErrors) {
  auto message = [](const std::string& text) {
    try {
      Config::parse(text, "cfg");
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message("a.b = 1\nno equals here\n").find("cfg:2"), std::string::npos);
  EXPECT_NE(message("Bad.key = 1\n").find("malformed key"), std::string::npos);
  EXPECT_NE(message("nodot = 1\n").find("malformed key"), std::string::npos);
  EXPECT_NE(message("a.b =\n").find("no value"), std::string::npos);
  EXPECT_NE(message("a.b = 1\n\na.b = 2\n").find("cfg:3: duplicate"), std::string::npos);
  EXPECT_THROW(Config::load("/nonexistent/mhdflux.cfg"), IoError);
}

TEST(SweepConfig, DefaultsAndScaleConversion) {
  const SweepConfig s = parse(kSmallSweep);
  ASSERT_EQ(s.l.size(), 4u);
  EXPECT_DOUBLE_EQ(s.l[0], 0.25);
  EXPECT_DOUBLE_EQ(s.h_rule.of(s.l[0]), 4.0);
  EXPECT_EQ(s.kernel_shape, KernelShape::polynomial);
  EXPECT_EQ(s.output_format, "json");
  EXPECT_EQ(s.tolerances.commutator, 1e-12);
  EXPECT_EQ(parse("tolerances.commutator = 1e-10\n").tolerances.commutator, 1e-10);
}

TEST(SweepConfig, RejectsUnderResolvedScale) {
  const std::string msg = config_error("grid.cells = 16 16 16\nsweep.l_cells = 2\n");
  EXPECT_NE(msg.find("violates l >= 4 dx"), std::string::npos) << msg;
  EXPECT_NE(config_error("grid.cells = 16 16 16\nsweep.l = 0.2\n"), "");
  EXPECT_EQ(config_error("grid.cells = 16 16 16\nsweep.l = 0.25\n"), "");
}

TEST(SweepConfig, RejectsInvalidSettings) {
  EXPECT_NE(config_error("field.colour = red\n").find("unknown key"), std::string::npos);
  EXPECT_NE(config_error("sweep.l = 0.25\nsweep.l_cells = 4\ngrid.cells = 16 16 16\n").find("mutually exclusive"), std::string::npos);
  EXPECT_NE(config_error("grid.cells = 16 16 16\nsweep.l_cells = 4 4\n").find("distinct"), std::string::npos);
  EXPECT_NE(config_error("grid.cells = 16 16 16\nsweep.l_cells = 4\nsweep.h = 0.2\n").find("h must exceed l"), std::string::npos);
  EXPECT_NE(config_error("field.type = turbulence\n"), "");
  EXPECT_NE(config_error("geometry.shape = torus\n"), "");
  EXPECT_NE(config_error("field.type = wall_compatible\n"), "");
  EXPECT_NE(config_error("field.type = load\n"), "");
  EXPECT_NE(config_error("output.format = xml\n"), "");
  EXPECT_NE(config_error("grid.cells = 16 16\n"), "");
  EXPECT_NE(config_error("field.sign = 2\n"), "");
  EXPECT_NE(config_error("kernel.path = gpu\n"), "");
  EXPECT_NE(config_error("tolerances.commutator = -1\n"), "");
}

TEST(SweepConfig, EchoReparsesToItself) {
  const SweepConfig s = parse("geometry.shape = wall_box\ngrid.cells = 16 16 16\nsweep.l_cells = 4 5\nsweep.h = 0.375\n");
  std::string text;
  for (const auto& [k, v] : s.echo())
    if (!v.empty()) text += k + " = " + v + "\n";
  const SweepConfig t = parse(text);
  EXPECT_EQ(t.echo(), s.echo());
}

TEST(Sweep, EmptySweepGivesEmptyResults) {
  const SweepReport r = run_sweep(parse("grid.cells = 16 16 16\nfield.modes = 1\n"));
  EXPECT_TRUE(r.results.empty());
  EXPECT_FALSE(r.besov.has_value());
  const Json j = to_json(r);
  EXPECT_TRUE(j.at("results").is_array());
  EXPECT_TRUE(j.at("results").empty());
  for (const auto& f : r.fits) EXPECT_FALSE(f.ok);
  EXPECT_EQ(sweep_csv(r), "h,l,term_name,value\n");
}

TEST(Sweep, FluxTermNamesAndCsvRows) {
  std::vector<std::string> names;
  for (const auto& t : flux_terms()) names.push_back(t.name);
  const std::vector<std::string> expect{"i11",    "r11",    "r12",    "r13",    "r14",    "i21",    "i22_1",     "i22_2",     "i22_3",
                                        "i22_4",  "i31",    "i32_1",  "i32_2",  "i32_3",  "i32_4",  "i41",       "i42_1",     "i42_2",
                                        "i42_3",  "i42_4",  "i21_plus_i41_direct", "i5", "k1", "k2", "k3", "k4", "k5",
                                        "totals.I1", "totals.I2", "totals.I3", "totals.I4", "totals.I5", "totals.I", "totals.K"};
  EXPECT_EQ(names, expect);

  const SweepReport r = run_sweep(parse(kSmallSweep));
  ASSERT_EQ(r.results.size(), 4u);
  const std::string csv = sweep_csv(r);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), 1 + 4 * names.size());
  for (const auto& f : r.fits) {
    if (f.term == "i11") { EXPECT_FALSE(f.ok); }
    if (f.term == "r12") { EXPECT_TRUE(f.ok); }
  }
  ASSERT_TRUE(r.besov.has_value());
  EXPECT_TRUE(r.besov->fitted);
  EXPECT_EQ(r.results[2].l, 6.0 / 16);
}

TEST(Sweep, JsonRoundTrip) {
  const SweepReport r = run_sweep(parse("geometry.shape = wall_box\ngrid.cells = 16 16 16\nfield.type = wall_compatible\nfield.modes = 1\n"
                                        "sweep.l_cells = 4\nsweep.h = 0.375\nanalysis.directions = 2\n"));
  const Json j = to_json(r);
  EXPECT_TRUE(j.at("results")[0].at("boundary_bound").is_object());
  EXPECT_TRUE(j.at("results")[0].at("flux").contains("i21_plus_i41_direct"));
  EXPECT_EQ(to_json(sweep_report_from_json(j)).dump(), j.dump());
  EXPECT_EQ(j.at("config").at("sweep.h").get<std::string>(), "0.375");
}

TEST(Sweep, ReportIndependentOfThreadCount) {
  const SweepConfig cfg = parse(kSmallSweep);
  const int before = thread_count();
  set_thread_count(1);
  const std::string a = to_json(run_sweep(cfg)).dump();
  set_thread_count(3);
  const std::string b = to_json(run_sweep(cfg)).dump();
  set_thread_count(before);
  EXPECT_EQ(a, b);
}

TEST(Sweep, RejectsCompressibleInput) {
  const fs::path dir = fs::temp_directory_path() / ("mhdflux_harness_" + std::to_string(::getpid()));
  const GridSpec grid(DomainGeometry::periodic_box({1, 1, 1}), {16, 16, 16});
  const auto u = VectorField::sample(grid, [](const Vec3& x) { return Vec3{std::sin(2 * M_PI * x[0]), 0, 0}; });
  write_snapshot(dir, FieldSnapshot(u, VectorField(grid), ScalarField(grid)));
  EXPECT_THROW(run_sweep(parse("grid.cells = 16 16 16\nfield.type = load\nfield.path = " + dir.string() + "\n")), ArgumentError);
  EXPECT_THROW(run_sweep(parse("grid.cells = 8 8 8\nfield.type = load\nfield.path = " + dir.string() + "\n")), ConfigError);
  fs::remove_all(dir);
}

TEST(Sweep, EmitReportWritesConfigComments) {
  const fs::path dir = fs::temp_directory_path() / ("mhdflux_emit_" + std::to_string(::getpid()));
  const SweepReport r = run_sweep(parse("grid.cells = 16 16 16\nfield.modes = 1\nsweep.l_cells = 4\nanalysis.besov = false\n"));
  const fs::path csv = emit_report(r, "csv", dir);
  std::ifstream in(csv);
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first, "# geometry.shape = periodic_box");
  EXPECT_THROW(emit_report(r, "xml", dir), ArgumentError);
  fs::remove_all(dir);
}
