#pragma once

#include <bit>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mhdflux/fields.hpp"

namespace mhdflux {

static_assert(std::endian::native == std::endian::little, "field files are written in host order and must be little-endian");

/// Field file: a text header terminated by a line "data", followed by the
/// raw little-endian float64 values, component-major and x-fastest.
///
///   mhdflux-field 1
///   shape wall_box
///   extent 1 1 1
///   walls 1 1 1
///   radius 0
///   cells 64 64 64
///   spacing 0.015625 0.015625 0.015625
///   components 3
///   time 0
///   data
struct FieldHeader {
  Shape shape = Shape::periodic_box;
  Vec3 extent{1.0, 1.0, 1.0};
  std::array<bool, 3> walls{false, false, false};
  double radius = 0.0;
  Cells cells{1, 1, 1};
  Vec3 spacing{1.0, 1.0, 1.0};
  int components = 1;
  double time = 0.0;

  DomainGeometry geometry() const {
    switch (shape) {
      case Shape::periodic_box: return DomainGeometry::periodic_box(extent);
      case Shape::wall_box: return DomainGeometry::wall_box(extent, walls);
      case Shape::ball: return DomainGeometry::ball(radius);
    }
    throw IoError("unknown shape in field header");
  }
};

namespace detail {

inline std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace detail

template <int Rank>
void write_field(const std::filesystem::path& path, const Field<Rank>& f, double time = 0.0) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const GridSpec& grid = f.grid();
  const DomainGeometry& g = grid.geometry();
  using detail::format_double;
  out << "mhdflux-field 1\n";
  out << "shape " << to_string(g.shape()) << "\n";
  out << "extent " << format_double(g.extent()[0]) << ' ' << format_double(g.extent()[1]) << ' ' << format_double(g.extent()[2]) << "\n";
  out << "walls " << g.walls()[0] << ' ' << g.walls()[1] << ' ' << g.walls()[2] << "\n";
  out << "radius " << format_double(g.radius()) << "\n";
  out << "cells " << grid.cells()[0] << ' ' << grid.cells()[1] << ' ' << grid.cells()[2] << "\n";
  out << "spacing " << format_double(grid.spacing()[0]) << ' ' << format_double(grid.spacing()[1]) << ' ' << format_double(grid.spacing()[2])
      << "\n";
  out << "components " << Rank << "\n";
  out << "time " << format_double(time) << "\n";
  out << "data\n";
  for (int a = 0; a < Rank; ++a) {
    const auto& c = f.component(a);
    out.write(reinterpret_cast<const char*>(c.data()), static_cast<std::streamsize>(c.size() * sizeof(double)));
  }
  if (!out) throw IoError("failed writing " + path.string());
}

namespace detail {

inline FieldHeader read_header(std::istream& in, const std::string& name) {
  FieldHeader h;
  std::string line;
  if (!std::getline(in, line) || line != "mhdflux-field 1") throw IoError(name + ": not a field file");
  bool have_cells = false, have_components = false;
  while (std::getline(in, line)) {
    if (line == "data") {
      if (!have_cells || !have_components) throw IoError(name + ": header misses cells or components");
      return h;
    }
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "shape") {
      std::string s;
      ls >> s;
      try {
        h.shape = shape_from_string(s);
      } catch (const ArgumentError& e) {
        throw IoError(name + ": " + e.what());
      }
    } else if (key == "extent") {
      ls >> h.extent[0] >> h.extent[1] >> h.extent[2];
    } else if (key == "walls") {
      int a, b, c;
      ls >> a >> b >> c;
      h.walls = {a != 0, b != 0, c != 0};
    } else if (key == "radius") {
      ls >> h.radius;
    } else if (key == "cells") {
      ls >> h.cells[0] >> h.cells[1] >> h.cells[2];
      have_cells = true;
    } else if (key == "spacing") {
      ls >> h.spacing[0] >> h.spacing[1] >> h.spacing[2];
    } else if (key == "components") {
      ls >> h.components;
      have_components = true;
    } else if (key == "time") {
      ls >> h.time;
    } else {
      throw IoError(name + ": unknown header key '" + key + "'");
    }
    if (ls.fail()) throw IoError(name + ": malformed header line '" + line + "'");
  }
  throw IoError(name + ": header is not terminated by 'data'");
}

}  // namespace detail

inline FieldHeader read_field_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return detail::read_header(in, path.string());
}

template <int Rank>
Field<Rank> read_field(const std::filesystem::path& path, double* time = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const FieldHeader h = detail::read_header(in, path.string());
  if (h.components != Rank)
    throw IoError(path.string() + ": expected " + std::to_string(Rank) + " components, found " + std::to_string(h.components));
  const GridSpec grid(h.geometry(), h.cells);
  Field<Rank> f(grid);
  for (int a = 0; a < Rank; ++a) {
    auto& c = f.component(a);
    in.read(reinterpret_cast<char*>(c.data()), static_cast<std::streamsize>(c.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(c.size() * sizeof(double))) throw IoError(path.string() + ": truncated data");
  }
  if (in.peek() != std::char_traits<char>::eof()) throw IoError(path.string() + ": trailing bytes after data");
  if (time) *time = h.time;
  return f;
}

/// A snapshot on disk is a directory holding u.field, b.field and pi.field.
inline void write_snapshot(const std::filesystem::path& dir, const FieldSnapshot& s) {
  std::filesystem::create_directories(dir);
  write_field(dir / "u.field", s.u, s.t);
  write_field(dir / "b.field", s.b, s.t);
  write_field(dir / "pi.field", s.pi, s.t);
}

inline FieldSnapshot read_snapshot(const std::filesystem::path& dir) {
  double t = 0.0;
  VectorField u = read_field<3>(dir / "u.field", &t);
  VectorField b = read_field<3>(dir / "b.field");
  ScalarField pi = read_field<1>(dir / "pi.field");
  if (!u.grid().same_layout(b.grid()) || !u.grid().same_layout(pi.grid())) throw IoError(dir.string() + ": snapshot fields use different grids");
  return FieldSnapshot(std::move(u), std::move(b), std::move(pi), t);
}

}  // namespace mhdflux
