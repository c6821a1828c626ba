#pragma once

#include <algorithm>
#include <limits>
#include <string>

#include "mhdflux/core.hpp"

namespace mhdflux {

enum class Shape { periodic_box, wall_box, ball };

inline std::string to_string(Shape s) {
  switch (s) {
    case Shape::periodic_box: return "periodic_box";
    case Shape::wall_box: return "wall_box";
    case Shape::ball: return "ball";
  }
  return "unknown";
}

inline Shape shape_from_string(const std::string& s) {
  if (s == "periodic_box") return Shape::periodic_box;
  if (s == "wall_box") return Shape::wall_box;
  if (s == "ball") return Shape::ball;
  throw ArgumentError("unknown shape '" + s + "'");
}

/// Nearest boundary point and the outward unit normal there.
struct Projection {
  Vec3 point;
  Vec3 normal;
};

/// Analytic domain. Boxes span [0, extent) per axis; a wall_box may leave
/// some axes periodic (a slab or channel), the remaining axes carry walls at
/// 0 and extent. Balls are centred at the origin.
class DomainGeometry {
 public:
  static DomainGeometry periodic_box(const Vec3& extent) {
    DomainGeometry g;
    g.shape_ = Shape::periodic_box;
    g.extent_ = extent;
    g.walls_ = {false, false, false};
    g.validate();
    return g;
  }

  static DomainGeometry wall_box(const Vec3& extent, std::array<bool, 3> walls = {true, true, true}) {
    DomainGeometry g;
    g.shape_ = Shape::wall_box;
    g.extent_ = extent;
    g.walls_ = walls;
    if (!(walls[0] || walls[1] || walls[2])) throw ArgumentError("wall_box needs at least one walled axis");
    g.validate();
    return g;
  }

  static DomainGeometry ball(double radius) {
    DomainGeometry g;
    g.shape_ = Shape::ball;
    g.radius_ = radius;
    g.extent_ = {2 * radius, 2 * radius, 2 * radius};
    g.walls_ = {true, true, true};
    g.validate();
    return g;
  }

  Shape shape() const { return shape_; }
  const Vec3& extent() const { return extent_; }
  const std::array<bool, 3>& walls() const { return walls_; }
  double radius() const { return radius_; }
  bool has_boundary() const { return shape_ != Shape::periodic_box; }
  bool periodic_axis(int a) const { return shape_ != Shape::ball && !walls_[a]; }

  /// Reach of the nearest-point projection: ball radius, or half the
  /// shortest walled edge of a box.
  double h0() const {
    switch (shape_) {
      case Shape::periodic_box: return std::numeric_limits<double>::infinity();
      case Shape::ball: return radius_;
      case Shape::wall_box: {
        double h = std::numeric_limits<double>::infinity();
        for (int a = 0; a < 3; ++a)
          if (walls_[a]) h = std::min(h, 0.5 * extent_[a]);
        return h;
      }
    }
    return 0.0;
  }

  /// Volume of the domain.
  double volume() const {
    if (shape_ == Shape::ball) return 4.0 / 3.0 * M_PI * radius_ * radius_ * radius_;
    return extent_[0] * extent_[1] * extent_[2];
  }

  bool contains(const Vec3& x) const {
    switch (shape_) {
      case Shape::periodic_box: return true;
      case Shape::ball: return norm(x) < radius_;
      case Shape::wall_box:
        for (int a = 0; a < 3; ++a)
          if (walls_[a] && (x[a] <= 0.0 || x[a] >= extent_[a])) return false;
        return true;
    }
    return false;
  }

  /// inf over boundary points of |x - y|; +inf for the periodic box.
  double distance_to_boundary(const Vec3& x) const {
    if (!contains(x)) throw DomainError("point lies outside the domain");
    switch (shape_) {
      case Shape::periodic_box: return std::numeric_limits<double>::infinity();
      case Shape::ball: return radius_ - norm(x);
      case Shape::wall_box: {
        double d = std::numeric_limits<double>::infinity();
        for (int a = 0; a < 3; ++a)
          if (walls_[a]) d = std::min({d, x[a], extent_[a] - x[a]});
        return d;
      }
    }
    return 0.0;
  }

  /// Unique nearest boundary point m(x) and outward normal n(m(x)).
  Projection boundary_projection(const Vec3& x) const {
    if (shape_ == Shape::periodic_box) throw UnsupportedError("periodic_box has no boundary to project onto");
    const double d = distance_to_boundary(x);
    if (d >= h0()) throw RangeError("projection not unique: d(x) >= h0");
    if (shape_ == Shape::ball) {
      const double r = norm(x);
      const Vec3 n = (1.0 / r) * x;
      return {radius_ * n, n};
    }
    // Box: nearest face; ties (edges, corners) have no unique projection.
    const double tol = 1e-12 * std::max({extent_[0], extent_[1], extent_[2]});
    int hits = 0;
    Projection p{x, {0.0, 0.0, 0.0}};
    for (int a = 0; a < 3; ++a) {
      if (!walls_[a]) continue;
      if (std::abs(x[a] - d) <= tol) {
        ++hits;
        p.point[a] = 0.0;
        p.normal = {0.0, 0.0, 0.0};
        p.normal[a] = -1.0;
      }
      if (std::abs(extent_[a] - x[a] - d) <= tol) {
        ++hits;
        p.point[a] = extent_[a];
        p.normal = {0.0, 0.0, 0.0};
        p.normal[a] = 1.0;
      }
    }
    if (hits != 1) throw RangeError("projection not unique: point is equidistant from several faces");
    return p;
  }

 private:
  DomainGeometry() = default;

  void validate() const {
    if (shape_ == Shape::ball) {
      if (!(radius_ > 0.0)) throw ArgumentError("ball radius must be positive");
      return;
    }
    for (double e : extent_)
      if (!(e > 0.0)) throw ArgumentError("box extent must be positive on every axis");
  }

  Shape shape_ = Shape::periodic_box;
  Vec3 extent_{1.0, 1.0, 1.0};
  std::array<bool, 3> walls_{false, false, false};
  double radius_ = 0.0;
};

/// Monotone C^2 ramp from 0 at z <= h - l to 1 at z >= h (quintic
/// smoothstep). max |eta'| = 15 / (8 l) at the midpoint.
class CutoffProfile {
 public:
  CutoffProfile(double h, double l) : h_(h), l_(l) {
    if (!(l > 0.0) || !(h > l)) throw ArgumentError("cut-off needs 0 < l < h");
  }
  /// Default transition width l = h / 16.
  static CutoffProfile with_default_width(double h) { return CutoffProfile(h, h / 16.0); }

  double h() const { return h_; }
  double l() const { return l_; }

  double eta(double z) const {
    const double s = ramp(z);
    return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
  }
  double eta_prime(double z) const {
    const double s = ramp(z);
    return 30.0 * s * s * (1.0 - s) * (1.0 - s) / l_;
  }
  static constexpr double kSlopeBound = 1.875;  // sup |eta'| * l

 private:
  double ramp(double z) const { return std::clamp((z - (h_ - l_)) / l_, 0.0, 1.0); }
  double h_;
  double l_;
};

struct CutoffValue {
  double theta;
  Vec3 gradient;
};

/// theta = eta(d(x)), grad theta = -eta'(d(x)) n(m(x)).
inline CutoffValue cutoff_evaluate(const CutoffProfile& profile, const DomainGeometry& geometry, const Vec3& x) {
  if (!geometry.has_boundary()) {
    if (!geometry.contains(x)) throw DomainError("point lies outside the domain");
    return {1.0, {0.0, 0.0, 0.0}};
  }
  const double d = geometry.distance_to_boundary(x);
  const double slope = profile.eta_prime(d);
  CutoffValue v{profile.eta(d), {0.0, 0.0, 0.0}};
  if (slope != 0.0) v.gradient = (-slope) * geometry.boundary_projection(x).normal;
  return v;
}

}  // namespace mhdflux
