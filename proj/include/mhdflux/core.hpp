#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mhdflux {

// ---------------------------------------------------------------------------
// Error kinds. Every failure surfaced by the library derives from Error so
// callers can catch the whole family; the subclasses name the contract that
// was violated.
// ---------------------------------------------------------------------------
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// A point or region lies outside the domain.
struct DomainError : Error {
  using Error::Error;
};
/// A length exceeds the admissible range (typically h >= h0).
struct RangeError : Error {
  using Error::Error;
};
/// The operation has no meaning for the requested geometry.
struct UnsupportedError : Error {
  using Error::Error;
};
struct ArgumentError : Error {
  using Error::Error;
};
/// A length scale is too small for the grid to resolve.
struct ResolutionError : Error {
  using Error::Error;
};
struct InsufficientDataError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

/// Pairwise (cascade) summation. The reduction tree depends only on the
/// length of the input, so results are bitwise reproducible regardless of
/// how the terms were produced.
inline double pairwise_sum(std::span<const double> v) {
  constexpr std::size_t kLeaf = 64;
  if (v.size() <= kLeaf) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline void set_thread_count(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

inline int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace mhdflux
