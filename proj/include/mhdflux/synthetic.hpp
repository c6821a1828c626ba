#pragma once

#include <complex>
#include <cstdint>
#include <random>

#include "mhdflux/fields.hpp"

namespace mhdflux {

namespace detail {

using Complex = std::complex<double>;
using CVec3 = std::array<Complex, 3>;

/// Independent generator per (seed, stream, mode) so the draw for a mode
/// does not depend on how many modes precede it.
inline std::mt19937_64 mode_rng(std::uint64_t seed, std::uint32_t stream, const std::array<int, 3>& n) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream,
                    static_cast<std::uint32_t>(n[0] + 4096), static_cast<std::uint32_t>(n[1] + 4096), static_cast<std::uint32_t>(n[2] + 4096)};
  return std::mt19937_64(seq);
}

/// Uniform double in [-1, 1) built from raw bits (stable across standard
/// libraries).
inline double symmetric_unit(std::mt19937_64& rng) { return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0; }

inline CVec3 random_cvec(std::mt19937_64& rng) {
  CVec3 v;
  for (auto& c : v) {
    const double re = symmetric_unit(rng);
    c = Complex(re, symmetric_unit(rng));
  }
  return v;
}

/// Removes the component along k.
inline CVec3 project_transverse(CVec3 v, const Vec3& k) {
  const double kk = dot(k, k);
  if (kk == 0.0) return v;
  Complex vk = 0.0;
  for (int a = 0; a < 3; ++a) vk += v[a] * k[a];
  for (int a = 0; a < 3; ++a) v[a] -= vk * (k[a] / kk);
  return v;
}

/// Largest per-axis mode index resolved with at least 8 cells per
/// wavelength.
inline int axis_mode_cap(const GridSpec& grid, int a, int modes) { return std::max(0, std::min(modes, grid.cells()[a] / 8)); }

struct FourierMode {
  std::array<int, 3> n;  // integer wavevector in units of the base wavenumbers
  CVec3 amplitude;       // velocity amplitude, transverse to k
};

/// Per-axis tables exp(i 2 pi n x / L) at the cell centres for |n| <= cap.
struct PhaseTables {
  std::array<std::vector<Complex>, 3> table;
  std::array<int, 3> cap{};
  std::array<int, 3> cells{};

  PhaseTables(const GridSpec& grid, const std::array<int, 3>& caps) : cap(caps), cells(grid.cells()) {
    const Vec3& L = grid.geometry().extent();
    for (int a = 0; a < 3; ++a) {
      const int width = 2 * cap[a] + 1;
      table[a].resize(static_cast<std::size_t>(width) * cells[a]);
      for (int n = -cap[a]; n <= cap[a]; ++n)
        for (int i = 0; i < cells[a]; ++i) {
          const double ph = 2.0 * M_PI * n * (i + 0.5) * grid.spacing()[a] / L[a];
          table[a][static_cast<std::size_t>(n + cap[a]) * cells[a] + i] = Complex(std::cos(ph), std::sin(ph));
        }
    }
  }
  Complex at(int a, int n, int i) const { return table[a][static_cast<std::size_t>(n + cap[a]) * cells[a] + i]; }
};

/// u(x) = sum Re(amplitude exp(i k . x)) at every cell centre.
inline VectorField synthesize(const GridSpec& grid, const std::vector<FourierMode>& modes) {
  std::array<int, 3> caps{0, 0, 0};
  for (const auto& m : modes)
    for (int a = 0; a < 3; ++a) caps[a] = std::max(caps[a], std::abs(m.n[a]));
  const PhaseTables ph(grid, caps);
  VectorField u(grid);
  for_each_cell(grid, [&](std::size_t c) {
    const auto p = grid.unravel(c);
    double acc[3] = {0.0, 0.0, 0.0};
    for (const auto& m : modes) {
      const Complex e = ph.at(0, m.n[0], p[0]) * ph.at(1, m.n[1], p[1]) * ph.at(2, m.n[2], p[2]);
      for (int a = 0; a < 3; ++a) acc[a] += (m.amplitude[a] * e).real();
    }
    for (int a = 0; a < 3; ++a) u(a, c) = acc[a];
  });
  return u;
}

inline Vec3 physical_wavevector(const GridSpec& grid, const std::array<int, 3>& n) {
  const Vec3& L = grid.geometry().extent();
  return {2.0 * M_PI * n[0] / L[0], 2.0 * M_PI * n[1] / L[1], 2.0 * M_PI * n[2] / L[2]};
}

/// Scales amplitudes so the field has mean square 1/2.
inline void normalise_energy(std::vector<FourierMode>& modes) {
  double e = 0.0;
  for (const auto& m : modes)
    for (const auto& c : m.amplitude) e += std::norm(c);
  if (e == 0.0) return;
  const double s = 1.0 / std::sqrt(e);
  for (auto& m : modes)
    for (auto& c : m.amplitude) c *= s;
}

inline void require_box(const GridSpec& grid, const char* what) {
  if (grid.geometry().shape() == Shape::ball) throw UnsupportedError(std::string(what) + " needs a box domain");
}

}  // namespace detail

/// u = curl A with A a random trigonometric polynomial, |n_a| <= modes per
/// axis (capped so each axis keeps 8 cells per wavelength). Exactly
/// solenoidal before sampling; mean square 1/2; modes = 0 gives u = 0.
inline VectorField smooth_divfree(const GridSpec& grid, std::uint64_t seed, int modes) {
  detail::require_box(grid, "smooth_divfree");
  std::array<int, 3> cap;
  for (int a = 0; a < 3; ++a) cap[a] = detail::axis_mode_cap(grid, a, modes);
  std::vector<detail::FourierMode> list;
  for (int n0 = 0; n0 <= cap[0]; ++n0)
    for (int n1 = -cap[1]; n1 <= cap[1]; ++n1)
      for (int n2 = -cap[2]; n2 <= cap[2]; ++n2) {
        // One representative of each +-n pair.
        if (n0 == 0 && (n1 < 0 || (n1 == 0 && n2 <= 0))) continue;
        const std::array<int, 3> n{n0, n1, n2};
        auto rng = detail::mode_rng(seed, 1, n);
        const detail::CVec3 pot = detail::random_cvec(rng);
        const Vec3 k = detail::physical_wavevector(grid, n);
        const double nn = double(n0 * n0 + n1 * n1 + n2 * n2);
        const double decay = 1.0 / (nn * std::sqrt(dot(k, k)));
        // curl of A exp(ikx) is (i k x A) exp(ikx).
        const detail::Complex i(0.0, 1.0);
        detail::CVec3 amp{i * (k[1] * pot[2] - k[2] * pot[1]), i * (k[2] * pot[0] - k[0] * pot[2]), i * (k[0] * pot[1] - k[1] * pot[0])};
        for (auto& c : amp) c *= decay;
        list.push_back({n, amp});
      }
  detail::normalise_energy(list);
  return detail::synthesize(grid, list);
}

/// Axes on which `octaves` lacunary copies stay resolved (2^octaves <= cells / 4).
inline std::vector<int> lacunary_axes(const GridSpec& grid, int octaves) {
  std::vector<int> axes;
  for (int a = 0; a < 3; ++a)
    if ((std::int64_t{1} << octaves) * 4 <= grid.cells()[a]) axes.push_back(a);
  return axes;
}

/// Mother field of the lacunary construction: random transverse amplitudes
/// on the wavevectors e_a and e_a + e_b over the resolved axes.
inline std::vector<detail::FourierMode> lacunary_mother(const GridSpec& grid, std::uint64_t seed, const std::vector<int>& axes) {
  std::vector<std::array<int, 3>> ns;
  for (int a : axes) {
    std::array<int, 3> n{0, 0, 0};
    n[a] = 1;
    ns.push_back(n);
  }
  for (std::size_t p = 0; p < axes.size(); ++p)
    for (std::size_t q = p; q < axes.size(); ++q) {
      std::array<int, 3> n{0, 0, 0};
      n[axes[p]] += 1;
      n[axes[q]] += 1;
      ns.push_back(n);
    }
  std::vector<detail::FourierMode> list;
  for (const auto& n : ns) {
    auto rng = detail::mode_rng(seed, 2, n);
    list.push_back({n, detail::project_transverse(detail::random_cvec(rng), detail::physical_wavevector(grid, n))});
  }
  detail::normalise_energy(list);
  return list;
}

/// Weierstrass-type field sum_j 2^(-alpha j) U(2^j x), j < octaves, with U
/// the seeded mother field. Each Fourier mode is transverse, so the field
/// is solenoidal; its L^3 increments scale like |y|^alpha between the
/// coarsest and finest copy.
inline VectorField rough_divfree(const GridSpec& grid, double alpha, std::uint64_t seed, int octaves) {
  detail::require_box(grid, "rough_divfree");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("rough_divfree needs 0 < alpha < 1");
  if (octaves < 1) throw ArgumentError("rough_divfree needs at least one octave");
  const auto axes = lacunary_axes(grid, octaves);
  if (axes.empty()) throw ResolutionError("2^octaves exceeds cells / 4 on every axis");
  const auto mother = lacunary_mother(grid, seed, axes);
  std::vector<detail::FourierMode> list;
  for (int j = 0; j < octaves; ++j) {
    const double w = std::exp2(-alpha * j);
    for (const auto& m : mother) {
      detail::FourierMode c = m;
      for (auto& x : c.n) x <<= j;
      for (auto& a : c.amplitude) a *= w;
      list.push_back(c);
    }
  }
  return detail::synthesize(grid, list);
}

/// Exact steady state u = b = smooth_divfree, pi = 0. sign = -1 gives b = -u.
inline FieldSnapshot alfven_steady(const GridSpec& grid, std::uint64_t seed, int modes, double sign = 1.0) {
  VectorField u = smooth_divfree(grid, seed, modes);
  VectorField b = sign * u;
  return FieldSnapshot(std::move(u), std::move(b), ScalarField(grid));
}

/// Solenoidal field with w . n = 0 on every wall. Per mode, component i is
/// a_i S_i(x_i) prod_{j != i} C_j(x_j) with (S, C) = (sin, cos) of the
/// axis phase and a transverse to k; walled axes use k = pi n / L, periodic
/// axes k = 2 pi n / L with a seeded phase shift.
inline VectorField wall_compatible_field(const GridSpec& grid, std::uint64_t seed, int modes) {
  const DomainGeometry& g = grid.geometry();
  if (g.shape() != Shape::wall_box) throw UnsupportedError("wall_compatible_field needs a wall_box");
  const Vec3& L = g.extent();
  std::array<int, 3> cap;
  for (int a = 0; a < 3; ++a) cap[a] = detail::axis_mode_cap(grid, a, modes);

  struct Mode {
    Vec3 k;
    Vec3 shift;
    Vec3 a;
  };
  std::vector<Mode> list;
  double total = 0.0;
  for (int n0 = 0; n0 <= cap[0]; ++n0)
    for (int n1 = 0; n1 <= cap[1]; ++n1)
      for (int n2 = 0; n2 <= cap[2]; ++n2) {
        const std::array<int, 3> n{n0, n1, n2};
        if (n0 + n1 + n2 == 0) continue;
        auto rng = detail::mode_rng(seed, 3, n);
        Mode m;
        for (int a = 0; a < 3; ++a) {
          m.k[a] = (g.walls()[a] ? M_PI : 2.0 * M_PI) * n[a] / L[a];
          m.shift[a] = g.walls()[a] ? 0.0 : M_PI * detail::symmetric_unit(rng);
        }
        Vec3 a{detail::symmetric_unit(rng), detail::symmetric_unit(rng), detail::symmetric_unit(rng)};
        const double kk = dot(m.k, m.k);
        a = a - (dot(a, m.k) / kk) * m.k;
        const double nn = double(n0 * n0 + n1 * n1 + n2 * n2);
        m.a = (1.0 / nn) * a;
        total += norm(m.a);
        list.push_back(m);
      }
  if (total > 0.0)
    for (auto& m : list) m.a = (1.0 / total) * m.a;

  return VectorField::sample(grid, [&](const Vec3& x) {
    Vec3 u{0.0, 0.0, 0.0};
    for (const auto& m : list) {
      double s[3], c[3];
      for (int a = 0; a < 3; ++a) {
        const double ph = m.k[a] * x[a] + m.shift[a];
        s[a] = std::sin(ph);
        c[a] = std::cos(ph);
      }
      u[0] += m.a[0] * s[0] * c[1] * c[2];
      u[1] += m.a[1] * c[0] * s[1] * c[2];
      u[2] += m.a[2] * c[0] * c[1] * s[2];
    }
    return u;
  });
}

}  // namespace mhdflux
