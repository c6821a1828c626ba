#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <memory>
#include <mutex>

#include "mhdflux/fields.hpp"

namespace mhdflux {

enum class KernelShape { polynomial, bump };

inline std::string to_string(KernelShape s) { return s == KernelShape::bump ? "bump" : "polynomial"; }
inline KernelShape kernel_shape_from_string(const std::string& s) {
  if (s == "polynomial") return KernelShape::polynomial;
  if (s == "bump") return KernelShape::bump;
  throw ArgumentError("unknown kernel shape '" + s + "'");
}

/// direct: stencil sums (reference). fft: circular convolution through
/// FFTW, identical on the mollifiable cells up to roundoff. automatic picks
/// fft once the stencil is large.
enum class ConvolutionPath { automatic, direct, fft };

inline std::string to_string(ConvolutionPath p) {
  switch (p) {
    case ConvolutionPath::automatic: return "automatic";
    case ConvolutionPath::direct: return "direct";
    case ConvolutionPath::fft: return "fft";
  }
  return "automatic";
}
inline ConvolutionPath convolution_path_from_string(const std::string& s) {
  if (s == "automatic" || s == "auto") return ConvolutionPath::automatic;
  if (s == "direct") return ConvolutionPath::direct;
  if (s == "fft") return ConvolutionPath::fft;
  throw ArgumentError("unknown convolution path '" + s + "'");
}

/// Multi-index of a derivative, e.g. {1,0,0} = d/dx1, {1,1,0} = d2/dx1dx2.
using Derivative = std::array<int, 3>;

inline int derivative_order(const Derivative& d) { return d[0] + d[1] + d[2]; }

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwDeleter>;

template <class T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  return FftwBuffer<T>(static_cast<T*>(fftw_malloc(sizeof(T) * n)));
}

/// Plans plus the kernel spectra of one kernel on one grid layout.
class SpectralConvolver {
 public:
  explicit SpectralConvolver(const Cells& n) : n_(n) {
    real_size_ = static_cast<std::size_t>(n[0]) * n[1] * n[2];
    complex_size_ = static_cast<std::size_t>(n[0] / 2 + 1) * n[1] * n[2];
    auto in = fftw_buffer<double>(real_size_);
    auto out = fftw_buffer<fftw_complex>(complex_size_);
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    // FFTW is row-major with the last index contiguous: dims are (z, y, x).
    forward_ = fftw_plan_dft_r2c_3d(n[2], n[1], n[0], in.get(), out.get(), FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r_3d(n[2], n[1], n[0], out.get(), in.get(), FFTW_ESTIMATE);
  }
  ~SpectralConvolver() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }
  SpectralConvolver(const SpectralConvolver&) = delete;
  SpectralConvolver& operator=(const SpectralConvolver&) = delete;

  using Spectrum = std::vector<std::complex<double>>;

  Spectrum forward(std::span<const double> f) const {
    auto in = fftw_buffer<double>(real_size_);
    auto out = fftw_buffer<fftw_complex>(complex_size_);
    std::copy(f.begin(), f.end(), in.get());
    fftw_execute_dft_r2c(forward_, in.get(), out.get());
    Spectrum s(complex_size_);
    for (std::size_t k = 0; k < complex_size_; ++k) s[k] = {out[k][0], out[k][1]};
    return s;
  }

  /// Inverse transform of a * b, normalised.
  std::vector<double> inverse_product(const Spectrum& a, const Spectrum& b) const {
    auto in = fftw_buffer<fftw_complex>(complex_size_);
    auto out = fftw_buffer<double>(real_size_);
    for (std::size_t k = 0; k < complex_size_; ++k) {
      const auto p = a[k] * b[k];
      in[k][0] = p.real();
      in[k][1] = p.imag();
    }
    fftw_execute_dft_c2r(backward_, in.get(), out.get());
    std::vector<double> r(real_size_);
    const double scale = 1.0 / static_cast<double>(real_size_);
    for (std::size_t k = 0; k < real_size_; ++k) r[k] = out[k] * scale;
    return r;
  }

  /// Cached spectrum of a kernel identified by `key`, built on first use.
  template <class Build>
  const Spectrum& kernel_spectrum(int key, Build&& build) {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, forward(build())).first;
    return it->second;
  }

 private:
  Cells n_;
  std::size_t real_size_ = 0;
  std::size_t complex_size_ = 0;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
  std::mutex cache_mutex_;
  std::map<int, Spectrum> cache_;
};

inline int derivative_key(const Derivative& d) { return d[0] + 3 * d[1] + 9 * d[2]; }

}  // namespace detail

/// Radial, nonnegative, unit-mass kernel phi^l(y) = l^-3 phi(y / l)
/// sampled on the lattice offsets |y| <= l of a grid, together with the
/// analytically differentiated kernels used for mollified derivatives.
class MollifierKernel {
 public:
  using Offset = std::array<int, 3>;

  double l() const { return l_; }
  KernelShape shape() const { return shape_; }
  const GridSpec& grid() const { return grid_; }
  ConvolutionPath path() const { return path_; }
  const std::vector<Offset>& offsets() const { return offsets_; }
  /// Normalised kernel values phi^l(y_s); sum(values) * dV = 1.
  const std::vector<double>& values() const { return values_; }
  /// Largest |offset| per axis in cells.
  const std::array<int, 3>& radius() const { return radius_; }
  /// The discrete Omega^l: cells whose whole stencil lies inside the domain.
  const Mask& support() const { return support_; }
  double mass() const { return pairwise_sum(values_) * grid_.cell_volume(); }

  /// Values of D^k phi^l at the stencil offsets, normalised so the discrete
  /// operator has zero sum and differentiates polynomials of degree |k|
  /// exactly.
  const std::vector<double>& derivative_values(const Derivative& d) const {
    const int order = derivative_order(d);
    if (order < 1 || order > 2 || d[0] < 0 || d[1] < 0 || d[2] < 0)
      throw UnsupportedError("mollified derivatives are available for orders 1 and 2");
    return derivatives_.at(detail::derivative_key(d));
  }

  /// Resolved convolution path for this kernel.
  bool uses_fft() const { return path_ == ConvolutionPath::fft; }

  detail::SpectralConvolver& spectral() const { return *spectral_; }

  /// Lattice offset y_s in physical units.
  Vec3 displacement(std::size_t s) const {
    const Vec3& dx = grid_.spacing();
    return {offsets_[s][0] * dx[0], offsets_[s][1] * dx[1], offsets_[s][2] * dx[2]};
  }

  /// Kernel values placed on the periodic grid (offset y at index y mod N),
  /// times the cell volume.
  std::vector<double> wrapped_weights(const std::vector<double>& values) const {
    std::vector<double> k(grid_.size(), 0.0);
    const Cells& N = grid_.cells();
    const double dv = grid_.cell_volume();
    for (std::size_t s = 0; s < offsets_.size(); ++s) {
      int p[3];
      for (int a = 0; a < 3; ++a) p[a] = ((offsets_[s][a] % N[a]) + N[a]) % N[a];
      k[grid_.index(p[0], p[1], p[2])] += values[s] * dv;
    }
    return k;
  }

  friend MollifierKernel build_kernel(double l, KernelShape shape, const GridSpec& grid, ConvolutionPath path);

 private:
  MollifierKernel(const GridSpec& grid) : grid_(grid) {}

  double l_ = 0.0;
  KernelShape shape_ = KernelShape::polynomial;
  GridSpec grid_;
  ConvolutionPath path_ = ConvolutionPath::direct;
  std::vector<Offset> offsets_;
  std::vector<double> values_;
  std::map<int, std::vector<double>> derivatives_;
  std::array<int, 3> radius_{};
  Mask support_;
  std::shared_ptr<detail::SpectralConvolver> spectral_;
};

namespace detail {

/// Unnormalised profile phi(z) and its derivatives with respect to z_a,
/// evaluated from s = |z|^2 and z.
struct Profile {
  KernelShape shape;

  double value(double s) const {
    if (s >= 1.0) return 0.0;
    if (shape == KernelShape::polynomial) {
      const double t = 1.0 - s;
      return t * t * t * t;
    }
    return std::exp(-1.0 / (1.0 - s));
  }

  double first(const Vec3& z, double s, int a) const {
    if (s >= 1.0) return 0.0;
    const double t = 1.0 - s;
    if (shape == KernelShape::polynomial) return -8.0 * z[a] * t * t * t;
    return value(s) * (-2.0 * z[a] / (t * t));
  }

  double second(const Vec3& z, double s, int a, int b) const {
    if (s >= 1.0) return 0.0;
    const double t = 1.0 - s;
    const double delta = a == b ? 1.0 : 0.0;
    if (shape == KernelShape::polynomial) return 48.0 * z[a] * z[b] * t * t - 8.0 * delta * t * t * t;
    const double ga = -2.0 * z[a] / (t * t);
    const double gb = -2.0 * z[b] / (t * t);
    const double gab = -2.0 * delta / (t * t) - 8.0 * z[a] * z[b] / (t * t * t);
    return value(s) * (ga * gb + gab);
  }
};

/// |y|^2 summed in sorted order.
inline double sorted_square_sum(double a, double b, double c) {
  double v[3] = {a, b, c};
  std::sort(v, v + 3);
  return (v[0] + v[1]) + v[2];
}

}  // namespace detail

/// Builds the kernel stencil for scale l on a grid. Refuses l < 4 dx.
inline MollifierKernel build_kernel(double l, KernelShape shape, const GridSpec& grid, ConvolutionPath path = ConvolutionPath::automatic) {
  using Offset3 = MollifierKernel::Offset;
  const double dxmax = grid.max_spacing();
  if (!(l >= 4.0 * dxmax * (1.0 - 1e-12)))
    throw ResolutionError("kernel scale l = " + std::to_string(l) + " is below 4 dx = " + std::to_string(4.0 * dxmax));
  MollifierKernel k(grid);
  k.l_ = l;
  k.shape_ = shape;
  const Vec3& dx = grid.spacing();
  const double dv = grid.cell_volume();
  const detail::Profile profile{shape};
  int r[3];
  for (int a = 0; a < 3; ++a) r[a] = static_cast<int>(std::floor(l / dx[a] * (1.0 + 1e-12)));
  // Periodic axes with a single cell are folded: every offset along them
  // lands on the same cell, so the stencil stores the line sums.
  std::array<bool, 3> folded;
  for (int a = 0; a < 3; ++a) folded[a] = grid.geometry().periodic_axis(a) && grid.cells()[a] == 1;

  struct Entry {
    double value = 0.0;
    std::array<double, 3> first{};
    std::array<double, 6> second{};  // (0,0) (0,1) (0,2) (1,1) (1,2) (2,2)
  };
  std::map<Offset3, std::size_t> slot;
  std::vector<Entry> entries;
  for (int kz = -r[2]; kz <= r[2]; ++kz)
    for (int jy = -r[1]; jy <= r[1]; ++jy)
      for (int ix = -r[0]; ix <= r[0]; ++ix) {
        const Vec3 z{ix * dx[0] / l, jy * dx[1] / l, kz * dx[2] / l};
        const double s = detail::sorted_square_sum(z[0] * z[0], z[1] * z[1], z[2] * z[2]);
        if (s > 1.0 + 1e-12) continue;
        const Offset3 key{folded[0] ? 0 : ix, folded[1] ? 0 : jy, folded[2] ? 0 : kz};
        auto [it, fresh] = slot.try_emplace(key, entries.size());
        if (fresh) {
          k.offsets_.push_back(key);
          entries.emplace_back();
        }
        Entry& e = entries[it->second];
        e.value += profile.value(s);
        for (int a = 0; a < 3; ++a) e.first[a] += profile.first(z, s, a);
        int q = 0;
        for (int a = 0; a < 3; ++a)
          for (int b = a; b < 3; ++b) e.second[q++] += profile.second(z, s, a, b);
      }
  k.radius_ = {0, 0, 0};
  for (const auto& o : k.offsets_)
    for (int a = 0; a < 3; ++a) k.radius_[a] = std::max(k.radius_[a], std::abs(o[a]));

  const std::size_t S = k.offsets_.size();
  std::vector<double> raw(S);
  for (std::size_t s = 0; s < S; ++s) raw[s] = entries[s].value;
  const double z_norm = pairwise_sum(raw) * dv;
  if (!(z_norm > 0.0)) throw ResolutionError("kernel has no mass on the lattice");
  k.values_.resize(S);
  for (std::size_t s = 0; s < S; ++s) k.values_[s] = raw[s] / z_norm;

  auto moment = [&](const std::vector<double>& w, auto&& poly) {
    std::vector<double> t(S);
    for (std::size_t s = 0; s < S; ++s) t[s] = w[s] * poly(k.displacement(s)) * dv;
    return pairwise_sum(t);
  };

  // First derivatives: d/dy_a phi^l(y) = l^-4 (d_a phi)(y / l) / Z. Scaled so
  // that x_a is differentiated exactly: -sum w_s y_a dV = 1.
  for (int a = 0; a < 3; ++a) {
    std::vector<double> w(S, 0.0);
    if (!folded[a]) {
      for (std::size_t s = 0; s < S; ++s) w[s] = entries[s].first[a] / (l * z_norm);
      const double m = -moment(w, [a](const Vec3& y) { return y[a]; });
      if (m != 0.0)
        for (double& x : w) x /= m;
    }
    Derivative d{0, 0, 0};
    d[a] = 1;
    k.derivatives_[detail::derivative_key(d)] = std::move(w);
  }
  // Second derivatives. Mixed kernels are scaled so y_a y_b has moment 1.
  // Pure kernels get a correction in span{phi, phi y_c^2} fixing the sum
  // to 0 and the y_c^2 moments to 2 delta_ac.
  std::vector<int> live;
  for (int c = 0; c < 3; ++c)
    if (!folded[c]) live.push_back(c);
  std::vector<std::vector<double>> basis{k.values_};
  for (int c : live) {
    std::vector<double> v(S);
    for (std::size_t s = 0; s < S; ++s) {
      const double y = k.displacement(s)[c] / l;
      v[s] = k.values_[s] * y * y;
    }
    basis.push_back(std::move(v));
  }
  auto even_moment = [&](const std::vector<double>& w, int row) {
    if (row == 0) return pairwise_sum(w) * dv;
    const int c = live[row - 1];
    return moment(w, [c](const Vec3& y) { return y[c] * y[c]; });
  };
  int q = 0;
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b, ++q) {
      std::vector<double> w(S, 0.0);
      if (!folded[a] && !folded[b]) {
        for (std::size_t s = 0; s < S; ++s) w[s] = entries[s].second[q] / (l * l * z_norm);
        if (a == b) {
          const std::size_t n = basis.size();
          std::vector<std::vector<double>> m(n, std::vector<double>(n + 1));
          for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) m[r][c] = even_moment(basis[c], static_cast<int>(r));
            const double target = r > 0 && live[r - 1] == a ? 2.0 : 0.0;
            m[r][n] = even_moment(w, static_cast<int>(r)) - target;
          }
          for (std::size_t c = 0; c < n; ++c) {
            std::size_t piv = c;
            for (std::size_t r = c + 1; r < n; ++r)
              if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
            std::swap(m[c], m[piv]);
            for (std::size_t r = 0; r < n; ++r) {
              if (r == c) continue;
              const double f = m[r][c] / m[c][c];
              for (std::size_t e = c; e <= n; ++e) m[r][e] -= f * m[c][e];
            }
          }
          for (std::size_t c = 0; c < n; ++c) {
            const double coef = m[c][n] / m[c][c];
            for (std::size_t s = 0; s < S; ++s) w[s] -= coef * basis[c][s];
          }
        } else {
          const double m = moment(w, [a, b](const Vec3& y) { return y[a] * y[b]; });
          if (m != 0.0)
            for (double& x : w) x /= m;
        }
      }
      Derivative d{0, 0, 0};
      d[a] += 1;
      d[b] += 1;
      k.derivatives_[detail::derivative_key(d)] = std::move(w);
    }

  // Discrete Omega^l.
  const CellGeometry cg = cell_geometry(grid);
  const DomainGeometry& g = grid.geometry();
  const Cells& N = grid.cells();
  k.support_ = Mask(grid.size());
  const double reach = l + 2.0 * dxmax;
  for (std::size_t c = 0; c < grid.size(); ++c) {
    if (!cg.inside[c]) continue;
    const auto ijk = grid.unravel(c);
    bool fits = true;
    for (int a = 0; a < 3 && fits; ++a)
      if (!g.periodic_axis(a) && (ijk[a] < k.radius_[a] || ijk[a] > N[a] - 1 - k.radius_[a])) fits = false;
    if (fits && g.shape() == Shape::ball && cg.distance[c] < reach) {
      for (const auto& o : k.offsets_) {
        const std::size_t m = grid.index(ijk[0] - o[0], ijk[1] - o[1], ijk[2] - o[2]);
        if (!cg.inside[m]) {
          fits = false;
          break;
        }
      }
    }
    k.support_.set(c, fits);
  }

  if (path == ConvolutionPath::automatic) path = S >= 64 ? ConvolutionPath::fft : ConvolutionPath::direct;
  k.path_ = path;
  if (path == ConvolutionPath::fft) k.spectral_ = std::make_shared<detail::SpectralConvolver>(grid.cells());
  return k;
}

namespace detail {

/// Per-axis lookup from (i - offset + radius) to a grid index; periodic
/// axes wrap, walled axes are only queried in range.
struct ShiftTable {
  std::array<std::vector<int>, 3> axis;
  std::array<int, 3> radius;

  ShiftTable(const GridSpec& grid, const std::array<int, 3>& r) : radius(r) {
    const Cells& N = grid.cells();
    for (int a = 0; a < 3; ++a) {
      axis[a].resize(N[a] + 2 * r[a]);
      for (int i = -r[a]; i < N[a] + r[a]; ++i) axis[a][i + r[a]] = ((i % N[a]) + N[a]) % N[a];
    }
  }
  int operator()(int a, int i) const { return axis[a][i + radius[a]]; }
};

/// Direct stencil convolution sum_s w_s dV f(x - y_s) on the support.
inline std::vector<double> direct_convolve(const MollifierKernel& k, const std::vector<double>& w, std::span<const double> f) {
  const GridSpec& grid = k.grid();
  const ShiftTable shift(grid, k.radius());
  const double dv = grid.cell_volume();
  const auto& offs = k.offsets();
  const Cells& N = grid.cells();
  std::vector<double> out(grid.size(), 0.0);
  const Mask& support = k.support();
  for_each_cell(grid, [&](std::size_t c) {
    if (!support[c]) return;
    const auto ijk = grid.unravel(c);
    double acc = 0.0;
    for (std::size_t s = 0; s < offs.size(); ++s) {
      const int i = shift(0, ijk[0] - offs[s][0]);
      const int j = shift(1, ijk[1] - offs[s][1]);
      const int kk = shift(2, ijk[2] - offs[s][2]);
      acc += w[s] * f[static_cast<std::size_t>(i) + static_cast<std::size_t>(N[0]) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(N[1]) * kk)];
    }
    out[c] = acc * dv;
  });
  return out;
}

inline void restrict_to(std::vector<double>& v, const Mask& m) {
  for (std::size_t c = 0; c < v.size(); ++c)
    if (!m[c]) v[c] = 0.0;
}

}  // namespace detail

/// Applies a set of kernels (identified by derivative multi-index, with
/// {0,0,0} meaning the mollifier itself) to one scalar array. The FFT path
/// transforms the input once.
inline std::vector<std::vector<double>> convolve_all(const MollifierKernel& k, std::span<const double> f, const std::vector<Derivative>& which) {
  if (f.size() != k.grid().size()) throw ArgumentError("field does not live on the kernel's grid");
  std::vector<std::vector<double>> out;
  out.reserve(which.size());
  auto weights_of = [&](const Derivative& d) -> const std::vector<double>& {
    return derivative_order(d) == 0 ? k.values() : k.derivative_values(d);
  };
  if (!k.uses_fft()) {
    for (const auto& d : which) out.push_back(detail::direct_convolve(k, weights_of(d), f));
    return out;
  }
  auto& sc = k.spectral();
  const auto spectrum = sc.forward(f);
  for (const auto& d : which) {
    const auto& kern = sc.kernel_spectrum(detail::derivative_key(d), [&] { return k.wrapped_weights(weights_of(d)); });
    auto v = sc.inverse_product(spectrum, kern);
    detail::restrict_to(v, k.support());
    out.push_back(std::move(v));
  }
  return out;
}

inline std::vector<double> convolve(const MollifierKernel& k, std::span<const double> f, const Derivative& d = {0, 0, 0}) {
  return std::move(convolve_all(k, f, {d}).front());
}

/// f^l on the discrete Omega^l (zero elsewhere), componentwise.
template <int Rank>
Field<Rank> mollify(const Field<Rank>& f, const MollifierKernel& k) {
  if (!f.grid().same_layout(k.grid())) throw ArgumentError("field and kernel grids differ");
  Field<Rank> out(f.grid());
  for (int a = 0; a < Rank; ++a) out.component(a) = convolve(k, f.component(a));
  return out;
}

/// D^k f^l computed with the differentiated kernel, componentwise.
template <int Rank>
Field<Rank> mollified_derivative(const Field<Rank>& f, const MollifierKernel& k, const Derivative& d) {
  if (!f.grid().same_layout(k.grid())) throw ArgumentError("field and kernel grids differ");
  if (derivative_order(d) < 1 || derivative_order(d) > 2) throw UnsupportedError("mollified derivatives are available for orders 1 and 2");
  Field<Rank> out(f.grid());
  for (int a = 0; a < Rank; ++a) out.component(a) = convolve(k, f.component(a), d);
  return out;
}

/// Scalar f^l together with its three first derivatives.
struct MollifiedScalar {
  std::vector<double> value;
  std::array<std::vector<double>, 3> gradient;
};

inline MollifiedScalar mollify_with_gradient(const MollifierKernel& k, std::span<const double> f) {
  auto r = convolve_all(k, f, {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  return {std::move(r[0]), {std::move(r[1]), std::move(r[2]), std::move(r[3])}};
}

/// Pieces of the commutator identity
///   (fg)^l = f^l g^l + int phi^l(y) (f(x-y) - f(x)) (g(x-y) - g(x)) dy
///            - (f - f^l)(g - g^l).
struct CommutatorSplit {
  ScalarField lhs;
  ScalarField resolved;
  ScalarField increment_term;
  ScalarField defect_term;
};

/// On the direct path the increment term is an explicit stencil sum of
/// products of increments; the FFT path assembles it from mollified
/// products.
inline CommutatorSplit commutator_split(const ScalarField& f, const ScalarField& g, const MollifierKernel& k) {
  require_same_grid(f, g);
  if (!f.grid().same_layout(k.grid())) throw ArgumentError("field and kernel grids differ");
  const GridSpec& grid = f.grid();
  const auto& fv = f.component(0);
  const auto& gv = g.component(0);
  std::vector<double> fg(grid.size());
  for (std::size_t c = 0; c < fg.size(); ++c) fg[c] = fv[c] * gv[c];

  CommutatorSplit r{ScalarField(grid), ScalarField(grid), ScalarField(grid), ScalarField(grid)};
  r.lhs.component(0) = convolve(k, fg);
  const auto fl = convolve(k, fv);
  const auto gl = convolve(k, gv);
  const Mask& support = k.support();
  auto& res = r.resolved.component(0);
  auto& inc = r.increment_term.component(0);
  auto& def = r.defect_term.component(0);

  if (!k.uses_fft()) {
    const detail::ShiftTable shift(grid, k.radius());
    const auto& offs = k.offsets();
    const auto& w = k.values();
    const double dv = grid.cell_volume();
    const Cells& N = grid.cells();
    for_each_cell(grid, [&](std::size_t c) {
      if (!support[c]) return;
      const auto ijk = grid.unravel(c);
      double acc = 0.0;
      for (std::size_t s = 0; s < offs.size(); ++s) {
        const std::size_t m = static_cast<std::size_t>(shift(0, ijk[0] - offs[s][0])) +
                              static_cast<std::size_t>(N[0]) * (static_cast<std::size_t>(shift(1, ijk[1] - offs[s][1])) +
                                                                static_cast<std::size_t>(N[1]) * shift(2, ijk[2] - offs[s][2]));
        acc += w[s] * (fv[m] - fv[c]) * (gv[m] - gv[c]);
      }
      inc[c] = acc * dv;
    });
  }
  for (std::size_t c = 0; c < grid.size(); ++c) {
    if (!support[c]) continue;
    res[c] = fl[c] * gl[c];
    def[c] = (fv[c] - fl[c]) * (gv[c] - gl[c]);
    if (k.uses_fft()) inc[c] = r.lhs(0, c) - fv[c] * gl[c] - fl[c] * gv[c] + fv[c] * gv[c];
  }
  return r;
}

}  // namespace mhdflux
