#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dlab/fft.hpp"
#include "dlab/grid.hpp"

namespace dlab {

namespace detail {
inline std::vector<int> fft_dims(const Grid& g) {
  return std::vector<int>(static_cast<size_t>(g.n), g.M);
}
}  // namespace detail

// unnormalized forward DFT of the lattice values
inline std::vector<cplx> spectrum_of(const Field& f) {
  f.validate();
  auto dims = detail::fft_dims(f.grid);
  return fft_forward(f.grid.n, dims.data(), f.values);
}

// inverse of spectrum_of
inline Field field_from_spectrum(const Grid& g, const std::vector<cplx>& spec) {
  auto dims = detail::fft_dims(g);
  Field out{g, fft_backward(g.n, dims.data(), spec)};
  const double scale = 1.0 / static_cast<double>(g.size());
  for (auto& v : out.values) v *= scale;
  return out;
}

// F^{-1}(sigma(xi) * F f). sigma must be finite on every lattice frequency;
// xi = 0 singularities are the caller's job (riesz/fractional handle theirs).
template <class Sym>
Field apply_symbol(const Field& f, Sym&& sigma) {
  auto spec = spectrum_of(f);
  bool bad = false;
  for_each_mode(f.grid, [&](int64_t idx, const std::array<double, 3>& xi) {
    cplx s = sigma(xi);
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) bad = true;
    spec[static_cast<size_t>(idx)] *= s;
  });
  if (bad) throw std::invalid_argument("apply_symbol: non-finite symbol value on the lattice");
  return field_from_spectrum(f.grid, spec);
}

inline void apply_symbol_inplace_spectrum(std::vector<cplx>& spec,
                                          const std::vector<double>& symbol) {
  for (size_t i = 0; i < spec.size(); ++i) spec[i] *= symbol[i];
}

// |xi|^2 table, reused by propagators and energies
inline std::vector<double> xi_sq_table(const Grid& g) {
  std::vector<double> t(static_cast<size_t>(g.size()));
  for_each_mode(g, [&](int64_t idx, const std::array<double, 3>& xi) {
    t[static_cast<size_t>(idx)] = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
  });
  return t;
}

inline void propagate_spectrum(std::vector<cplx>& spec, const std::vector<double>& xisq,
                               double t) {
  for (size_t i = 0; i < spec.size(); ++i) {
    double ph = -t * xisq[i];
    spec[i] *= cplx{std::cos(ph), std::sin(ph)};
  }
}

// e^{it Laplacian}: multiplier e^{-i t |xi|^2}; unitary, group law in t.
inline Field free_propagate(const Field& f, double t) {
  auto spec = spectrum_of(f);
  auto xisq = xi_sq_table(f.grid);
  propagate_spectrum(spec, xisq, t);
  return field_from_spectrum(f.grid, spec);
}

inline SpacetimeField propagate_trajectory(const Field& f, const std::vector<double>& times) {
  if (times.empty()) throw std::invalid_argument("propagate_trajectory: empty times");
  if (std::abs(times.front()) > 1e-14)
    throw std::invalid_argument("propagate_trajectory: times must start at 0");
  SpacetimeField out{f.grid, times, {}};
  out.frames.reserve(times.size());
  auto base = spectrum_of(f);
  auto xisq = xi_sq_table(f.grid);
  for (double t : times) {
    auto spec = base;
    propagate_spectrum(spec, xisq, t);
    out.frames.push_back(field_from_spectrum(f.grid, spec));
  }
  out.validate();
  return out;
}

enum class SobolevKind { homogeneous, inhomogeneous };

// |xi|^s (zero mode annihilated) or <xi>^s
inline Field fractional_power(const Field& f, double s, SobolevKind kind) {
  return apply_symbol(f, [&](const std::array<double, 3>& xi) -> cplx {
    double r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    if (kind == SobolevKind::homogeneous) {
      if (r2 == 0.0) return 0.0;
      return std::pow(r2, 0.5 * s);
    }
    return std::pow(1.0 + r2, 0.5 * s);
  });
}

// |nabla|^{2-n}: symbol |xi|^{2-n} with the xi=0 mode zeroed. n >= 3 only.
inline Field riesz_potential(const Field& f) {
  if (f.grid.n < 3) throw std::invalid_argument("riesz_potential: requires n >= 3");
  return fractional_power(f, 2.0 - f.grid.n, SobolevKind::homogeneous);
}

// ---- alias-safe products --------------------------------------------------
// Pointwise products that later pass through a spectral symbol are formed on a
// 2x zero-padded grid and truncated back. When the factors' occupied per-axis
// bands provably sum below Nyquist the plain lattice product is identical and
// is used directly.

// largest per-axis |mode index| carrying mass above a roundoff threshold
inline int max_band_index(const Grid& g, const std::vector<cplx>& spec) {
  double maxabs = 0.0;
  for (const auto& v : spec) maxabs = std::max(maxabs, std::abs(v));
  const double thresh = maxabs * 1e-14;
  int band = 0;
  const int M = g.M;
  int64_t idx = 0;
  const int e0 = g.n >= 1 ? M : 1, e1 = g.n >= 2 ? M : 1, e2 = g.n >= 3 ? M : 1;
  for (int i0 = 0; i0 < e0; ++i0) {
    int m0 = std::abs(g.mode_of_index(i0));
    for (int i1 = 0; i1 < e1; ++i1) {
      int m1 = g.n >= 2 ? std::abs(g.mode_of_index(i1)) : 0;
      for (int i2 = 0; i2 < e2; ++i2, ++idx) {
        if (std::abs(spec[static_cast<size_t>(idx)]) > thresh) {
          int m2 = g.n >= 3 ? std::abs(g.mode_of_index(i2)) : 0;
          band = std::max({band, m0, m1, m2});
        }
      }
    }
  }
  return band;
}

namespace detail {

inline int64_t fine_index(const Grid& g, const Grid& fine, int64_t coarse_idx) {
  int64_t rem = coarse_idx;
  int64_t out = 0;
  std::array<int, 3> ids{0, 0, 0};
  for (int a = g.n - 1; a >= 0; --a) {
    ids[static_cast<size_t>(a)] = static_cast<int>(rem % g.M);
    rem /= g.M;
  }
  for (int a = 0; a < g.n; ++a) {
    int m = g.mode_of_index(ids[static_cast<size_t>(a)]);
    int fi = m >= 0 ? m : fine.M + m;
    out = out * fine.M + fi;
  }
  return out;
}

}  // namespace detail

// spectrum (unnormalized DFT values) of the alias-safe product, on the coarse grid
inline std::vector<cplx> product_spectrum(const Grid& g, const std::vector<cplx>& Fa,
                                          const std::vector<cplx>& Fb) {
  const int half = g.M / 2;
  const int ba = max_band_index(g, Fa);
  const int bb = max_band_index(g, Fb);
  auto dims = detail::fft_dims(g);
  const double invMn = 1.0 / static_cast<double>(g.size());

  if (ba + bb <= half - 1) {
    // product exactly band-limited inside the coarse band: no aliasing possible
    auto a = fft_backward(g.n, dims.data(), Fa);
    auto b = fft_backward(g.n, dims.data(), Fb);
    std::vector<cplx> prod(a.size());
    for (size_t i = 0; i < prod.size(); ++i) prod[i] = a[i] * invMn * (b[i] * invMn);
    return fft_forward(g.n, dims.data(), prod);
  }

  Grid fine = Grid::make(g.n, g.L, 2 * g.M);
  auto fdims = detail::fft_dims(fine);
  std::vector<cplx> Fa_fine(static_cast<size_t>(fine.size()), cplx{0.0, 0.0});
  std::vector<cplx> Fb_fine(static_cast<size_t>(fine.size()), cplx{0.0, 0.0});
  for (int64_t i = 0; i < g.size(); ++i) {
    int64_t j = detail::fine_index(g, fine, i);
    Fa_fine[static_cast<size_t>(j)] = Fa[static_cast<size_t>(i)];
    Fb_fine[static_cast<size_t>(j)] = Fb[static_cast<size_t>(i)];
  }
  auto a = fft_backward(fine.n, fdims.data(), Fa_fine);
  auto b = fft_backward(fine.n, fdims.data(), Fb_fine);
  // band-limited interpolation keeps the coarse 1/M^n normalization
  std::vector<cplx> prod(a.size());
  for (size_t i = 0; i < prod.size(); ++i) prod[i] = a[i] * invMn * (b[i] * invMn);
  auto Pfine = fft_forward(fine.n, fdims.data(), prod);
  std::vector<cplx> out(static_cast<size_t>(g.size()));
  const double scale = 1.0 / static_cast<double>(1 << g.n);
  for (int64_t i = 0; i < g.size(); ++i) {
    int64_t j = detail::fine_index(g, fine, i);
    out[static_cast<size_t>(i)] = Pfine[static_cast<size_t>(j)] * scale;
  }
  return out;
}

inline Field dealiased_product(const Field& a, const Field& b) {
  if (a.grid != b.grid) throw std::invalid_argument("dealiased_product: grid mismatch");
  return field_from_spectrum(a.grid, product_spectrum(a.grid, spectrum_of(a), spectrum_of(b)));
}

// |a|^2 as a real lattice field, alias-safe
inline Field dealiased_modsq(const Field& a) {
  Field out = dealiased_product(a, conj(a));
  for (auto& v : out.values) v = cplx{v.real(), 0.0};
  return out;
}

}  // namespace dlab
