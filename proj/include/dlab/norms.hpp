#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "dlab/grid.hpp"
#include "dlab/littlewood_paley.hpp"
#include "dlab/rational.hpp"
#include "dlab/spectral.hpp"

namespace dlab {

// Lebesgue exponent pair (q,r); exact rationals so admissibility and predicted
// exponents are decided without rounding. Rational::infinity() encodes sup norms.
struct LebesguePair {
  Rational q{2};
  Rational r{2};

  static LebesguePair of(Rational q, Rational r) {
    if (!q.is_inf() && q < Rational(1))
      throw std::invalid_argument("LebesguePair: q must be >= 1 or inf");
    if (!r.is_inf() && r < Rational(1))
      throw std::invalid_argument("LebesguePair: r must be >= 1 or inf");
    return LebesguePair{q, r};
  }

  std::string str() const { return "(" + q.str() + "," + r.str() + ")"; }
};

// spatial L^r with Riemann weight; r = inf is the lattice max (an under-estimate,
// flagged by callers per the reporting contract)
inline double spatial_lp_norm(const Field& f, const Rational& r) {
  const auto& v = f.values;
  if (r.is_inf()) {
    double m = 0.0;
    for (const auto& z : v) m = std::max(m, std::abs(z));
    return m;
  }
  const double rd = r.value();
  double s;
  if (rd == 2.0) {
    s = pairwise_sum(v.size(), [&](size_t i) { return std::norm(v[i]); });
  } else {
    s = pairwise_sum(v.size(), [&](size_t i) { return std::pow(std::abs(v[i]), rd); });
  }
  return std::pow(s * f.grid.cell_volume(), 1.0 / rd);
}

// trapezoid rule on the uniform time samples
inline double time_integral(const std::vector<double>& times, const std::vector<double>& g) {
  if (times.size() != g.size()) throw std::invalid_argument("time_integral: size mismatch");
  if (times.size() < 2) return 0.0;
  double dt = times[1] - times[0];
  double s = 0.5 * (g.front() + g.back());
  for (size_t k = 1; k + 1 < g.size(); ++k) s += g[k];
  return s * dt;
}

// L^q_t L^r_x over the sampled slab [0,T] x [0,L)^n
inline double mixed_norm(const SpacetimeField& F, const LebesguePair& p) {
  F.validate();
  std::vector<double> S(F.frames.size());
  for (size_t k = 0; k < F.frames.size(); ++k) S[k] = spatial_lp_norm(F.frames[k], p.r);
  if (p.q.is_inf()) {
    double m = 0.0;
    for (double s : S) m = std::max(m, s);
    return m;
  }
  const double qd = p.q.value();
  std::vector<double> Sq(S.size());
  for (size_t k = 0; k < S.size(); ++k) Sq[k] = std::pow(S[k], qd);
  return std::pow(time_integral(F.times, Sq), 1.0 / qd);
}

// H^s / Hdot^s via Parseval weights; the homogeneous kind ignores the xi=0 mode
inline double sobolev_norm(const Field& f, double s, SobolevKind kind) {
  auto spec = spectrum_of(f);
  std::vector<double> w(spec.size());
  for_each_mode(f.grid, [&](int64_t idx, const std::array<double, 3>& xi) {
    double r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    if (kind == SobolevKind::homogeneous) {
      w[static_cast<size_t>(idx)] = r2 == 0.0 ? 0.0 : std::pow(r2, s);
    } else {
      w[static_cast<size_t>(idx)] = std::pow(1.0 + r2, s);
    }
  });
  double acc = pairwise_sum(spec.size(), [&](size_t i) { return w[i] * std::norm(spec[i]); });
  // |fhat|^2 weight per mode: h^{2n} * L^{-n} = h^n / M^n
  return std::sqrt(acc * f.grid.cell_volume() / static_cast<double>(f.grid.size()));
}

// 2/q = n(1/2 - 1/r), q,r >= 2, excluding (2,inf) when n = 2
inline bool admissible_check(const LebesguePair& p, int n) {
  if (!(p.q.is_inf() || p.q >= Rational(2))) return false;
  if (!(p.r.is_inf() || p.r >= Rational(2))) return false;
  if (n == 2 && p.q == Rational(2) && p.r.is_inf()) return false;
  Rational lhs = Rational(2) * p.q.inv();
  Rational rhs = Rational(n) * (Rational(1, 2) - p.r.inv());
  return lhs == rhs;
}

// Exponents this laboratory measures, in exact arithmetic:
//   alpha          = (n+1)(1 - 2/r) - 4/q        (cap interaction decay)
//   bilinear_gain  = 1 - 2/r                     ((N1/N2) product-norm gain)
//   trilinear_gain = 1/2                         ((min/max) trilinear gain)
//   cap_lower      = n+1 - 2(n+1)/r - 4/q        (squashed-cap lower bound)
//   gwp_threshold  = 4(n-2)/(7n-8)               (regularity threshold)
struct PredictedExponents {
  Rational alpha;
  Rational bilinear_gain;
  Rational trilinear_gain;
  Rational cap_lower;
  Rational gwp_threshold;
};

inline PredictedExponents predicted_exponents(const LebesguePair& p, int n) {
  Rational inv_q = p.q.inv();
  Rational inv_r = p.r.inv();
  PredictedExponents e{
      Rational(n + 1) * (Rational(1) - Rational(2) * inv_r) - Rational(4) * inv_q,
      Rational(1) - Rational(2) * inv_r,
      Rational(1, 2),
      Rational(n + 1) - Rational(2 * (n + 1)) * inv_r - Rational(4) * inv_q,
      Rational(4 * (n - 2), 7 * n - 8),
  };
  return e;
}

// smoothing threshold for the power nonlinearity: 1/2 for n=3,4; 1 - 8/n^2 for n>=5
inline Rational power_smoothing_threshold(int n) {
  if (n < 3) throw std::invalid_argument("power_smoothing_threshold: n >= 3");
  if (n <= 4) return Rational(1, 2);
  return Rational(1) - Rational(8, static_cast<long long>(n) * n);
}

// ---- space-time X^{s,b} diagnostic -------------------------------------
// Windowed surrogate of the <xi>^{2s} <tau - |xi|^2>^{2b} weighted space-time
// norm. tau lattice comes from the time sampling; the default window is a
// C^infty taper equal to 1 on [T/4, 3T/4] and supported inside (0,T).

// 1 on [1/4, 3/4], 0 outside (0,1), C^infty
inline double taper_window01(double u) { return smoothstep(4.0 * u) * smoothstep(4.0 * (1.0 - u)); }

inline std::function<double(double)> xsb_default_window(double T) {
  return [T](double t) { return taper_window01(t / T); };
}

inline double xsb_norm(const SpacetimeField& u, double s, double b,
                       const std::function<double(double)>& window) {
  u.validate();
  const size_t K = u.times.size() >= 2 ? u.times.size() - 1 : u.times.size();
  if (K < 8) throw std::invalid_argument("xsb_norm: needs at least 8 time samples");
  const Grid& g = u.grid;
  const double T = u.times.back() - u.times.front();
  const double dt = u.dt();

  // spatial transform of each windowed frame (frames 0..K-1; the window kills t=T)
  std::vector<std::vector<cplx>> specs(K);
  for (size_t k = 0; k < K; ++k) {
    Field wf = u.frames[k];
    double w = window(u.times[k]);
    for (auto& v : wf.values) v *= w;
    specs[k] = spectrum_of(wf);
  }

  auto xisq = xi_sq_table(g);
  const double two_pi = 2.0 * std::numbers::pi;
  // node weight L^{-n} T^{-1}; spectral values h^n * dt * DFT
  const double weight =
      (g.cell_volume() * g.cell_volume() / std::pow(g.L, g.n)) * (dt * dt / T);

  double acc = 0.0;
  const auto Kd = static_cast<double>(K);
  std::vector<cplx> col(K);
  for (int64_t mode = 0; mode < g.size(); ++mode) {
    for (size_t k = 0; k < K; ++k) col[k] = specs[k][static_cast<size_t>(mode)];
    double xs = std::pow(1.0 + xisq[static_cast<size_t>(mode)], s);
    double mode_acc = 0.0;
    for (size_t m = 0; m < K; ++m) {
      long mm = static_cast<long>(m) < static_cast<long>(K / 2)
                    ? static_cast<long>(m)
                    : static_cast<long>(m) - static_cast<long>(K);
      double tau = two_pi * static_cast<double>(mm) / T;
      // time kernel e^{+i t tau}: a free wave e^{i(k.x - |k|^2 t)} populates tau = |k|^2
      cplx ut{0.0, 0.0};
      for (size_t k = 0; k < K; ++k) {
        double ph = two_pi * static_cast<double>(m * k) / Kd;
        ut += col[k] * cplx{std::cos(ph), std::sin(ph)};
      }
      double dev = tau - xisq[static_cast<size_t>(mode)];
      double tb = std::pow(1.0 + dev * dev, b);
      mode_acc += xs * tb * std::norm(ut);
    }
    acc += mode_acc;
  }
  return std::sqrt(acc * weight);
}

inline double xsb_norm(const SpacetimeField& u, double s, double b) {
  return xsb_norm(u, s, b, xsb_default_window(u.times.back() - u.times.front()));
}

}  // namespace dlab
