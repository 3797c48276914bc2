#pragma once

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>

#include "dlab/grid.hpp"
#include "dlab/rng.hpp"
#include "dlab/spectral.hpp"

namespace dlab {

// ---- smooth cutoffs ---------------------------------------------------

inline double exp_bump(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

// C^infty monotone step: 0 for x<=0, 1 for x>=1
inline double smoothstep(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double a = exp_bump(x);
  double b = exp_bump(1.0 - x);
  return a / (a + b);
}

// radial ramp: 1 on [0,1], 0 on [2,inf), monotone
inline double lp_theta(double r) { return 1.0 - smoothstep(r - 1.0); }

// annulus cutoff chi(xi) = theta(|xi|) - theta(2|xi|); support {1/2 <= |xi| <= 2},
// telescoping sum_N chi(xi/N) = 1 for xi != 0
inline double lp_chi(double r) { return lp_theta(r) - lp_theta(2.0 * r); }

// ---- dyadic index -------------------------------------------------------

struct DyadicIndex {
  double N = 1.0;

  static DyadicIndex of(double N) {
    if (!(N > 0.0)) throw std::invalid_argument("DyadicIndex: N must be positive");
    double l = std::log2(N);
    if (std::abs(l - std::round(l)) > 1e-12)
      throw std::invalid_argument("DyadicIndex: N must be a power of two");
    return DyadicIndex{N};
  }

  int log2N() const { return static_cast<int>(std::lround(std::log2(N))); }
};

// ---- frequency support specs --------------------------------------------

// Canonical text forms: "annulus:N=8", "ball:c=(1,0,0),r=0.25",
// "cube:side=1", "cap:rho=0.125,sign=+".
struct SupportSpec {
  enum class Kind { annulus, ball, cube, cap };

  Kind kind = Kind::annulus;
  double N = 1.0;                          // annulus {N/2 <= |xi| <= 2N}
  std::array<double, 3> center{0, 0, 0};   // ball
  double radius = 0.0;                     // ball
  double side_half = 0.0;                  // cube Q(a): |xi_i| <= a
  double rho = 0.0;                        // cap {|xi_1 - sign| <= rho^2, |xi_i| <= rho}
  int sign = +1;

  static SupportSpec annulus(double N) {
    SupportSpec s;
    s.kind = Kind::annulus;
    s.N = DyadicIndex::of(N).N;
    return s;
  }
  static SupportSpec ball(std::array<double, 3> c, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("SupportSpec: ball radius must be positive");
    SupportSpec s;
    s.kind = Kind::ball;
    s.center = c;
    s.radius = r;
    return s;
  }
  static SupportSpec cube(double a) {
    if (!(a > 0.0)) throw std::invalid_argument("SupportSpec: cube half-side must be positive");
    SupportSpec s;
    s.kind = Kind::cube;
    s.side_half = a;
    return s;
  }
  static SupportSpec cap(double rho, int sign) {
    if (!(rho > 0.0)) throw std::invalid_argument("SupportSpec: cap rho must be positive");
    if (sign != 1 && sign != -1) throw std::invalid_argument("SupportSpec: cap sign must be +-1");
    SupportSpec s;
    s.kind = Kind::cap;
    s.rho = rho;
    s.sign = sign;
    return s;
  }

  bool contains(const std::array<double, 3>& xi, int n) const {
    switch (kind) {
      case Kind::annulus: {
        double r = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
        return r >= 0.5 * N && r <= 2.0 * N;
      }
      case Kind::ball: {
        double d2 = 0.0;
        for (int a = 0; a < n; ++a) d2 += (xi[size_t(a)] - center[size_t(a)]) * (xi[size_t(a)] - center[size_t(a)]);
        return d2 <= radius * radius;
      }
      case Kind::cube: {
        for (int a = 0; a < n; ++a)
          if (std::abs(xi[size_t(a)]) > side_half) return false;
        return true;
      }
      case Kind::cap: {
        if (std::abs(xi[0] - sign) > rho * rho) return false;
        for (int a = 1; a < n; ++a)
          if (std::abs(xi[size_t(a)]) > rho) return false;
        return true;
      }
    }
    return false;
  }

  // farthest point of the set from the origin
  double outer_radius(int n) const {
    switch (kind) {
      case Kind::annulus:
        return 2.0 * N;
      case Kind::ball: {
        double c = 0.0;
        for (int a = 0; a < n; ++a) c += center[size_t(a)] * center[size_t(a)];
        return std::sqrt(c) + radius;
      }
      case Kind::cube:
        return side_half * std::sqrt(double(n));
      case Kind::cap: {
        double r2 = (1.0 + rho * rho) * (1.0 + rho * rho) + (n - 1) * rho * rho;
        return std::sqrt(r2);
      }
    }
    return 0.0;
  }

  void validate(const Grid& g) const {
    if (outer_radius(g.n) > g.resolvable_radius())
      throw std::invalid_argument("SupportSpec: support exceeds the grid's resolvable band");
  }

  std::string str() const {
    char buf[160];
    switch (kind) {
      case Kind::annulus:
        std::snprintf(buf, sizeof buf, "annulus:N=%g", N);
        break;
      case Kind::ball:
        std::snprintf(buf, sizeof buf, "ball:c=(%g,%g,%g),r=%g", center[0], center[1], center[2],
                      radius);
        break;
      case Kind::cube:
        std::snprintf(buf, sizeof buf, "cube:side=%g", side_half);
        break;
      case Kind::cap:
        std::snprintf(buf, sizeof buf, "cap:rho=%g,sign=%c", rho, sign > 0 ? '+' : '-');
        break;
    }
    return buf;
  }

  static SupportSpec parse(const std::string& text);
};

inline SupportSpec SupportSpec::parse(const std::string& text) {
  auto fail = [&]() -> SupportSpec {
    throw std::invalid_argument("SupportSpec: cannot parse '" + text + "'");
  };
  auto colon = text.find(':');
  if (colon == std::string::npos) return fail();
  std::string kind = text.substr(0, colon);
  std::string rest = text.substr(colon + 1);
  if (kind == "annulus") {
    double N = 0;
    if (std::sscanf(rest.c_str(), "N=%lf", &N) != 1) return fail();
    return annulus(N);
  }
  if (kind == "ball") {
    double cx = 0, cy = 0, cz = 0, r = 0;
    if (std::sscanf(rest.c_str(), "c=(%lf,%lf,%lf),r=%lf", &cx, &cy, &cz, &r) == 4)
      return ball({cx, cy, cz}, r);
    if (std::sscanf(rest.c_str(), "c=(%lf,%lf),r=%lf", &cx, &cy, &r) == 3)
      return ball({cx, cy, 0}, r);
    if (std::sscanf(rest.c_str(), "c=(%lf),r=%lf", &cx, &r) == 2) return ball({cx, 0, 0}, r);
    return fail();
  }
  if (kind == "cube") {
    double a = 0;
    if (std::sscanf(rest.c_str(), "side=%lf", &a) != 1) return fail();
    return cube(a);
  }
  if (kind == "cap") {
    double rho = 0;
    char sgn = '+';
    if (std::sscanf(rest.c_str(), "rho=%lf,sign=%c", &rho, &sgn) != 2) return fail();
    return cap(rho, sgn == '-' ? -1 : +1);
  }
  return fail();
}

// ---- projections ----------------------------------------------------------

struct LpResult {
  Field field;
  bool out_of_band = false;  // annulus missed the resolvable band entirely
};

// P_N: annulus multiplier chi(xi/N), Fourier support inside {N/2 <= |xi| <= 2N}
inline LpResult lp_project_checked(const Field& f, double N) {
  DyadicIndex::of(N);
  bool out_of_band = 0.5 * N > f.grid.resolvable_radius();
  Field out = apply_symbol(f, [&](const std::array<double, 3>& xi) -> cplx {
    double r = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
    return lp_chi(r / N);
  });
  return LpResult{std::move(out), out_of_band};
}

inline Field lp_project(const Field& f, double N) { return lp_project_checked(f, N).field; }

// low piece: id - sum_{N>1} P_N, multiplier theta(|xi|); the xi=0 mode lands here
inline Field low_project(const Field& f) {
  return apply_symbol(f, [](const std::array<double, 3>& xi) -> cplx {
    double r = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
    return lp_theta(r);
  });
}

// ---- band-limited random test fields ---------------------------------------
// Independent standard complex gaussians on lattice modes inside the support set,
// normalized to unit L^2. Coefficients are keyed by (seed, integer mode tuple),
// so the result is independent of generation order and a shared mode draws the
// same value on refined or rescaled grids.
inline Field band_random(const Grid& g, const SupportSpec& spec, uint64_t seed) {
  spec.validate(g);
  std::vector<cplx> coeffs(static_cast<size_t>(g.size()), cplx{0.0, 0.0});
  int64_t count = 0;
  for_each_mode(g, [&](int64_t idx, const std::array<double, 3>& xi) {
    if (spec.contains(xi, g.n)) {
      coeffs[static_cast<size_t>(idx)] = keyed_complex_gaussian(seed, mode_pack(g, idx));
      ++count;
    }
  });
  if (count == 0) throw std::invalid_argument("band_random: support set is empty on this grid");
  // ||f||_2^2 = L^{-n} sum |fhat|^2 with fhat = h^n * DFT values
  double s = pairwise_sum(coeffs.size(), [&](size_t i) { return std::norm(coeffs[i]); });
  double norm = std::sqrt(s * g.cell_volume() / static_cast<double>(g.size()));
  if (norm == 0.0) throw std::runtime_error("band_random: degenerate draw");
  const double inv = 1.0 / norm;
  for (auto& c : coeffs) c *= inv;
  return field_from_spectrum(g, coeffs);
}

// Spatially localized variant for the torus-emulation runs: a band_random draw
// is tapered by a gaussian envelope of the given width about the box center,
// projected back onto the support set exactly, and renormalized. The result has
// unit L^2, exact frequency support, and effective spatial width
// ~max(width, 1/spec-width), so free evolution stays wrap-around-safe for the
// transit window chosen by the scans.
inline Field localized_band_random(const Grid& g, const SupportSpec& spec, uint64_t seed,
                                   double width) {
  if (!(width > 0.0) || width > g.L)
    throw std::invalid_argument("localized_band_random: bad envelope width");
  Field f = band_random(g, spec, seed);
  std::array<double, 3> c{0.5 * g.L, g.n >= 2 ? 0.5 * g.L : 0.0, g.n >= 3 ? 0.5 * g.L : 0.0};
  for_each_point(g, [&](int64_t idx, const std::array<double, 3>& x) {
    double r2 = 0.0;
    for (int a = 0; a < g.n; ++a) {
      double d = x[size_t(a)] - c[size_t(a)];
      r2 += d * d;
    }
    f.values[static_cast<size_t>(idx)] *= std::exp(-r2 / (2.0 * width * width));
  });
  auto F = spectrum_of(f);
  for_each_mode(g, [&](int64_t idx, const std::array<double, 3>& xi) {
    if (!spec.contains(xi, g.n)) F[static_cast<size_t>(idx)] = cplx{0.0, 0.0};
  });
  Field out = field_from_spectrum(g, F);
  double nn = l2_norm(out);
  if (nn == 0.0) throw std::runtime_error("localized_band_random: projection annihilated the draw");
  const double inv = 1.0 / nn;
  for (auto& v : out.values) v *= inv;
  return out;
}

}  // namespace dlab
