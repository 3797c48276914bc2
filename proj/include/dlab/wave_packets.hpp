#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "dlab/grid.hpp"
#include "dlab/littlewood_paley.hpp"
#include "dlab/spectral.hpp"

namespace dlab {

// ---- partition windows ------------------------------------------------
// psi: tensor of 1-d bumps w(u), w = 1 on |u|<=0.3, 0 for |u|>=0.7, with
// sum_k w(u-k) = 1 exactly. The tensor support stays inside B(0,1) for n<=2.
inline double packet_psi1(double u) {
  double a = std::abs(u);
  if (a >= 0.7) return 0.0;
  if (a <= 0.3) return 1.0;
  return 1.0 - smoothstep((a - 0.3) / 0.4);
}

// eta_hat support half-width: the packet frequency footprint is the psi window
// (0.7 lambda^{-1/2}) broadened by this, and must stay inside the
// 2 lambda^{-1/2}-ball (corner norm for n=2). Wider support means faster
// spatial tails, so n=1 takes the larger budget.
inline double packet_eta_hat_width(int n) { return n == 1 ? 1.25 : 0.7; }

// eta_hat: classic C^infty bump e^{1 - w^2/(w^2 - s^2)}, value 1 at 0, support
// |s| < w inside Q(2); Poisson summation then makes the eta cell translates
// resolve unity exactly. Frequency support is enforced exactly; eta itself has
// fast (Gevrey) tails in space.
inline double packet_eta_hat1(double s, double w) {
  double a = std::abs(s);
  if (a >= w) return 0.0;
  return std::exp(1.0 - w * w / (w * w - s * s));
}

// one axis of the periodized window eta((x - .)/sqrt(lambda)) on the lattice;
// band-limited, so the cell partition is exact on grid points
inline std::vector<double> packet_eta_axis(const Grid& g, double lambda) {
  const double sq = std::sqrt(lambda);
  const double w = packet_eta_hat_width(g.n);
  const int M = g.M;
  std::vector<double> out(static_cast<size_t>(M), 0.0);
  // Fourier coefficients (sq/L) * eta_hat(2 pi m sq / L) at |arg| < w
  const int mmax = static_cast<int>(std::floor(w * g.L / (2.0 * std::numbers::pi * sq))) + 1;
  const double h = g.spacing();
  for (int j = 0; j < M; ++j) {
    double x = h * j;
    double acc = 0.0;
    for (int m = -mmax; m <= mmax; ++m) {
      double s = 2.0 * std::numbers::pi * m * sq / g.L;
      double c = packet_eta_hat1(s, w);
      if (c == 0.0) continue;
      acc += c * std::cos(2.0 * std::numbers::pi * m * x / g.L);
    }
    out[static_cast<size_t>(j)] = acc * sq / g.L;
  }
  return out;
}

// ---- tubes ------------------------------------------------------------

// T_{y,v} = {(x,t): |t| <= 4 lambda, |x - (y + 2tv)| <= sqrt(lambda)}
struct Tube {
  std::array<double, 3> y{0, 0, 0};
  std::array<double, 3> v{0, 0, 0};
  double lambda = 0.0;

  double radius() const { return std::sqrt(lambda); }

  // periodic distance from x to the tube core at time t
  double core_distance(const std::array<double, 3>& x, double t, const Grid& g) const {
    double d2 = 0.0;
    for (int a = 0; a < g.n; ++a) {
      double c = y[size_t(a)] + 2.0 * t * v[size_t(a)];
      double d = std::fmod(std::abs(x[size_t(a)] - c), g.L);
      d = std::min(d, g.L - d);
      d2 += d * d;
    }
    return std::sqrt(d2);
  }

  bool contains(const std::array<double, 3>& x, double t, const Grid& g,
                double dilation = 1.0) const {
    if (std::abs(t) > 4.0 * lambda) return false;
    return core_distance(x, t, g) <= dilation * radius();
  }
};

struct Packet {
  Tube tube;
  Field field;    // empty when dropped
  double l2 = 0.0;
  bool retained = false;
};

struct PacketDecomposition {
  double lambda = 0.0;
  Grid grid;
  std::vector<Packet> packets;  // lexicographic in (y, v); dropped ones carry no field
  size_t retained_count = 0;
  size_t dropped_count = 0;
};

// ---- decomposition --------------------------------------------------------

inline void check_packet_grid(const Grid& g, double lambda) {
  if (g.n > 2) throw std::invalid_argument("packet_decompose: n must be 1 or 2");
  if (!(lambda >= 64.0)) throw std::invalid_argument("packet_decompose: lambda must be >= 64");
  const double sq = std::sqrt(lambda);
  double cells = sq / g.spacing();
  if (std::abs(cells - std::round(cells)) > 1e-9)
    throw std::invalid_argument("packet_decompose: sqrt(lambda) is not a multiple of the spacing");
  double ycount = g.L / sq;
  if (std::abs(ycount - std::round(ycount)) > 1e-9 || ycount < 1.0)
    throw std::invalid_argument("packet_decompose: box does not resolve the sqrt(lambda) cells");
}

// e^{itD} f = sum_T e^{itD} f_T for spectrum inside Q(1):
// f_T = eta((x - y)/sqrt(lambda)) F^{-1}[fhat psi(sqrt(lambda)(. - v))]
inline PacketDecomposition packet_decompose(const Field& f, double lambda) {
  const Grid& g = f.grid;
  check_packet_grid(g, lambda);
  auto F = spectrum_of(f);

  // spectrum must sit inside Q(1)
  double maxabs = 0.0;
  for (const auto& z : F) maxabs = std::max(maxabs, std::abs(z));
  bool outside = false;
  for_each_mode(g, [&](int64_t idx, const std::array<double, 3>& xi) {
    for (int a = 0; a < g.n; ++a)
      if (std::abs(xi[size_t(a)]) > 1.0 && std::abs(F[static_cast<size_t>(idx)]) > 1e-12 * maxabs)
        outside = true;
  });
  if (outside)
    throw std::invalid_argument("packet_decompose: spectrum not supported in Q(1)");

  const double sq = std::sqrt(lambda);
  const double fnorm = l2_norm(f);
  const int cells_per = static_cast<int>(std::llround(sq / g.spacing()));
  const int Y = static_cast<int>(std::llround(g.L / sq));
  const int jmax = static_cast<int>(std::floor(2.0 * sq));  // v = j / sqrt(lambda), |v| <= 2

  auto eta_axis = packet_eta_axis(g, lambda);
  auto dims = detail::fft_dims(g);
  const double invMn = 1.0 / static_cast<double>(g.size());

  // per-axis frequency values
  std::vector<double> fr(static_cast<size_t>(g.M));
  for (int i = 0; i < g.M; ++i) fr[static_cast<size_t>(i)] = g.freq_of_index(i);

  PacketDecomposition out{lambda, g, {}, 0, 0};

  std::vector<int> jlist;
  for (int j = -jmax; j <= jmax; ++j) jlist.push_back(j);

  auto v_axis_weights = [&](int j) {
    std::vector<double> w(static_cast<size_t>(g.M));
    double v = j / sq;
    bool any = false;
    for (int i = 0; i < g.M; ++i) {
      w[static_cast<size_t>(i)] = packet_psi1(sq * (fr[static_cast<size_t>(i)] - v));
      if (w[static_cast<size_t>(i)] != 0.0) any = true;
    }
    return std::pair(w, any);
  };

  const int n = g.n;
  std::vector<cplx> Gv(F.size());
  for (int j0 : jlist) {
    auto [w0, any0] = v_axis_weights(j0);
    if (!any0) continue;
    for (int j1 : (n >= 2 ? jlist : std::vector<int>{0})) {
      std::vector<double> w1;
      if (n >= 2) {
        auto [w, any] = v_axis_weights(j1);
        if (!any) continue;
        w1 = std::move(w);
      }
      // windowed spectrum for this velocity cell
      bool nonzero = false;
      int64_t idx = 0;
      for (int i0 = 0; i0 < g.M; ++i0) {
        double a0 = w0[static_cast<size_t>(i0)];
        if (n == 1) {
          Gv[static_cast<size_t>(idx)] = F[static_cast<size_t>(idx)] * a0;
          if (a0 != 0.0 && Gv[static_cast<size_t>(idx)] != cplx{0.0, 0.0}) nonzero = true;
          ++idx;
        } else {
          for (int i1 = 0; i1 < g.M; ++i1, ++idx) {
            double w01 = a0 * w1[static_cast<size_t>(i1)];
            Gv[static_cast<size_t>(idx)] = F[static_cast<size_t>(idx)] * w01;
            if (w01 != 0.0 && Gv[static_cast<size_t>(idx)] != cplx{0.0, 0.0}) nonzero = true;
          }
        }
      }
      if (!nonzero) continue;
      auto gv = fft_backward(g.n, dims.data(), Gv);
      for (auto& z : gv) z *= invMn;

      std::array<double, 3> v{j0 / sq, n >= 2 ? j1 / sq : 0.0, 0.0};
      // spatial cells
      for (int k0 = 0; k0 < Y; ++k0) {
        for (int k1 = 0; k1 < (n >= 2 ? Y : 1); ++k1) {
          Packet pk;
          pk.tube = Tube{{k0 * sq, n >= 2 ? k1 * sq : 0.0, 0.0}, v, lambda};
          const int shift0 = (k0 * cells_per) % g.M;
          const int shift1 = (k1 * cells_per) % g.M;
          double norm_sq = 0.0;
          Field pf = Field::zeros(g);
          int64_t id = 0;
          for (int i0 = 0; i0 < g.M; ++i0) {
            double e0 = eta_axis[static_cast<size_t>((i0 - shift0 + g.M) % g.M)];
            if (n == 1) {
              cplx val = gv[static_cast<size_t>(id)] * e0;
              pf.values[static_cast<size_t>(id)] = val;
              norm_sq += std::norm(val);
              ++id;
            } else {
              for (int i1 = 0; i1 < g.M; ++i1, ++id) {
                double e1 = eta_axis[static_cast<size_t>((i1 - shift1 + g.M) % g.M)];
                cplx val = gv[static_cast<size_t>(id)] * (e0 * e1);
                pf.values[static_cast<size_t>(id)] = val;
                norm_sq += std::norm(val);
              }
            }
          }
          pk.l2 = std::sqrt(norm_sq * g.cell_volume());
          pk.retained = pk.l2 >= 1e-12 * fnorm;
          if (pk.retained) {
            pk.field = std::move(pf);
            ++out.retained_count;
          } else {
            ++out.dropped_count;
          }
          out.packets.push_back(std::move(pk));
        }
      }
    }
  }

  std::sort(out.packets.begin(), out.packets.end(), [](const Packet& a, const Packet& b) {
    auto ka = std::tuple(a.tube.y[0], a.tube.y[1], a.tube.v[0], a.tube.v[1]);
    auto kb = std::tuple(b.tube.y[0], b.tube.y[1], b.tube.v[0], b.tube.v[1]);
    return ka < kb;
  });
  return out;
}

inline Field packet_reconstruct(const PacketDecomposition& d) {
  Field out = Field::zeros(d.grid);
  for (const auto& pk : d.packets) {
    if (!pk.retained) continue;
    for (size_t i = 0; i < out.values.size(); ++i) out.values[i] += pk.field.values[i];
  }
  return out;
}

// Space-time L^2 mass fraction of e^{itD} f_T outside the lambda^delta-dilated
// tube (radius dilated to lambda^{delta + 1/2}), trapezoid in time.
inline double off_tube_mass(const Tube& tube, const Field& packet_field, double delta,
                            const std::vector<double>& times) {
  if (!(delta > 0.0 && delta <= 0.5))
    throw std::invalid_argument("off_tube_mass: delta must be in (0, 1/2]");
  if (times.size() < 2) throw std::invalid_argument("off_tube_mass: need >= 2 times");
  const Grid& g = packet_field.grid;
  const double dilation = std::pow(tube.lambda, delta);
  auto spec = spectrum_of(packet_field);
  auto xisq = xi_sq_table(g);
  auto dims = detail::fft_dims(g);
  const double invMn = 1.0 / static_cast<double>(g.size());
  double total = 0.0, outside = 0.0;
  for (size_t k = 0; k < times.size(); ++k) {
    auto s = spec;
    propagate_spectrum(s, xisq, times[k]);
    auto w = fft_backward(g.n, dims.data(), s);
    double wt = (k == 0 || k + 1 == times.size()) ? 0.5 : 1.0;
    double tot_k = 0.0, out_k = 0.0;
    int64_t idx = 0;
    const double h = g.spacing();
    std::array<double, 3> x{0, 0, 0};
    const int e0 = g.M, e1 = g.n >= 2 ? g.M : 1;
    for (int i0 = 0; i0 < e0; ++i0) {
      x[0] = h * i0;
      for (int i1 = 0; i1 < e1; ++i1, ++idx) {
        if (g.n >= 2) x[1] = h * i1;
        double m = std::norm(w[static_cast<size_t>(idx)] * invMn);
        tot_k += m;
        if (!tube.contains(x, times[k], g, dilation)) out_k += m;
      }
    }
    total += wt * tot_k;
    outside += wt * out_k;
  }
  return total > 0.0 ? outside / total : 0.0;
}

// lattice indicator of the dilated tube, one byte-plane per time sample
inline std::vector<std::vector<uint8_t>> tube_mask(const Tube& tube, double dilation,
                                                   const Grid& g,
                                                   const std::vector<double>& times) {
  if (!(dilation >= 1.0)) throw std::invalid_argument("tube_mask: dilation must be >= 1");
  std::vector<std::vector<uint8_t>> out(times.size());
  for (size_t k = 0; k < times.size(); ++k) {
    out[k].assign(static_cast<size_t>(g.size()), 0);
    for_each_point(g, [&](int64_t idx, const std::array<double, 3>& x) {
      out[k][static_cast<size_t>(idx)] = tube.contains(x, times[k], g, dilation) ? 1 : 0;
    });
  }
  return out;
}

// CSV inventory: {y, v, packet L2 norm, retained flag}
inline void write_packet_inventory(const PacketDecomposition& d, std::ostream& os) {
  os << "y0,y1,v0,v1,l2,retained\n";
  char buf[256];
  for (const auto& pk : d.packets) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%d\n", pk.tube.y[0],
                  pk.tube.y[1], pk.tube.v[0], pk.tube.v[1], pk.l2, pk.retained ? 1 : 0);
    os << buf;
  }
}

}  // namespace dlab
