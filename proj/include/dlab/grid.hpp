#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "dlab/fft.hpp"

namespace dlab {

// Periodic lattice on [0,L)^n with M points per axis. Frequencies live on
// (2pi/L) * {-M/2, ..., M/2-1}^n; values are stored row-major in axis order.
struct Grid {
  int n = 1;
  double L = 2.0 * std::numbers::pi;
  int M = 16;

  static Grid make(int n, double L, int M) {
    if (n < 1 || n > 3) throw std::invalid_argument("Grid: dimension must be 1, 2 or 3");
    if (!(L > 0.0)) throw std::invalid_argument("Grid: box side must be positive");
    if (M < 2 || (M & (M - 1)) != 0) throw std::invalid_argument("Grid: M must be a power of two");
    return Grid{n, L, M};
  }

  int64_t size() const {
    int64_t s = 1;
    for (int i = 0; i < n; ++i) s *= M;
    return s;
  }

  double spacing() const { return L / M; }
  double cell_volume() const { return std::pow(spacing(), n); }
  double freq_step() const { return 2.0 * std::numbers::pi / L; }

  int mode_of_index(int i) const { return i < M / 2 ? i : i - M; }
  double freq_of_index(int i) const { return freq_step() * mode_of_index(i); }

  // largest per-axis |xi| on the lattice
  double max_axis_freq() const { return freq_step() * (M / 2 - 1); }
  // band inside which frequency-supported constructions are accepted
  double resolvable_radius() const { return 0.9 * std::numbers::pi * M / L; }

  bool operator==(const Grid& o) const { return n == o.n && L == o.L && M == o.M; }
  bool operator!=(const Grid& o) const { return !(*this == o); }
};

struct Field {
  Grid grid;
  std::vector<cplx> values;

  static Field zeros(const Grid& g) {
    return Field{g, std::vector<cplx>(static_cast<size_t>(g.size()), cplx{0.0, 0.0})};
  }

  void validate() const {
    if (static_cast<int64_t>(values.size()) != grid.size())
      throw std::invalid_argument("Field: value count does not match grid");
  }
};

// f(idx, xi) over the frequency lattice; xi padded with zeros above n.
template <class F>
void for_each_mode(const Grid& g, F&& f) {
  const int M = g.M;
  std::vector<double> fr(static_cast<size_t>(M));
  for (int i = 0; i < M; ++i) fr[static_cast<size_t>(i)] = g.freq_of_index(i);
  std::array<double, 3> xi{0.0, 0.0, 0.0};
  int64_t idx = 0;
  const int e0 = g.n >= 1 ? M : 1, e1 = g.n >= 2 ? M : 1, e2 = g.n >= 3 ? M : 1;
  for (int i0 = 0; i0 < e0; ++i0) {
    xi[0] = fr[static_cast<size_t>(i0)];
    for (int i1 = 0; i1 < e1; ++i1) {
      if (g.n >= 2) xi[1] = fr[static_cast<size_t>(i1)];
      for (int i2 = 0; i2 < e2; ++i2) {
        if (g.n >= 3) xi[2] = fr[static_cast<size_t>(i2)];
        f(idx++, xi);
      }
    }
  }
}

// f(idx, x) over the spatial lattice, x in [0,L)^n.
template <class F>
void for_each_point(const Grid& g, F&& f) {
  const int M = g.M;
  const double h = g.spacing();
  std::array<double, 3> x{0.0, 0.0, 0.0};
  int64_t idx = 0;
  const int e0 = g.n >= 1 ? M : 1, e1 = g.n >= 2 ? M : 1, e2 = g.n >= 3 ? M : 1;
  for (int i0 = 0; i0 < e0; ++i0) {
    x[0] = h * i0;
    for (int i1 = 0; i1 < e1; ++i1) {
      if (g.n >= 2) x[1] = h * i1;
      for (int i2 = 0; i2 < e2; ++i2) {
        if (g.n >= 3) x[2] = h * i2;
        f(idx++, x);
      }
    }
  }
}

// Packs the signed integer mode tuple of a lattice index into 63 bits; used to
// key per-mode random draws so they survive grid refinement and box rescaling.
inline uint64_t mode_pack(const Grid& g, int64_t idx) {
  int64_t rem = idx;
  int m[3] = {0, 0, 0};
  for (int a = g.n - 1; a >= 0; --a) {
    m[a] = g.mode_of_index(static_cast<int>(rem % g.M));
    rem /= g.M;
  }
  uint64_t key = 0;
  for (int a = 0; a < 3; ++a)
    key |= (static_cast<uint64_t>(m[a] + (1 << 20)) & 0x1FFFFFULL) << (21 * a);
  return key;
}

// discrete L^2 norm, Riemann weight (L/M)^n
inline double l2_norm_sq(const Field& f) {
  const auto& v = f.values;
  double s = pairwise_sum(v.size(), [&](size_t i) { return std::norm(v[i]); });
  return s * f.grid.cell_volume();
}

inline double l2_norm(const Field& f) { return std::sqrt(l2_norm_sq(f)); }

inline Field operator+(const Field& a, const Field& b) {
  if (a.grid != b.grid) throw std::invalid_argument("Field+: grid mismatch");
  Field out = a;
  for (size_t i = 0; i < out.values.size(); ++i) out.values[i] += b.values[i];
  return out;
}

inline Field operator-(const Field& a, const Field& b) {
  if (a.grid != b.grid) throw std::invalid_argument("Field-: grid mismatch");
  Field out = a;
  for (size_t i = 0; i < out.values.size(); ++i) out.values[i] -= b.values[i];
  return out;
}

inline Field operator*(cplx c, const Field& a) {
  Field out = a;
  for (auto& v : out.values) v *= c;
  return out;
}

inline Field conj(const Field& a) {
  Field out = a;
  for (auto& v : out.values) v = std::conj(v);
  return out;
}

// Uniformly sampled trajectory of one Field per time.
struct SpacetimeField {
  Grid grid;
  std::vector<double> times;
  std::vector<Field> frames;

  void validate() const {
    if (times.size() != frames.size())
      throw std::invalid_argument("SpacetimeField: times/frames mismatch");
    if (times.empty()) throw std::invalid_argument("SpacetimeField: empty");
    for (const auto& fr : frames)
      if (fr.grid != grid) throw std::invalid_argument("SpacetimeField: frame grid mismatch");
    if (times.size() >= 2) {
      double dt = times[1] - times[0];
      if (!(dt > 0.0)) throw std::invalid_argument("SpacetimeField: times not increasing");
      for (size_t k = 1; k < times.size(); ++k) {
        double step = times[k] - times[k - 1];
        if (std::abs(step - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
          throw std::invalid_argument("SpacetimeField: non-uniform time samples");
      }
    }
  }

  double dt() const { return times.size() >= 2 ? times[1] - times[0] : 0.0; }
};

inline std::vector<double> uniform_times(double T, int steps) {
  if (steps < 0 || !(T >= 0.0)) throw std::invalid_argument("uniform_times: bad arguments");
  std::vector<double> ts(static_cast<size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) ts[static_cast<size_t>(k)] = T * k / std::max(steps, 1);
  return ts;
}

// Torus-emulation bound: the box must hold the initial support plus the maximal
// group displacement 2*xi_max*T on both sides before wrap-around pollutes a run.
inline double torus_min_box(double support_width, double xi_max, double T) {
  return 2.0 * (support_width + 2.0 * xi_max * std::abs(T));
}

inline bool torus_emulation_ok(const Grid& g, double support_width, double xi_max, double T) {
  return g.L >= torus_min_box(support_width, xi_max, T);
}

// ---- binary container ---------------------------------------------------
// header: magic "DLAB", version u32, n u32, L f64, M u32; then M^n complex
// doubles in row-major axis order, little-endian.

inline void save_field(const Field& f, std::ostream& os) {
  static_assert(std::endian::native == std::endian::little, "little-endian host required");
  f.validate();
  os.write("DLAB", 4);
  uint32_t version = 1, n = static_cast<uint32_t>(f.grid.n), M = static_cast<uint32_t>(f.grid.M);
  double L = f.grid.L;
  os.write(reinterpret_cast<const char*>(&version), 4);
  os.write(reinterpret_cast<const char*>(&n), 4);
  os.write(reinterpret_cast<const char*>(&L), 8);
  os.write(reinterpret_cast<const char*>(&M), 4);
  os.write(reinterpret_cast<const char*>(f.values.data()),
           static_cast<std::streamsize>(f.values.size() * sizeof(cplx)));
  if (!os) throw std::runtime_error("save_field: write failed");
}

inline void save_field(const Field& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_field: cannot open " + path);
  save_field(f, os);
}

inline Field load_field(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "DLAB", 4) != 0)
    throw std::runtime_error("load_field: bad magic");
  uint32_t version = 0, n = 0, M = 0;
  double L = 0.0;
  is.read(reinterpret_cast<char*>(&version), 4);
  is.read(reinterpret_cast<char*>(&n), 4);
  is.read(reinterpret_cast<char*>(&L), 8);
  is.read(reinterpret_cast<char*>(&M), 4);
  if (!is || version != 1) throw std::runtime_error("load_field: bad header");
  Grid g = Grid::make(static_cast<int>(n), L, static_cast<int>(M));
  Field f = Field::zeros(g);
  is.read(reinterpret_cast<char*>(f.values.data()),
          static_cast<std::streamsize>(f.values.size() * sizeof(cplx)));
  if (!is) throw std::runtime_error("load_field: truncated payload");
  return f;
}

inline Field load_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_field: cannot open " + path);
  return load_field(is);
}

}  // namespace dlab
