#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace dlab {

// Counter-based generator: every draw is a pure function of (seed, counter, stream),
// so generation order and internal parallelism cannot change the output.

inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t keyed_u64(uint64_t seed, uint64_t counter, uint64_t stream = 0) {
  return mix64(mix64(mix64(seed) ^ counter) ^ (stream + 0x632be59bd9b4e019ULL));
}

// uniform in (0,1]
inline double keyed_uniform(uint64_t seed, uint64_t counter, uint64_t stream = 0) {
  return (static_cast<double>(keyed_u64(seed, counter, stream) >> 11) + 1.0) * 0x1.0p-53;
}

// standard complex gaussian: E|z|^2 = 1, real/imag independent N(0, 1/2)
inline std::complex<double> keyed_complex_gaussian(uint64_t seed, uint64_t counter,
                                                   uint64_t stream = 0) {
  double u1 = keyed_uniform(seed, counter, 2 * stream);
  double u2 = keyed_uniform(seed, counter, 2 * stream + 1);
  double rad = std::sqrt(-std::log(u1));
  return std::polar(rad, 2.0 * std::numbers::pi * u2);
}

// uniform phase e^{i theta}, theta in [0, 2pi)
inline std::complex<double> keyed_phase(uint64_t seed, uint64_t counter, uint64_t stream = 0) {
  return std::polar(1.0, 2.0 * std::numbers::pi * keyed_uniform(seed, counter, stream));
}

}  // namespace dlab
