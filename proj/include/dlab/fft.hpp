#pragma once

#include <fftw3.h>

#include <array>
#include <complex>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace dlab {

using cplx = std::complex<double>;

namespace detail {

struct PlanKey {
  int rank;
  std::array<int, 3> dims;
  int sign;
  auto operator<=>(const PlanKey&) const = default;
};

// Plans are created with FFTW_UNALIGNED | FFTW_ESTIMATE so a cached plan can be
// re-executed on any array pair via fftw_execute_dft. Plan creation is serialized;
// execution on distinct arrays is thread-safe.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int rank, const int* dims, int sign, cplx* in, cplx* out) {
    PlanKey key{rank, {0, 0, 0}, sign};
    for (int i = 0; i < rank; ++i) key.dims[static_cast<size_t>(i)] = dims[i];
    std::lock_guard<std::mutex> lock(mu_);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    fftw_plan p = fftw_plan_dft(rank, dims, reinterpret_cast<fftw_complex*>(in),
                                reinterpret_cast<fftw_complex*>(out), sign,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!p) throw std::runtime_error("fftw_plan_dft failed");
    plans_.emplace(key, p);
    return p;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [k, p] : plans_) fftw_destroy_plan(p);
  }
  std::mutex mu_;
  std::map<PlanKey, fftw_plan> plans_;
};

}  // namespace detail

// Unnormalized c2c transform, out-of-place. sign = FFTW_FORWARD or FFTW_BACKWARD.
inline void fft_exec(int rank, const int* dims, int sign, const cplx* in, cplx* out) {
  if (in == out) throw std::invalid_argument("fft_exec: in-place not supported");
  fftw_plan p = detail::PlanCache::instance().get(rank, dims, sign, const_cast<cplx*>(in), out);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

inline std::vector<cplx> fft_forward(int rank, const int* dims, const std::vector<cplx>& in) {
  std::vector<cplx> out(in.size());
  fft_exec(rank, dims, FFTW_FORWARD, in.data(), out.data());
  return out;
}

inline std::vector<cplx> fft_backward(int rank, const int* dims, const std::vector<cplx>& in) {
  std::vector<cplx> out(in.size());
  fft_exec(rank, dims, FFTW_BACKWARD, in.data(), out.data());
  return out;
}

// Deterministic pairwise-tree reduction; used for every norm accumulation so
// results do not depend on traversal batching.
template <class F>
double pairwise_sum(size_t lo, size_t hi, F&& term) {
  if (hi - lo <= 64) {
    double s = 0.0;
    for (size_t i = lo; i < hi; ++i) s += term(i);
    return s;
  }
  size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(lo, mid, term) + pairwise_sum(mid, hi, term);
}

template <class F>
double pairwise_sum(size_t count, F&& term) {
  return count == 0 ? 0.0 : pairwise_sum(size_t{0}, count, term);
}

}  // namespace dlab
