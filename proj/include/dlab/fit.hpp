#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dlab {

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  double r_squared = 1.0;
};

// Ordinary least squares on (log x, log y). Rejects fewer than 3 points and
// nonpositive coordinates.
inline FitResult fit_exponent(std::span<const std::pair<double, double>> points) {
  const size_t n = points.size();
  if (n < 3) throw std::invalid_argument("fit_exponent: need at least 3 points");
  std::vector<double> lx(n), ly(n);
  for (size_t i = 0; i < n; ++i) {
    if (!(points[i].first > 0.0) || !(points[i].second > 0.0))
      throw std::invalid_argument("fit_exponent: nonpositive point");
    lx[i] = std::log(points[i].first);
    ly[i] = std::log(points[i].second);
  }
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_exponent: degenerate abscissa");
  FitResult out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double ssr = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double resid = ly[i] - (out.intercept + out.slope * lx[i]);
    ssr += resid * resid;
  }
  out.r_squared = syy > 1e-30 ? 1.0 - ssr / syy : 1.0;
  out.stderr_slope = n > 2 ? std::sqrt((ssr / static_cast<double>(n - 2)) / sxx) : 0.0;
  return out;
}

inline FitResult fit_exponent(const std::vector<std::pair<double, double>>& points) {
  return fit_exponent(std::span<const std::pair<double, double>>(points));
}

}  // namespace dlab
