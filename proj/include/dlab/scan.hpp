#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "dlab/fit.hpp"

namespace dlab {

struct ScanPoint {
  double param = 0.0;     // abscissa value (N2/N1 ratio, max/min ratio, rho, K, N)
  double value = 0.0;     // statistic used for the fit (geometric mean over trials)
  int n_trials = 1;
  double geo_mean = 0.0;  // same as value; kept as an explicit CSV column
  double stderr_log = 0.0;  // standard error of log(value) over trials
};

// How a fitted slope is compared with the predicted exponent. Decay estimates
// are upper bounds (any epsilon > 0 loss), so observing *more* decay passes;
// the sharpness lower bound is two-sided.
enum class PassRule { one_sided_below, two_sided };

struct ScanReport {
  std::string abscissa;
  std::vector<ScanPoint> points;
  double fitted_slope = std::numeric_limits<double>::quiet_NaN();
  double stderr_slope = std::numeric_limits<double>::quiet_NaN();
  double r_squared = std::numeric_limits<double>::quiet_NaN();
  double predicted = 0.0;
  double tolerance = 0.15;
  PassRule rule = PassRule::one_sided_below;
  bool pass = false;
  bool degenerate = false;       // fit rejected (too few points / nonpositive values)
  bool sup_norm_estimate = false;  // a lattice-max stood in for an L^inf norm
  std::vector<std::string> notes;

  // run the log-log fit over the points and decide pass/fail
  void finalize() {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(points.size());
    for (const auto& p : points) pts.emplace_back(p.param, p.value);
    try {
      FitResult fit = fit_exponent(pts);
      fitted_slope = fit.slope;
      stderr_slope = fit.stderr_slope;
      r_squared = fit.r_squared;
      degenerate = false;
    } catch (const std::exception&) {
      degenerate = true;
      pass = false;
      return;
    }
    if (rule == PassRule::two_sided)
      pass = std::abs(fitted_slope - predicted) <= tolerance;
    else
      pass = fitted_slope <= predicted + tolerance;
  }

  void write_csv(std::ostream& os) const {
    os << "param,value,n_trials,geo_mean,stderr\n";
    char buf[256];
    for (const auto& p : points) {
      std::snprintf(buf, sizeof buf, "%.12g,%.12g,%d,%.12g,%.12g\n", p.param, p.value, p.n_trials,
                    p.geo_mean, p.stderr_log);
      os << buf;
    }
  }

  void write_json(std::ostream& os) const {
    char buf[512];
    auto num = [](double v) -> std::string {
      if (std::isnan(v)) return "null";
      char b[64];
      std::snprintf(b, sizeof b, "%.12g", v);
      return b;
    };
    os << "{\n";
    os << "  \"schema_version\": 1,\n";
    os << "  \"abscissa\": \"" << abscissa << "\",\n";
    std::snprintf(buf, sizeof buf,
                  "  \"fitted_slope\": %s,\n  \"stderr\": %s,\n  \"r_squared\": %s,\n",
                  num(fitted_slope).c_str(), num(stderr_slope).c_str(), num(r_squared).c_str());
    os << buf;
    std::snprintf(buf, sizeof buf, "  \"predicted\": %s,\n  \"tolerance\": %s,\n",
                  num(predicted).c_str(), num(tolerance).c_str());
    os << buf;
    os << "  \"rule\": \"" << (rule == PassRule::two_sided ? "two_sided" : "one_sided_below")
       << "\",\n";
    os << "  \"pass\": " << (pass ? "true" : "false") << ",\n";
    os << "  \"degenerate\": " << (degenerate ? "true" : "false") << ",\n";
    os << "  \"sup_norm_estimate\": " << (sup_norm_estimate ? "true" : "false") << ",\n";
    os << "  \"notes\": [";
    for (size_t i = 0; i < notes.size(); ++i) os << (i ? ", " : "") << "\"" << notes[i] << "\"";
    os << "]\n}\n";
  }
};

// geometric mean and log-space standard error of positive samples
inline std::pair<double, double> geometric_stats(const std::vector<double>& vals) {
  if (vals.empty()) throw std::invalid_argument("geometric_stats: empty");
  double m = 0.0;
  for (double v : vals) {
    if (!(v > 0.0)) throw std::invalid_argument("geometric_stats: nonpositive sample");
    m += std::log(v);
  }
  m /= static_cast<double>(vals.size());
  double var = 0.0;
  for (double v : vals) {
    double d = std::log(v) - m;
    var += d * d;
  }
  double se = vals.size() > 1
                  ? std::sqrt(var / static_cast<double>(vals.size() - 1) /
                              static_cast<double>(vals.size()))
                  : 0.0;
  return {std::exp(m), se};
}

}  // namespace dlab
