#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace crystalline {

/// errors[k] / errors[k + 1] for consecutive refinements; NaN where either
/// value is not strictly positive.
inline std::vector<double> doubling_ratios(std::span<const double> errors) {
  std::vector<double> ratios;
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
    const bool ok = errors[k] > 0.0 && errors[k + 1] > 0.0;
    ratios.push_back(ok ? errors[k] / errors[k + 1] : std::numeric_limits<double>::quiet_NaN());
  }
  return ratios;
}

/// As above, but a ratio is defined only where n_values[k + 1] == 2 n_values[k].
inline std::vector<double> doubling_ratios(std::span<const std::size_t> n_values, std::span<const double> errors) {
  if (n_values.size() != errors.size()) throw std::invalid_argument("doubling_ratios: size mismatch");
  auto ratios = doubling_ratios(errors);
  for (std::size_t k = 0; k < ratios.size(); ++k) {
    if (n_values[k + 1] != 2 * n_values[k]) ratios[k] = std::numeric_limits<double>::quiet_NaN();
  }
  return ratios;
}

/// Least-squares slope of log(errors) against log(steps).
inline double loglog_slope(std::span<const double> steps, std::span<const double> errors) {
  if (steps.size() != errors.size()) throw std::invalid_argument("loglog_slope: size mismatch");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (!(steps[k] > 0.0) || !(errors[k] > 0.0)) continue;
    const double x = std::log(steps[k]);
    const double y = std::log(errors[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double dn = static_cast<double>(n);
  const double denom = dn * sxx - sx * sx;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (dn * sxy - sx * sy) / denom;
}

inline bool all_within(std::span<const double> values, double lo, double hi) {
  if (values.empty()) return false;
  for (double v : values) {
    if (!(v >= lo && v <= hi)) return false;
  }
  return true;
}

}  // namespace crystalline
