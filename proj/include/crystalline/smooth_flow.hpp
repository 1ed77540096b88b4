#pragma once

// Reference solution of the smooth flow V = (f + f'') kappa for a convex
// curve, carried as its support function u(phi, t) on a uniform periodic
// grid. For a convex curve 1 / kappa = u + u_phiphi, so the flow reads
// u_t = -g(phi) / (u + u_phiphi), integrated by the method of lines.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crystalline/anisotropy.hpp"
#include "crystalline/error.hpp"
#include "crystalline/periodic.hpp"
#include "crystalline/rk45.hpp"

namespace crystalline {

class SupportFunctionField {
 public:
  SupportFunctionField(std::vector<double> values, double time = 0.0) : u_(std::move(values)), time_(time) {
    if (u_.size() < 8) throw ValidationError("support field needs at least 8 grid points");
    for (double v : u_) {
      if (!std::isfinite(v)) throw ValidationError("support field values must be finite");
    }
  }

  template <class Fn>
  static SupportFunctionField from_function(std::size_t grid_size, Fn&& support, double time = 0.0) {
    std::vector<double> u(grid_size);
    for (std::size_t j = 0; j < grid_size; ++j) {
      u[j] = support(two_pi * static_cast<double>(j) / static_cast<double>(grid_size));
    }
    return SupportFunctionField(std::move(u), time);
  }

  std::size_t grid_size() const noexcept { return u_.size(); }
  double spacing() const noexcept { return two_pi / static_cast<double>(u_.size()); }
  double angle(std::size_t j) const noexcept { return static_cast<double>(j) * spacing(); }
  double time() const noexcept { return time_; }
  std::span<const double> values() const& noexcept { return u_; }
  std::span<const double> values() const&& = delete;

  /// Support value at an arbitrary angle (periodic cubic interpolation,
  /// exact on grid nodes).
  double support(double phi) const noexcept { return interpolate_periodic(u_, phi); }

 private:
  std::vector<double> u_;
  double time_;
};

inline SupportFunctionField circle_field(std::size_t grid_size, double radius, double cx = 0.0, double cy = 0.0) {
  if (!(radius > 0.0)) throw ValidationError("circle radius must be positive");
  return SupportFunctionField::from_function(
      grid_size, [=](double phi) { return radius + cx * std::cos(phi) + cy * std::sin(phi); });
}

/// Ellipse x^2/a^2 + y^2/b^2 = 1 centred at the origin.
inline SupportFunctionField ellipse_field(std::size_t grid_size, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("ellipse semiaxes must be positive");
  return SupportFunctionField::from_function(grid_size, [=](double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    return std::sqrt(a * a * c * c + b * b * s * s);
  });
}

/// u(phi) = a0 + sum_k (cos_coeffs[k-1] cos k phi + sin_coeffs[k-1] sin k phi).
inline SupportFunctionField series_field(std::size_t grid_size, double a0, std::span<const double> cos_coeffs,
                                         std::span<const double> sin_coeffs) {
  std::vector<double> c(cos_coeffs.begin(), cos_coeffs.end()), s(sin_coeffs.begin(), sin_coeffs.end());
  return SupportFunctionField::from_function(grid_size, [&](double phi) {
    double u = a0;
    for (std::size_t k = 0; k < c.size(); ++k) u += c[k] * std::cos(static_cast<double>(k + 1) * phi);
    for (std::size_t k = 0; k < s.size(); ++k) u += s[k] * std::sin(static_cast<double>(k + 1) * phi);
    return u;
  });
}

/// Radius of curvature u + D^2 u with the 3-point periodic difference.
inline std::vector<double> curvature_radius(const SupportFunctionField& field) {
  const auto u = field.values();
  const double inv_h2 = 1.0 / (field.spacing() * field.spacing());
  std::vector<double> rho(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) rho[j] = u[j] + second_difference(u, j) * inv_h2;
  return rho;
}

/// kappa_j = 1 / (u_j + D^2 u_j); throws ConvexityLost if a radius is <= 0.
inline std::vector<double> curvature_field(const SupportFunctionField& field) {
  auto rho = curvature_radius(field);
  for (std::size_t j = 0; j < rho.size(); ++j) {
    if (!(rho[j] > 0.0)) {
      throw ConvexityLost(j, field.time(), std::vector<double>(field.values().begin(), field.values().end()));
    }
    rho[j] = 1.0 / rho[j];
  }
  return rho;
}

inline std::vector<double> stiffness_samples(const AnisotropyFunction& energy, std::size_t grid_size) {
  std::vector<double> g(grid_size);
  for (std::size_t j = 0; j < grid_size; ++j) {
    g[j] = energy.g(two_pi * static_cast<double>(j) / static_cast<double>(grid_size));
  }
  return g;
}

/// W_j = (f + f'')(phi_j) kappa_j.
inline std::vector<double> weighted_curvature_field(const SupportFunctionField& field,
                                                    const AnisotropyFunction& energy) {
  auto w = curvature_field(field);
  const auto g = stiffness_samples(energy, field.grid_size());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] *= g[j];
  return w;
}

/// Periodic central-difference derivative of grid data over [0, 2pi).
inline std::vector<double> central_derivative(std::span<const double> v) {
  const std::size_t n = v.size();
  const double inv_2h = static_cast<double>(n) / (2.0 * two_pi);
  std::vector<double> d(n);
  for (std::size_t j = 0; j < n; ++j) d[j] = (v[next_index(j, n)] - v[prev_index(j, n)]) * inv_2h;
  return d;
}

/// u_t = -W.
inline std::vector<double> support_pde_rhs(const SupportFunctionField& field, const AnisotropyFunction& energy) {
  auto w = weighted_curvature_field(field, energy);
  for (double& v : w) v = -v;
  return w;
}

/// Area 1/2 sum u_j (u_j + D^2 u_j) dphi of the discrete body. Along the
/// semi-discrete flow it decreases at the constant rate sum g_j dphi.
inline double enclosed_area(const SupportFunctionField& field) {
  const auto u = field.values();
  const auto rho = curvature_radius(field);
  double sum = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) sum += u[j] * rho[j];
  return 0.5 * sum * field.spacing();
}

/// sum_j g(phi_j) dphi, the periodic trapezoid rule for the integral of g.
inline double stiffness_integral(const AnisotropyFunction& energy, std::size_t grid_size) {
  double sum = 0.0;
  for (double g : stiffness_samples(energy, grid_size)) sum += g;
  return sum * two_pi / static_cast<double>(grid_size);
}

/// Time for the smooth curve to shrink to a point: A / integral of g.
inline double smooth_extinction_time(const SupportFunctionField& field, const AnisotropyFunction& energy) {
  return enclosed_area(field) / stiffness_integral(energy, field.grid_size());
}

/// Integrates the support-function flow from field0 and returns field0
/// followed by the solution at each of `times` (ascending, > field0.time()).
/// Throws ConvexityLost if an accepted state has a nonpositive curvature
/// radius, StepUnderflow if the step size collapses.
inline std::vector<SupportFunctionField> evolve_reference(const SupportFunctionField& field0,
                                                          const AnisotropyFunction& energy,
                                                          std::span<const double> times,
                                                          const IntegratorSettings& settings = {}) {
  if (!times.empty()) {
    const double t_ext = field0.time() + smooth_extinction_time(field0, energy);
    if (!(times.back() < t_ext)) {
      throw ValidationError("reference end time " + std::to_string(times.back()) +
                            " is not before the smooth extinction time " + std::to_string(t_ext));
    }
  }
  curvature_field(field0);
  const std::size_t m = field0.grid_size();
  const auto g = stiffness_samples(energy, m);
  const double inv_h2 = 1.0 / (field0.spacing() * field0.spacing());

  auto rhs = [&](double, std::span<const double> u, std::span<double> out) {
    out[0] = -g[0] / (u[0] + (u[1] - 2.0 * u[0] + u[m - 1]) * inv_h2);
    for (std::size_t j = 1; j + 1 < m; ++j) {
      out[j] = -g[j] / (u[j] + (u[j + 1] - 2.0 * u[j] + u[j - 1]) * inv_h2);
    }
    out[m - 1] = -g[m - 1] / (u[m - 1] + (u[0] - 2.0 * u[m - 1] + u[m - 2]) * inv_h2);
  };

  std::vector<SupportFunctionField> out;
  out.push_back(field0);
  std::vector<double> y(field0.values().begin(), field0.values().end());
  std::vector<double> last_valid = y;
  double last_time = field0.time();
  auto observer = [&](double t, std::span<const double> u, bool at_stop) {
    for (std::size_t j = 0; j < m; ++j) {
      const double rho = u[j] + second_difference(u, j) * inv_h2;
      if (!(rho > 0.0)) throw ConvexityLost(j, last_time, last_valid);
    }
    last_valid.assign(u.begin(), u.end());
    last_time = t;
    if (at_stop) out.emplace_back(std::vector<double>(u.begin(), u.end()), t);
  };
  integrate_adaptive(rhs, y, field0.time(), times, settings, observer);
  return out;
}

struct ResidualSample {
  double time = 0.0;
  double max_residual = 0.0;
};

/// Residual of W_t = h (W^2 W_phiphi + W^3) along a sequence of snapshots:
/// W_t by central differences between neighbouring snapshots, W_phiphi by
/// the periodic 3-point difference. Reported at the interior snapshots.
inline std::vector<ResidualSample> weighted_curvature_residual(std::span<const SupportFunctionField> snapshots,
                                                               const AnisotropyFunction& energy) {
  std::vector<ResidualSample> out;
  if (snapshots.size() < 3) return out;
  const std::size_t m = snapshots.front().grid_size();
  const auto g = stiffness_samples(energy, m);
  const double inv_h2 = 1.0 / (snapshots.front().spacing() * snapshots.front().spacing());
  for (std::size_t k = 1; k + 1 < snapshots.size(); ++k) {
    const auto w_prev = weighted_curvature_field(snapshots[k - 1], energy);
    const auto w = weighted_curvature_field(snapshots[k], energy);
    const auto w_next = weighted_curvature_field(snapshots[k + 1], energy);
    const double dt = snapshots[k + 1].time() - snapshots[k - 1].time();
    double worst = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double w_t = (w_next[j] - w_prev[j]) / dt;
      const double w_pp = second_difference(w, j) * inv_h2;
      const double model = (w[j] * w[j] * w_pp + w[j] * w[j] * w[j]) / g[j];
      worst = std::max(worst, std::abs(w_t - model));
    }
    out.push_back({snapshots[k].time(), worst});
  }
  return out;
}

/// Exact isotropic solution from a circle: r(t) = sqrt(r0^2 - 2t).
struct ExactCircleSolution {
  double r0 = 1.0;

  double extinction_time() const noexcept { return 0.5 * r0 * r0; }
  double radius(double t) const {
    if (!(t >= 0.0) || !(t < extinction_time())) {
      throw OutOfDomain("t = " + std::to_string(t) + " is outside [0, " + std::to_string(extinction_time()) + ")");
    }
    return std::sqrt(r0 * r0 - 2.0 * t);
  }
};

inline double exact_circle(double r0, double t) { return ExactCircleSolution{r0}.radius(t); }

}  // namespace crystalline
