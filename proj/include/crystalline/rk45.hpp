#pragma once

// Adaptive explicit Runge-Kutta integration with the Dormand-Prince 5(4)
// embedded pair (Hairer, Norsett & Wanner, Solving ODEs I, Sec. II.5).
// Step size control is the PI controller of DOPRI5.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "crystalline/error.hpp"

namespace crystalline {

struct IntegratorSettings {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  /// 0 selects the starting step automatically.
  double initial_step = 0.0;
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 200'000'000;
};

struct IntegrationStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
};

namespace detail {

struct DormandPrince45 {
  static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
  static constexpr double a21 = 1.0 / 5.0;
  static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                          a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
  static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                          a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
  static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                          a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
  // Difference between the 5th order solution and the embedded 4th order one.
  static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                          e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
};

inline double error_scale(const IntegratorSettings& s, double a, double b) {
  return s.abs_tol + s.rel_tol * std::max(std::abs(a), std::abs(b));
}

}  // namespace detail

/// Integrates y' = rhs(t, y) from t0 through every time in `stop_times`
/// (ascending, all > t0). Each stop time is landed on exactly. The observer
/// is called after every accepted step as observer(t, y, at_stop_time); it may
/// throw to abort the run. On return `y` holds the state at the last stop.
///
/// rhs must be callable as rhs(double t, std::span<const double> y, std::span<double> dydt).
template <class Rhs, class Observer>
IntegrationStats integrate_adaptive(Rhs&& rhs, std::vector<double>& y, double t0,
                                    std::span<const double> stop_times,
                                    const IntegratorSettings& settings, Observer&& observer) {
  using Tab = detail::DormandPrince45;
  IntegrationStats stats;
  if (stop_times.empty()) return stats;
  if (!(settings.abs_tol > 0.0) || !(settings.rel_tol >= 0.0)) {
    throw ValidationError("integrator tolerances must be positive");
  }
  for (std::size_t k = 0; k < stop_times.size(); ++k) {
    const double prev = k == 0 ? t0 : stop_times[k - 1];
    if (!(stop_times[k] > prev)) throw ValidationError("stop times must be strictly increasing past t0");
  }

  const std::size_t n = y.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n);
  auto eval = [&](double t, const std::vector<double>& state, std::vector<double>& out) {
    rhs(t, std::span<const double>(state), std::span<double>(out));
    ++stats.rhs_evaluations;
  };

  double t = t0;
  eval(t, y, k1);

  // Starting step (Hairer's HINIT).
  double h = settings.initial_step;
  if (!(h > 0.0)) {
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sk = detail::error_scale(settings, y[i], y[i]);
      dnf += (k1[i] / sk) * (k1[i] / sk);
      dny += (y[i] / sk) * (y[i] / sk);
    }
    h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min(h, settings.max_step);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * k1[i];
    eval(t + h, ytmp, k2);
    double der2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sk = detail::error_scale(settings, y[i], y[i]);
      const double d = (k2[i] - k1[i]) / sk;
      der2 += d * d;
    }
    der2 = std::sqrt(der2 / static_cast<double>(std::max<std::size_t>(n, 1))) / h;
    const double der12 = std::max(std::abs(der2), std::sqrt(dnf / static_cast<double>(std::max<std::size_t>(n, 1))));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
    h = std::min({100.0 * h, h1, settings.max_step});
  }

  constexpr double safe = 0.9, fac_min = 0.2, fac_max = 10.0, beta = 0.04;
  const double expo1 = 0.2 - beta * 0.75;
  double fac_old = 1e-4;
  bool last_rejected = false;
  std::size_t next_stop = 0;

  while (next_stop < stop_times.size()) {
    if (stats.accepted + stats.rejected >= settings.max_steps) {
      throw StepUnderflow("maximum number of integration steps reached at t = " + std::to_string(t), t, y);
    }
    if (h < 10.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1e-300) ||
        !std::isfinite(h)) {
      throw StepUnderflow("step size underflow at t = " + std::to_string(t), t, y);
    }
    const double target = stop_times[next_stop];
    const double h_proposed = h;
    bool lands = false;
    if (t + h >= target - 1e-14 * std::max(1.0, std::abs(target))) {
      h = target - t;
      lands = true;
    }

    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * Tab::a21 * k1[i];
    eval(t + Tab::c2 * h, ytmp, k2);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (Tab::a31 * k1[i] + Tab::a32 * k2[i]);
    eval(t + Tab::c3 * h, ytmp, k3);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (Tab::a41 * k1[i] + Tab::a42 * k2[i] + Tab::a43 * k3[i]);
    eval(t + Tab::c4 * h, ytmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (Tab::a51 * k1[i] + Tab::a52 * k2[i] + Tab::a53 * k3[i] + Tab::a54 * k4[i]);
    eval(t + Tab::c5 * h, ytmp, k5);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (Tab::a61 * k1[i] + Tab::a62 * k2[i] + Tab::a63 * k3[i] +
                            Tab::a64 * k4[i] + Tab::a65 * k5[i]);
    eval(t + h, ytmp, k6);
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + h * (Tab::a71 * k1[i] + Tab::a73 * k3[i] + Tab::a74 * k4[i] +
                            Tab::a75 * k5[i] + Tab::a76 * k6[i]);
    const double t_new = lands ? target : t + h;
    eval(t_new, ynew, k7);

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = h * (Tab::e1 * k1[i] + Tab::e3 * k3[i] + Tab::e4 * k4[i] + Tab::e5 * k5[i] +
                            Tab::e6 * k6[i] + Tab::e7 * k7[i]);
      const double r = e / detail::error_scale(settings, y[i], ynew[i]);
      err += r * r;
    }
    err = std::sqrt(err / static_cast<double>(std::max<std::size_t>(n, 1)));

    if (!std::isfinite(err)) {
      ++stats.rejected;
      last_rejected = true;
      h *= fac_min;
      continue;
    }

    const double fac11 = std::pow(err, expo1);
    if (err <= 1.0) {
      double fac = fac11 / std::pow(fac_old, beta);
      fac = std::clamp(fac / safe, 1.0 / fac_max, 1.0 / fac_min);
      double h_new = h / fac;
      fac_old = std::max(err, 1e-4);
      ++stats.accepted;
      y.swap(ynew);
      k1.swap(k7);
      t = t_new;
      if (last_rejected) h_new = std::min(h_new, h);
      last_rejected = false;
      observer(t, std::span<const double>(y), lands);
      if (lands) {
        ++next_stop;
        // A step shortened to land on a stop time says nothing about the
        // admissible size.
        h_new = std::max(h_new, h_proposed);
      }
      h = std::min(h_new, settings.max_step);
    } else {
      h /= std::min(1.0 / fac_min, fac11 / safe);
      ++stats.rejected;
      last_rejected = true;
    }
  }
  return stats;
}

/// Overload without an observer.
template <class Rhs>
IntegrationStats integrate_adaptive(Rhs&& rhs, std::vector<double>& y, double t0,
                                    std::span<const double> stop_times,
                                    const IntegratorSettings& settings) {
  return integrate_adaptive(std::forward<Rhs>(rhs), y, t0, stop_times, settings,
                            [](double, std::span<const double>, bool) {});
}

}  // namespace crystalline
