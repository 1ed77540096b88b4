#pragma once

// Motion of an N-sided polygon with fixed normal directions by crystalline
// weighted curvature. Side i has exterior normal e_i = (cos i dtheta,
// sin i dtheta) and lies on the line x . e_i = d_i; the support distances d
// are the canonical state and every other quantity derives from them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "crystalline/anisotropy.hpp"
#include "crystalline/error.hpp"
#include "crystalline/periodic.hpp"
#include "crystalline/rk45.hpp"
#include "crystalline/vec2.hpp"

namespace crystalline {

/// L_i = (d_{i+1} + d_{i-1}) csc dtheta - 2 d_i cot dtheta.
inline std::vector<double> side_lengths_from_support(std::span<const double> d, double dtheta) {
  const std::size_t n = d.size();
  const double csc = 1.0 / std::sin(dtheta);
  const double cot = std::cos(dtheta) / std::sin(dtheta);
  std::vector<double> lengths(n);
  for (std::size_t i = 0; i < n; ++i) {
    lengths[i] = (d[next_index(i, n)] + d[prev_index(i, n)]) * csc - 2.0 * d[i] * cot;
  }
  return lengths;
}

/// kappa_i = 2 tan(dtheta / 2) / L_i.
inline std::vector<double> curvatures_from_lengths(std::span<const double> lengths, double dtheta) {
  const double factor = 2.0 * std::tan(0.5 * dtheta);
  std::vector<double> kappa(lengths.size());
  std::transform(lengths.begin(), lengths.end(), kappa.begin(), [&](double l) { return factor / l; });
  return kappa;
}

class PolygonState {
 public:
  /// Throws ValidationError on a size mismatch, non-finite data, or a side
  /// of nonpositive length.
  PolygonState(std::shared_ptr<const DiscreteAnisotropy> aniso, std::vector<double> d, double time = 0.0)
      : aniso_(std::move(aniso)), d_(std::move(d)), time_(time) {
    if (!aniso_) throw ValidationError("polygon state needs a discrete anisotropy");
    if (d_.size() != aniso_->n_sides()) {
      throw ValidationError("support vector has " + std::to_string(d_.size()) + " entries, expected " +
                            std::to_string(aniso_->n_sides()));
    }
    if (!(time_ >= 0.0)) throw ValidationError("polygon time must be nonnegative");
    for (double v : d_) {
      if (!std::isfinite(v)) throw ValidationError("support distances must be finite");
    }
    const auto lengths = side_lengths_from_support(d_, aniso_->dtheta());
    for (std::size_t i = 0; i < lengths.size(); ++i) {
      if (!(lengths[i] > 0.0)) {
        throw DegenerateInitialization("side " + std::to_string(i) + " has nonpositive length " +
                                       std::to_string(lengths[i]));
      }
    }
  }

  double time() const noexcept { return time_; }
  std::span<const double> support() const& noexcept { return d_; }
  std::span<const double> support() const&& = delete;
  double support(std::size_t i) const noexcept { return d_[i]; }
  std::size_t size() const noexcept { return d_.size(); }
  double dtheta() const noexcept { return aniso_->dtheta(); }
  const DiscreteAnisotropy& aniso() const noexcept { return *aniso_; }
  const std::shared_ptr<const DiscreteAnisotropy>& aniso_ptr() const noexcept { return aniso_; }

 private:
  std::shared_ptr<const DiscreteAnisotropy> aniso_;
  std::vector<double> d_;
  double time_;
};

/// Side lengths; any L_i <= vanish_tolerance raises SideVanished.
inline std::vector<double> side_lengths(const PolygonState& state, double vanish_tolerance = 0.0) {
  auto lengths = side_lengths_from_support(state.support(), state.dtheta());
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (!(lengths[i] > vanish_tolerance)) {
      throw SideVanished(i, state.time(), lengths[i],
                         std::vector<double>(state.support().begin(), state.support().end()));
    }
  }
  return lengths;
}

inline std::vector<double> curvatures(const PolygonState& state) {
  return curvatures_from_lengths(side_lengths(state), state.dtheta());
}

/// omega_i = g_i kappa_i.
inline std::vector<double> weighted_curvatures(const PolygonState& state) {
  auto omega = curvatures(state);
  const auto g = state.aniso().g();
  for (std::size_t i = 0; i < omega.size(); ++i) omega[i] *= g[i];
  return omega;
}

/// Right-hand side of the closed system for the weighted curvatures,
/// omega_i' = h_i [omega_i^2 (omega_{i+1} - 2 omega_i + omega_{i-1}) / (2(1 - cos dtheta)) + omega_i^3].
inline void omega_ode_rhs(std::span<const double> omega, const DiscreteAnisotropy& aniso, std::span<double> out) {
  const std::size_t n = omega.size();
  const double inv_denom = 1.0 / aniso.two_one_minus_cos();
  const auto h = aniso.h();
  for (std::size_t i = 0; i < n; ++i) {
    const double w = omega[i];
    out[i] = h[i] * (w * w * second_difference(omega, i) * inv_denom + w * w * w);
  }
}

inline std::vector<double> omega_ode_rhs(std::span<const double> omega, const DiscreteAnisotropy& aniso) {
  std::vector<double> out(omega.size());
  omega_ode_rhs(omega, aniso, out);
  return out;
}

/// d_i' = -omega_i: each side line moves inward at its weighted curvature.
inline std::vector<double> support_ode_rhs(const PolygonState& state) {
  auto rate = weighted_curvatures(state);
  for (double& r : rate) r = -r;
  return rate;
}

/// L_i' = 2 cot(dtheta) omega_i - csc(dtheta) (omega_{i+1} + omega_{i-1}).
inline std::vector<double> side_length_rate(const PolygonState& state) {
  const auto omega = weighted_curvatures(state);
  const std::size_t n = omega.size();
  const double dtheta = state.dtheta();
  const double csc = 1.0 / std::sin(dtheta);
  const double cot = std::cos(dtheta) / std::sin(dtheta);
  std::vector<double> rate(n);
  for (std::size_t i = 0; i < n; ++i) {
    rate[i] = 2.0 * cot * omega[i] - csc * (omega[next_index(i, n)] + omega[prev_index(i, n)]);
  }
  return rate;
}

/// Total length rate as the single sum 2 (cot - csc) sum omega_i.
inline double total_length_rate(const PolygonState& state) {
  const auto omega = weighted_curvatures(state);
  const double dtheta = state.dtheta();
  const double coeff = 2.0 * (std::cos(dtheta) - 1.0) / std::sin(dtheta);
  double sum = 0.0;
  for (double w : omega) sum += w;
  return coeff * sum;
}

/// A = 1/2 sum d_i L_i, valid with the origin inside the polygon.
inline double enclosed_area(const PolygonState& state) {
  const auto d = state.support();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(d[i] > 0.0)) throw OriginOutside(i, state.time());
  }
  const auto lengths = side_lengths(state);
  double area = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) area += d[i] * lengths[i];
  return 0.5 * area;
}

/// The state-independent area rate -sum g_i 2 tan(dtheta / 2).
inline double area_rate(const DiscreteAnisotropy& aniso) {
  double sum = 0.0;
  for (double g : aniso.g()) sum += g;
  return -sum * aniso.side_curvature_factor();
}

/// Time at which the polygon's area reaches zero; no side vanishes earlier.
inline double extinction_time(const PolygonState& state0) {
  return enclosed_area(state0) / -area_rate(state0.aniso());
}

/// Gage-Hamilton median weighted curvature: the maximum over j of the
/// minimum of omega over the next floor(N/2) (N even) or (N-1)/2 (N odd) sides.
inline double median_weighted_curvature(std::span<const double> omega) {
  const std::size_t n = omega.size();
  if (n < 4) throw ValidationError("median weighted curvature requires N >= 4");
  const std::size_t window = n % 2 == 0 ? n / 2 : (n - 1) / 2;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= window; ++k) lo = std::min(lo, omega[(j + k) % n]);
    best = std::max(best, lo);
  }
  return best;
}

inline Vec2 interior_normal(std::size_t i, double dtheta) {
  const double a = static_cast<double>(i) * dtheta;
  return {-std::cos(a), -std::sin(a)};
}

inline Vec2 tangent(std::size_t i, double dtheta) {
  const double a = static_cast<double>(i) * dtheta;
  return {-std::sin(a), std::cos(a)};
}

/// Velocity of the midpoint of side i:
/// omega_i N_i - (omega_{i+1} - omega_{i-1}) / (2 sin dtheta) T_i.
inline Vec2 midpoint_velocity(const PolygonState& state, std::size_t i) {
  const auto omega = weighted_curvatures(state);
  const std::size_t n = omega.size();
  if (i >= n) throw ValidationError("side index out of range");
  const double dtheta = state.dtheta();
  const double tangential = (omega[next_index(i, n)] - omega[prev_index(i, n)]) / (2.0 * std::sin(dtheta));
  return omega[i] * interior_normal(i, dtheta) - tangential * tangent(i, dtheta);
}

/// sum_i [omega_i^2 - (omega_{i+1} - omega_i)^2 / (2(1 - cos dtheta))] dtheta.
/// Nondecreasing along the flow.
inline double h1_functional(std::span<const double> omega, double dtheta) {
  const std::size_t n = omega.size();
  const double s = std::sin(0.5 * dtheta);
  const double denom = 4.0 * s * s;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = omega[next_index(i, n)] - omega[i];
    sum += omega[i] * omega[i] - diff * diff / denom;
  }
  return sum * dtheta;
}

struct PolygonMonitor {
  double time = 0.0;
  double total_length = 0.0;
  double area = 0.0;
  double omega_min = 0.0;
  double omega_max = 0.0;
  double omega_median = 0.0;
  double h1 = 0.0;
};

inline PolygonMonitor monitor(const PolygonState& state) {
  PolygonMonitor m;
  m.time = state.time();
  const auto lengths = side_lengths(state);
  const auto omega = weighted_curvatures(state);
  for (double l : lengths) m.total_length += l;
  m.area = enclosed_area(state);
  const auto [lo, hi] = std::minmax_element(omega.begin(), omega.end());
  m.omega_min = *lo;
  m.omega_max = *hi;
  m.omega_median = median_weighted_curvature(omega);
  m.h1 = h1_functional(omega, state.dtheta());
  return m;
}

struct PolygonTrajectory {
  std::vector<PolygonState> states;
  std::vector<PolygonMonitor> monitors;
  IntegrationStats stats;

  const PolygonState& final_state() const { return states.back(); }

  /// The recorded state at exactly time t, or nullptr.
  const PolygonState* at_time(double t) const {
    auto it = std::lower_bound(states.begin(), states.end(), t,
                               [](const PolygonState& s, double v) { return s.time() < v; });
    if (it == states.end() || it->time() != t) return nullptr;
    return &*it;
  }
};

struct FlowSettings {
  IntegratorSettings integrator;
  /// Termination threshold on L_i, relative to the initial minimum side length.
  double vanish_fraction = 1e-9;
  /// Relative distance to the extinction time that evolve refuses to enter.
  double extinction_margin = 1e-3;
  /// Record every accepted step; otherwise only the sample times and t_end.
  bool record_every_step = true;
};

namespace detail {

inline std::vector<double> merged_stop_times(std::span<const double> sample_times, double t0, double t_end) {
  std::vector<double> stops;
  for (double t : sample_times) {
    if (t > t0 && t < t_end) stops.push_back(t);
  }
  stops.push_back(t_end);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
  return stops;
}

}  // namespace detail

/// Integrates d_i' = -omega_i(d) from state0 to t_end, landing exactly on
/// every entry of sample_times inside (t0, t_end]. Throws SideVanished if a
/// side shrinks below the vanish threshold and StepUnderflow if the step
/// size collapses.
inline PolygonTrajectory evolve(const PolygonState& state0, double t_end, const FlowSettings& settings = {},
                                std::span<const double> sample_times = {}) {
  const double t0 = state0.time();
  if (!(t_end > t0)) throw ValidationError("t_end must exceed the initial time");
  const double t_ext = t0 + extinction_time(state0);
  if (!(t_end < t_ext - settings.extinction_margin * (t_ext - t0))) {
    throw ValidationError("t_end = " + std::to_string(t_end) + " is too close to the extinction time " +
                          std::to_string(t_ext));
  }

  const auto aniso = state0.aniso_ptr();
  const std::size_t n = state0.size();
  const double dtheta = state0.dtheta();
  const double csc = 1.0 / std::sin(dtheta);
  const double cot = std::cos(dtheta) / std::sin(dtheta);
  std::vector<double> numerators(n);
  for (std::size_t i = 0; i < n; ++i) numerators[i] = aniso->g()[i] * aniso->side_curvature_factor();

  const auto initial_lengths = side_lengths(state0);
  const double vanish_tol =
      settings.vanish_fraction * *std::min_element(initial_lengths.begin(), initial_lengths.end());

  auto rhs = [&](double, std::span<const double> d, std::span<double> out) {
    for (std::size_t i = 0; i < n; ++i) {
      const double length = (d[next_index(i, n)] + d[prev_index(i, n)]) * csc - 2.0 * d[i] * cot;
      out[i] = -numerators[i] / length;
    }
  };

  PolygonTrajectory traj;
  traj.states.push_back(state0);
  traj.monitors.push_back(monitor(state0));

  const auto stops = detail::merged_stop_times(sample_times, t0, t_end);
  std::vector<double> y(state0.support().begin(), state0.support().end());
  auto observer = [&](double t, std::span<const double> d, bool at_stop) {
    const auto lengths = side_lengths_from_support(d, dtheta);
    for (std::size_t i = 0; i < n; ++i) {
      if (!(lengths[i] > vanish_tol)) {
        const auto& last = traj.states.back().support();
        throw SideVanished(i, t, lengths[i], std::vector<double>(last.begin(), last.end()));
      }
    }
    if (!settings.record_every_step && !at_stop) return;
    traj.states.emplace_back(aniso, std::vector<double>(d.begin(), d.end()), t);
    traj.monitors.push_back(monitor(traj.states.back()));
  };
  traj.stats = integrate_adaptive(rhs, y, t0, stops, settings.integrator, observer);
  return traj;
}

/// Worst violations of the flow's conservation and monotonicity laws along a
/// trajectory. Slacks are per accepted step; positive means violated.
struct TrajectoryInvariants {
  /// max_k |A(t_k) - A(0) - A' t_k|
  double area_drift = 0.0;
  /// max_k of (omega_min(t_{k-1}) - omega_min(t_k))
  double omega_min_decrease = -std::numeric_limits<double>::infinity();
  /// max_k of (L(t_k) - L(t_{k-1}))
  double length_increase = -std::numeric_limits<double>::infinity();
  /// max_k of (H1(t_{k-1}) - H1(t_k))
  double h1_decrease = -std::numeric_limits<double>::infinity();
  bool convex = true;
  bool times_increasing = true;

  bool monotone(double slack) const noexcept {
    return omega_min_decrease <= slack && length_increase <= slack && h1_decrease <= slack;
  }
};

inline TrajectoryInvariants check_invariants(const PolygonTrajectory& traj) {
  TrajectoryInvariants inv;
  if (traj.states.empty()) return inv;
  const double rate = area_rate(traj.states.front().aniso());
  const auto& m = traj.monitors;
  const double t0 = m.front().time;
  for (std::size_t k = 0; k < m.size(); ++k) {
    inv.area_drift = std::max(inv.area_drift, std::abs(m[k].area - m.front().area - rate * (m[k].time - t0)));
    if (!(m[k].omega_min > 0.0)) inv.convex = false;
    if (k == 0) continue;
    if (!(m[k].time > m[k - 1].time)) inv.times_increasing = false;
    inv.omega_min_decrease = std::max(inv.omega_min_decrease, m[k - 1].omega_min - m[k].omega_min);
    inv.length_increase = std::max(inv.length_increase, m[k].total_length - m[k - 1].total_length);
    inv.h1_decrease = std::max(inv.h1_decrease, m[k - 1].h1 - m[k].h1);
  }
  return inv;
}

struct OmegaSnapshot {
  double time = 0.0;
  std::vector<double> omega;
};

/// Integrates the closed weighted-curvature system directly, returning the
/// solution at each requested time (ascending, > t0).
inline std::vector<OmegaSnapshot> evolve_weighted_curvatures(std::vector<double> omega0,
                                                             std::shared_ptr<const DiscreteAnisotropy> aniso,
                                                             double t0, std::span<const double> times,
                                                             const IntegratorSettings& settings = {}) {
  if (omega0.size() != aniso->n_sides()) throw ValidationError("omega vector size mismatch");
  std::vector<OmegaSnapshot> out;
  auto rhs = [&](double, std::span<const double> w, std::span<double> dw) { omega_ode_rhs(w, *aniso, dw); };
  auto observer = [&](double t, std::span<const double> w, bool at_stop) {
    if (at_stop) out.push_back({t, std::vector<double>(w.begin(), w.end())});
  };
  integrate_adaptive(rhs, omega0, t0, times, settings, observer);
  return out;
}

}  // namespace crystalline
