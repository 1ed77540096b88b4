#pragma once

// Paired polygon / smooth-curve runs, convergence-rate studies and the
// discrete Poincare check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "crystalline/anisotropy.hpp"
#include "crystalline/crystalline_flow.hpp"
#include "crystalline/error.hpp"
#include "crystalline/geometry.hpp"
#include "crystalline/rates.hpp"
#include "crystalline/rk45.hpp"
#include "crystalline/smooth_flow.hpp"

namespace crystalline {

/// Initial smooth convex curve.
struct CurveSpec {
  /// "circle", "ellipse" or "series".
  std::string kind = "circle";
  double r0 = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  double a = 2.0;
  double b = 1.0;
  double a0 = 1.0;
  std::vector<double> cos_coeffs;
  std::vector<double> sin_coeffs;
};

inline SupportFunctionField make_curve(const CurveSpec& spec, std::size_t grid_size) {
  if (spec.kind == "circle") return circle_field(grid_size, spec.r0, spec.cx, spec.cy);
  if (spec.kind == "ellipse") return ellipse_field(grid_size, spec.a, spec.b);
  if (spec.kind == "series") return series_field(grid_size, spec.a0, spec.cos_coeffs, spec.sin_coeffs);
  throw ValidationError("unknown curve '" + spec.kind + "' (expected circle, ellipse or series)");
}

struct RunConfig {
  EnergySpec energy{"cosine", 0.1, 2};
  CurveSpec curve;
  std::vector<std::size_t> n_list{16, 32, 64, 128};
  std::size_t grid = 4096;
  double t_end_fraction = 0.6;
  /// Polygon integration.
  IntegratorSettings integrator;
  /// Reference integration. Curvature is a second difference of the support
  /// field, which amplifies integration error by O(M^2), hence the tighter
  /// default.
  IntegratorSettings reference_integrator{1e-13, 1e-13};
  std::string out = "./results";
  /// Number of sampling intervals over [0, t_end]; samples + 1 instants.
  std::size_t samples = 64;
  std::size_t hausdorff_samples = 8192;
};

/// Throws ValidationError describing the first violated requirement.
inline void validate(const RunConfig& config) {
  if (config.n_list.empty()) throw ValidationError("n_list is empty");
  if (!std::is_sorted(config.n_list.begin(), config.n_list.end()) ||
      std::adjacent_find(config.n_list.begin(), config.n_list.end()) != config.n_list.end()) {
    throw ValidationError("n_list must be strictly increasing");
  }
  for (std::size_t n : config.n_list) {
    if (n < 4) throw ValidationError("every N must be at least 4, got " + std::to_string(n));
    if (config.grid % n != 0) {
      throw ValidationError("N = " + std::to_string(n) + " does not divide grid = " + std::to_string(config.grid));
    }
  }
  if (config.grid < 16 * config.n_list.back()) {
    throw ValidationError("grid must be at least 16 * max N = " + std::to_string(16 * config.n_list.back()));
  }
  if (!(config.t_end_fraction > 0.0) || !(config.t_end_fraction < 1.0)) {
    throw ValidationError("t_end_fraction must lie in (0, 1)");
  }
  if (config.samples < 1) throw ValidationError("samples must be at least 1");
  if (config.hausdorff_samples < 64) throw ValidationError("hausdorff_samples must be at least 64");
  if (!(config.integrator.abs_tol > 0.0) || !(config.integrator.rel_tol >= 0.0) ||
      !(config.reference_integrator.abs_tol > 0.0) || !(config.reference_integrator.rel_tol >= 0.0)) {
    throw ValidationError("integrator tolerances must be positive");
  }
  make_energy(config.energy);
  const auto curve = make_curve(config.curve, config.grid);
  for (double r : curvature_radius(curve)) {
    if (!(r > 0.0)) throw ValidationError("initial curve is not strictly convex");
  }
  for (double u : curve.values()) {
    if (!(u > 0.0)) throw ValidationError("origin must lie inside the initial curve");
  }
}

/// k * t_end / samples for k = 0..samples.
inline std::vector<double> sample_times(double t_end, std::size_t samples) {
  std::vector<double> times(samples + 1);
  for (std::size_t k = 0; k <= samples; ++k) {
    times[k] = k == samples ? t_end : t_end * static_cast<double>(k) / static_cast<double>(samples);
  }
  return times;
}

/// Smallest of the smooth extinction time and the polygon extinction times
/// of the given N values.
inline double earliest_extinction(const SupportFunctionField& curve, const AnisotropyFunction& energy,
                                  std::span<const std::size_t> n_list) {
  double t = smooth_extinction_time(curve, energy);
  for (std::size_t n : n_list) t = std::min(t, extinction_time(initial_polygon(curve, discretize(energy, n))));
  return t;
}

struct ReferenceRun {
  std::vector<double> times;
  /// snapshots[k] is the curve at times[k].
  std::vector<SupportFunctionField> snapshots;
};

inline ReferenceRun run_reference(const SupportFunctionField& curve, const AnisotropyFunction& energy,
                                  const std::vector<double>& times, const IntegratorSettings& settings) {
  ReferenceRun ref;
  ref.times = times;
  std::vector<double> later(times.begin() + 1, times.end());
  ref.snapshots = evolve_reference(curve, energy, later, settings);
  return ref;
}

struct ErrorSample {
  double time = 0.0;
  double hausdorff = 0.0;
  double lambda_max = 0.0;
  double upsilon_max = 0.0;
};

struct PairRun {
  std::size_t n_sides = 0;
  double dtheta = 0.0;
  double t_end = 0.0;
  double extinction_time = 0.0;
  PolygonTrajectory polygon;
  std::vector<ErrorSample> errors;
  TrajectoryInvariants invariants;

  double sup_hausdorff() const { return sup(&ErrorSample::hausdorff); }
  double sup_lambda() const { return sup(&ErrorSample::lambda_max); }
  double sup_upsilon() const { return sup(&ErrorSample::upsilon_max); }

 private:
  double sup(double ErrorSample::*field) const {
    double s = 0.0;
    for (const auto& e : errors) s = std::max(s, e.*field);
    return s;
  }
};

/// Evolves the N-gon built from the config's initial curve and compares it
/// with `reference` at every reference sample time. Failures are rethrown
/// with the run's N attached to the message.
inline PairRun run_pair(const RunConfig& config, std::size_t n, const ReferenceRun& reference) {
  const auto energy = make_energy(config.energy);
  const auto& curve0 = reference.snapshots.front();
  PairRun run;
  run.n_sides = n;
  const std::string context = "N = " + std::to_string(n) + ": ";
  try {
    const auto state0 = initial_polygon(curve0, discretize(energy, n));
    run.dtheta = state0.dtheta();
    run.t_end = reference.times.back();
    run.extinction_time = extinction_time(state0);
    FlowSettings flow;
    flow.integrator = config.integrator;
    run.polygon = evolve(state0, run.t_end, flow, reference.times);
    run.invariants = check_invariants(run.polygon);
    for (std::size_t k = 0; k < reference.times.size(); ++k) {
      const PolygonState* state = run.polygon.at_time(reference.times[k]);
      if (state == nullptr) throw NumericalFailure("polygon run missed a sample time", reference.times[k]);
      const auto& curve = reference.snapshots[k];
      const auto ce = curvature_errors(curve, energy, *state);
      ErrorSample sample;
      sample.time = reference.times[k];
      sample.lambda_max = ce.lambda_max;
      sample.upsilon_max = ce.upsilon_max;
      sample.hausdorff = hausdorff_distance(vertices_from_support(*state), curve, config.hausdorff_samples);
      run.errors.push_back(sample);
    }
  } catch (const NumericalFailure& e) {
    throw NumericalFailure(context + e.what(), e.time(), e.last_state());
  } catch (const ValidationError& e) {
    throw ValidationError(context + e.what());
  }
  return run;
}

/// Single pair run with its own reference, to t_end_fraction of the earlier
/// of the two extinction times.
inline PairRun run_pair(const RunConfig& config, std::size_t n) {
  const auto energy = make_energy(config.energy);
  const auto curve = make_curve(config.curve, config.grid);
  const std::size_t ns[] = {n};
  const double t_end = config.t_end_fraction * earliest_extinction(curve, energy, ns);
  const auto ref = run_reference(curve, energy, sample_times(t_end, config.samples), config.reference_integrator);
  return run_pair(config, n, ref);
}

struct ConvergenceRecord {
  std::size_t n_sides = 0;
  double dtheta = 0.0;
  double sup_hausdorff = 0.0;
  double sup_lambda = 0.0;
  double sup_upsilon = 0.0;
  double area_drift = 0.0;
  bool monotone = false;
};

/// Slope windows used for the pass flags.
inline constexpr double hausdorff_slope_lo = 1.6, hausdorff_slope_hi = 2.4;
inline constexpr double upsilon_slope_lo = 0.7, upsilon_slope_hi = 1.3;
/// Per-step slack allowed on the monotone monitors.
inline constexpr double monotone_slack = 1e-10;

struct ConvergenceReport {
  RunConfig config;
  double t_end = 0.0;
  std::vector<ConvergenceRecord> records;
  std::vector<double> hausdorff_ratios;
  std::vector<double> lambda_ratios;
  std::vector<double> upsilon_ratios;
  double hausdorff_slope = 0.0;
  double lambda_slope = 0.0;
  double upsilon_slope = 0.0;
  bool hausdorff_pass = false;
  bool lambda_pass = false;
  bool upsilon_pass = false;
  bool invariants_pass = false;

  bool pass() const noexcept { return hausdorff_pass && upsilon_pass; }
};

struct ConvergenceStudy {
  ReferenceRun reference;
  std::vector<PairRun> pairs;
  ConvergenceReport report;
};

/// Aggregates sup-over-time errors of finished pair runs into a report.
inline ConvergenceReport summarize(const RunConfig& config, double t_end, const std::vector<PairRun>& pairs) {
  ConvergenceReport report;
  report.config = config;
  report.t_end = t_end;
  std::vector<std::size_t> ns;
  std::vector<double> steps, haus, lam, ups;
  report.invariants_pass = true;
  for (const auto& run : pairs) {
    ConvergenceRecord r;
    r.n_sides = run.n_sides;
    r.dtheta = run.dtheta;
    r.sup_hausdorff = run.sup_hausdorff();
    r.sup_lambda = run.sup_lambda();
    r.sup_upsilon = run.sup_upsilon();
    r.area_drift = run.invariants.area_drift;
    r.monotone = run.invariants.monotone(monotone_slack) && run.invariants.convex;
    report.invariants_pass = report.invariants_pass && r.monotone;
    report.records.push_back(r);
    ns.push_back(r.n_sides);
    steps.push_back(r.dtheta);
    haus.push_back(r.sup_hausdorff);
    lam.push_back(r.sup_lambda);
    ups.push_back(r.sup_upsilon);
  }
  report.hausdorff_ratios = doubling_ratios(ns, haus);
  report.lambda_ratios = doubling_ratios(ns, lam);
  report.upsilon_ratios = doubling_ratios(ns, ups);
  report.hausdorff_slope = loglog_slope(steps, haus);
  report.lambda_slope = loglog_slope(steps, lam);
  report.upsilon_slope = loglog_slope(steps, ups);
  auto within = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
  report.hausdorff_pass = within(report.hausdorff_slope, hausdorff_slope_lo, hausdorff_slope_hi);
  report.lambda_pass = within(report.lambda_slope, hausdorff_slope_lo, hausdorff_slope_hi);
  report.upsilon_pass = within(report.upsilon_slope, upsilon_slope_lo, upsilon_slope_hi);
  return report;
}

/// Runs every N of the config against one shared reference solution. All
/// runs stop at t_end_fraction times the earliest extinction time over the
/// smooth curve and every polygon, so they share sample instants.
inline ConvergenceStudy convergence_study(const RunConfig& config) {
  validate(config);
  if (config.n_list.size() < 3) throw ValidationError("a convergence study needs at least 3 values of N");
  for (std::size_t k = 0; k + 1 < config.n_list.size(); ++k) {
    if (config.n_list[k + 1] != 2 * config.n_list[k]) {
      throw ValidationError("n_list must consist of consecutive doublings");
    }
  }
  const auto energy = make_energy(config.energy);
  const auto curve = make_curve(config.curve, config.grid);
  const double t_end = config.t_end_fraction * earliest_extinction(curve, energy, config.n_list);

  ConvergenceStudy study;
  try {
    study.reference = run_reference(curve, energy, sample_times(t_end, config.samples), config.reference_integrator);
  } catch (const NumericalFailure& e) {
    throw NumericalFailure(std::string("reference run: ") + e.what(), e.time(), e.last_state());
  }
  for (std::size_t n : config.n_list) study.pairs.push_back(run_pair(config, n, study.reference));
  study.report = summarize(config, t_end, study.pairs);
  return study;
}

/// Smallest eigenvalue of the (m-1) x (m-1) tridiagonal matrix with 2 on
/// the diagonal and -1 off it, by inverse iteration with Rayleigh quotients.
inline double smallest_tridiagonal_eigenvalue(std::size_t m) {
  if (m < 2) throw ValidationError("matrix order m - 1 must be at least 1");
  const std::size_t n = m - 1;
  std::vector<double> x(n, 1.0), y(n), c(n), rhs(n);
  auto apply = [&](const std::vector<double>& v, std::size_t i) {
    double r = 2.0 * v[i];
    if (i > 0) r -= v[i - 1];
    if (i + 1 < n) r -= v[i + 1];
    return r;
  };
  double lambda = 0.0;
  for (int iter = 0; iter < 500; ++iter) {
    // Thomas algorithm for T y = x.
    double denom = 2.0;
    c[0] = -1.0 / denom;
    rhs[0] = x[0] / denom;
    for (std::size_t i = 1; i < n; ++i) {
      denom = 2.0 + c[i - 1];
      c[i] = -1.0 / denom;
      rhs[i] = (x[i] + rhs[i - 1]) / denom;
    }
    y[n - 1] = rhs[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) y[i] = rhs[i] - c[i] * y[i + 1];
    double norm2 = 0.0;
    for (double v : y) norm2 += v * v;
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] * inv;
    double quotient = 0.0;
    for (std::size_t i = 0; i < n; ++i) quotient += x[i] * apply(x, i);
    const bool converged = iter > 2 && std::abs(quotient - lambda) <= 1e-17;
    lambda = quotient;
    if (converged) break;
  }
  return lambda;
}

/// 2 (1 - cos(pi / m)), evaluated without cancellation.
inline double poincare_constant(std::size_t m) {
  const double s = std::sin(std::numbers::pi / (2.0 * static_cast<double>(m)));
  return 4.0 * s * s;
}

struct PoincareResult {
  bool pass = false;
  /// min over trials of (rhs - lhs) / rhs.
  double worst_slack = std::numeric_limits<double>::infinity();
  /// max over m of |lambda_min - 2 (1 - cos(pi / m))|.
  double worst_eigen_error = 0.0;
  std::size_t trials = 0;
  std::size_t max_m = 0;
};

/// (a) For `trials` random sequences p_0..p_M with p_0 = p_M = 0 and M
/// drawn uniformly from [2, max_m], checks
///   sum p_m^2 <= sum (p_{m+1} - p_m)^2 / (2 (1 - cos(pi / M))).
/// (b) For every M in [2, max_m] checks the smallest eigenvalue of the
/// tridiagonal (-1, 2, -1) matrix against 2 (1 - cos(pi / M)) to 1e-10.
inline PoincareResult poincare_check(std::size_t max_m, std::size_t trials, std::uint64_t seed) {
  if (max_m < 2) throw ValidationError("poincare_check needs max_m >= 2");
  if (trials < 1) throw ValidationError("poincare_check needs at least one trial");
  PoincareResult result;
  result.trials = trials;
  result.max_m = max_m;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_m(2, max_m);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  std::vector<double> p;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const std::size_t m = pick_m(rng);
    p.assign(m + 1, 0.0);
    for (std::size_t k = 1; k < m; ++k) p[k] = value(rng);
    double lhs = 0.0, diffs = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      lhs += p[k] * p[k];
      diffs += (p[k + 1] - p[k]) * (p[k + 1] - p[k]);
    }
    const double rhs = diffs / poincare_constant(m);
    result.worst_slack = std::min(result.worst_slack, rhs > 0.0 ? (rhs - lhs) / rhs : 0.0);
  }
  for (std::size_t m = 2; m <= max_m; ++m) {
    result.worst_eigen_error =
        std::max(result.worst_eigen_error, std::abs(smallest_tridiagonal_eigenvalue(m) - poincare_constant(m)));
  }
  result.pass = result.worst_slack >= -1e-12 && result.worst_eigen_error < 1e-10;
  return result;
}

}  // namespace crystalline
