#pragma once

// File output: trajectory / reference / error-study CSVs and the JSON
// convergence report. Every double is written with 17 significant digits.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "crystalline/analysis.hpp"
#include "crystalline/crystalline_flow.hpp"
#include "crystalline/error.hpp"
#include "crystalline/geometry.hpp"
#include "crystalline/smooth_flow.hpp"

namespace crystalline {

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << std::setprecision(17);
  return out;
}

inline void close_output(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

inline nlohmann::json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

inline nlohmann::json numbers(std::span<const double> values) {
  auto arr = nlohmann::json::array();
  for (double v : values) arr.push_back(number_or_null(v));
  return arr;
}

}  // namespace detail

/// Header: t, A, L_total, omega_min, omega_max, omega_median_star,
/// h1_functional, d_0 .. d_{N-1}. A row is written for the first and last
/// states and for any state at least `min_interval` after the previous row.
inline void write_trajectory_csv(std::ostream& out, const PolygonTrajectory& traj, double min_interval = 0.0) {
  if (traj.states.empty()) return;
  const std::size_t n = traj.states.front().size();
  out << "t,A,L_total,omega_min,omega_max,omega_median_star,h1_functional";
  for (std::size_t i = 0; i < n; ++i) out << ",d_" << i;
  out << '\n';
  double last_written = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const auto& s = traj.states[k];
    const auto& m = traj.monitors[k];
    const bool last = k + 1 == traj.states.size();
    if (!last && k > 0 && s.time() - last_written < min_interval) continue;
    last_written = s.time();
    out << s.time() << ',' << m.area << ',' << m.total_length << ',' << m.omega_min << ',' << m.omega_max << ','
        << m.omega_median << ',' << m.h1;
    for (double d : s.support()) out << ',' << d;
    out << '\n';
  }
}

inline void write_trajectory_csv(const std::filesystem::path& path, const PolygonTrajectory& traj,
                                 double min_interval = 0.0) {
  auto out = detail::open_output(path);
  out << std::setprecision(17);
  write_trajectory_csv(out, traj, min_interval);
  detail::close_output(out, path);
}

/// Header: t, u_0 .. u_{M-1} (every `decimate`-th node).
inline void write_reference_csv(std::ostream& out, std::span<const SupportFunctionField> snapshots,
                                std::size_t decimate = 1) {
  if (snapshots.empty()) return;
  if (decimate == 0) decimate = 1;
  const std::size_t m = snapshots.front().grid_size();
  out << 't';
  for (std::size_t j = 0; j < m; j += decimate) out << ",u_" << j;
  out << '\n';
  for (const auto& field : snapshots) {
    out << field.time();
    for (std::size_t j = 0; j < m; j += decimate) out << ',' << field.values()[j];
    out << '\n';
  }
}

inline void write_reference_csv(const std::filesystem::path& path, std::span<const SupportFunctionField> snapshots,
                                std::size_t decimate = 1) {
  auto out = detail::open_output(path);
  write_reference_csv(out, snapshots, decimate);
  detail::close_output(out, path);
}

/// Header: N, dtheta, lambda_max0, upsilon_max0, hausdorff0,
/// lambda_ratio, upsilon_ratio, hausdorff_ratio. A row's ratio compares it
/// with the previous row; the first row leaves them empty.
inline void write_initial_error_csv(std::ostream& out, const InitialErrorStudy& study) {
  out << "N,dtheta,lambda_max0,upsilon_max0,hausdorff0,lambda_ratio,upsilon_ratio,hausdorff_ratio\n";
  auto cell = [&](const std::vector<double>& ratios, std::size_t k) {
    out << ',';
    if (k > 0 && std::isfinite(ratios[k - 1])) out << ratios[k - 1];
  };
  for (std::size_t k = 0; k < study.rows.size(); ++k) {
    const auto& r = study.rows[k];
    out << r.n_sides << ',' << r.dtheta << ',' << r.lambda_max0 << ',' << r.upsilon_max0 << ',' << r.hausdorff0;
    cell(study.lambda_ratios, k);
    cell(study.upsilon_ratios, k);
    cell(study.hausdorff_ratios, k);
    out << '\n';
  }
}

inline void write_initial_error_csv(const std::filesystem::path& path, const InitialErrorStudy& study) {
  auto out = detail::open_output(path);
  write_initial_error_csv(out, study);
  detail::close_output(out, path);
}

/// Header: t, hausdorff, lambda_max, upsilon_max.
inline void write_errors_csv(const std::filesystem::path& path, const PairRun& run) {
  auto out = detail::open_output(path);
  out << "t,hausdorff,lambda_max,upsilon_max\n";
  for (const auto& e : run.errors) out << e.time << ',' << e.hausdorff << ',' << e.lambda_max << ',' << e.upsilon_max << '\n';
  detail::close_output(out, path);
}

inline nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json j;
  j["energy"] = c.energy.key;
  j["epsilon"] = c.energy.epsilon;
  j["harmonic"] = c.energy.harmonic;
  j["curve"] = c.curve.kind;
  if (c.curve.kind == "circle") {
    j["r0"] = c.curve.r0;
    j["cx"] = c.curve.cx;
    j["cy"] = c.curve.cy;
  } else if (c.curve.kind == "ellipse") {
    j["a"] = c.curve.a;
    j["b"] = c.curve.b;
  } else {
    j["a0"] = c.curve.a0;
    j["cos_coeffs"] = c.curve.cos_coeffs;
    j["sin_coeffs"] = c.curve.sin_coeffs;
  }
  j["n_list"] = c.n_list;
  j["grid"] = c.grid;
  j["t_end_fraction"] = c.t_end_fraction;
  j["tol_abs"] = c.integrator.abs_tol;
  j["tol_rel"] = c.integrator.rel_tol;
  j["tol_ref_abs"] = c.reference_integrator.abs_tol;
  j["tol_ref_rel"] = c.reference_integrator.rel_tol;
  j["samples"] = c.samples;
  j["hausdorff_samples"] = c.hausdorff_samples;
  return j;
}

inline nlohmann::json report_to_json(const ConvergenceReport& report) {
  nlohmann::json j;
  j["config"] = config_to_json(report.config);
  j["t_end"] = report.t_end;
  auto records = nlohmann::json::array();
  for (const auto& r : report.records) {
    records.push_back({{"N", r.n_sides},
                       {"dtheta", r.dtheta},
                       {"sup_hausdorff", detail::number_or_null(r.sup_hausdorff)},
                       {"sup_lambda", detail::number_or_null(r.sup_lambda)},
                       {"sup_upsilon", detail::number_or_null(r.sup_upsilon)},
                       {"area_drift", detail::number_or_null(r.area_drift)},
                       {"monotone", r.monotone}});
  }
  j["records"] = records;
  j["ratios"] = {{"hausdorff", detail::numbers(report.hausdorff_ratios)},
                 {"lambda", detail::numbers(report.lambda_ratios)},
                 {"upsilon", detail::numbers(report.upsilon_ratios)}};
  j["slopes"] = {{"hausdorff", detail::number_or_null(report.hausdorff_slope)},
                 {"lambda", detail::number_or_null(report.lambda_slope)},
                 {"upsilon", detail::number_or_null(report.upsilon_slope)}};
  j["pass"] = {{"hausdorff", report.hausdorff_pass},
               {"lambda", report.lambda_pass},
               {"upsilon", report.upsilon_pass},
               {"invariants", report.invariants_pass},
               {"overall", report.pass()}};
  return j;
}

struct EmittedFiles {
  std::filesystem::path report;
  std::vector<std::filesystem::path> trajectories;
  std::vector<std::filesystem::path> error_series;
};

/// Writes report.json plus trajectory_N<n>.csv and errors_N<n>.csv for every
/// run into `dir`. Trajectory rows are thinned to the study's sampling interval.
inline EmittedFiles emit_reports(const ConvergenceStudy& study, const std::filesystem::path& dir) {
  EmittedFiles files;
  files.report = dir / "report.json";
  {
    auto out = detail::open_output(files.report);
    out << report_to_json(study.report).dump(2) << '\n';
    detail::close_output(out, files.report);
  }
  const double interval =
      study.report.config.samples > 0 ? study.report.t_end / static_cast<double>(study.report.config.samples) : 0.0;
  for (const auto& run : study.pairs) {
    const auto stem = std::to_string(run.n_sides);
    files.trajectories.push_back(dir / ("trajectory_N" + stem + ".csv"));
    write_trajectory_csv(files.trajectories.back(), run.polygon, interval * (1.0 - 1e-9));
    files.error_series.push_back(dir / ("errors_N" + stem + ".csv"));
    write_errors_csv(files.error_series.back(), run);
  }
  return files;
}

}  // namespace crystalline
