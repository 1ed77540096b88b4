// crystalline: command-line driver for polygon runs, reference runs,
// convergence studies and the discrete Poincare check.
//
//   crystalline [--config FILE] [--key=value ...] <subcommand>
//
// Exit status: 0 pass, 1 validation failure, 2 numerical failure,
// 3 I/O failure.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "crystalline/crystalline.hpp"

namespace fs = std::filesystem;
using namespace crystalline;

namespace {

enum Exit : int { kPass = 0, kValidation = 1, kNumerical = 2, kIo = 3 };

struct Options {
  RunConfig config;
  double tol_ref = 1e-13;
  std::size_t n = 0;
  std::uint64_t seed = 1;
  std::size_t trials = 1000;
  std::size_t m_max = 64;
  std::size_t decimate = 1;
  std::size_t energy_samples = 4096;
};

void add_options(CLI::App& app, Options& o) {
  auto& c = o.config;
  app.add_option("--energy", c.energy.key, "energy catalog key: isotropic | cosine")->capture_default_str();
  app.add_option("--epsilon", c.energy.epsilon, "cosine energy amplitude")->capture_default_str();
  app.add_option("--harmonic", c.energy.harmonic, "cosine energy harmonic")->capture_default_str();
  app.add_option("--curve", c.curve.kind, "initial curve: circle | ellipse | series")->capture_default_str();
  app.add_option("--r0", c.curve.r0, "circle radius")->capture_default_str();
  app.add_option("--cx", c.curve.cx, "circle centre x")->capture_default_str();
  app.add_option("--cy", c.curve.cy, "circle centre y")->capture_default_str();
  app.add_option("--a", c.curve.a, "ellipse semiaxis along x")->capture_default_str();
  app.add_option("--b", c.curve.b, "ellipse semiaxis along y")->capture_default_str();
  app.add_option("--a0", c.curve.a0, "support series constant term")->capture_default_str();
  app.add_option("--cos_coeffs", c.curve.cos_coeffs, "support series cos k phi coefficients, k = 1, 2, ...")
      ->delimiter(',');
  app.add_option("--sin_coeffs", c.curve.sin_coeffs, "support series sin k phi coefficients, k = 1, 2, ...")
      ->delimiter(',');
  app.add_option("--n_list", c.n_list, "polygon side counts")->delimiter(',')->capture_default_str();
  app.add_option("--grid", c.grid, "reference grid size M")->capture_default_str();
  app.add_option("--t_end_fraction", c.t_end_fraction, "end time as a fraction of the extinction time")
      ->capture_default_str();
  app.add_option("--tol_abs", c.integrator.abs_tol, "polygon integrator absolute tolerance")->capture_default_str();
  app.add_option("--tol_rel", c.integrator.rel_tol, "polygon integrator relative tolerance")->capture_default_str();
  app.add_option("--tol_ref", o.tol_ref, "reference integrator tolerance (absolute and relative)")
      ->capture_default_str();
  app.add_option("--samples", c.samples, "sampling intervals over [0, t_end]")->capture_default_str();
  app.add_option("--hausdorff_samples", c.hausdorff_samples, "directions for the Hausdorff distance")
      ->capture_default_str();
  app.add_option("--out", c.out, "output directory")->capture_default_str();
  app.add_option("--n", o.n, "side count for evolve (default: first of n_list)");
  app.add_option("--seed", o.seed, "poincare random seed")->capture_default_str();
  app.add_option("--trials", o.trials, "poincare random sequences")->capture_default_str();
  app.add_option("--m_max", o.m_max, "poincare largest M")->capture_default_str();
  app.add_option("--decimate", o.decimate, "reference CSV keeps every k-th grid node")->capture_default_str();
  app.add_option("--energy_samples", o.energy_samples, "validate-energy scan size")->capture_default_str();
}

void print_invariants(const TrajectoryInvariants& inv) {
  std::cout << "  area drift             " << inv.area_drift << '\n'
            << "  omega_min decrease     " << inv.omega_min_decrease << '\n'
            << "  total length increase  " << inv.length_increase << '\n'
            << "  h1 decrease            " << inv.h1_decrease << '\n'
            << "  convex                 " << (inv.convex ? "yes" : "no") << '\n';
}

int cmd_validate_energy(const Options& o) {
  const auto r = validate_energy(make_energy(o.config.energy), o.energy_samples);
  std::cout << "energy " << o.config.energy.key << " (epsilon " << o.config.energy.epsilon << ", harmonic "
            << o.config.energy.harmonic << "), " << r.samples << " samples\n"
            << "  min f      " << r.min_f << " at theta = " << r.argmin_f << '\n'
            << "  min f+f''  " << r.min_g << " at theta = " << r.argmin_g << '\n'
            << (r.pass ? "admissible\n" : "NOT admissible\n");
  return r.pass ? kPass : kValidation;
}

int cmd_evolve(const Options& o) {
  const auto& c = o.config;
  const std::size_t n = o.n != 0 ? o.n : (c.n_list.empty() ? 0 : c.n_list.front());
  RunConfig single = c;
  single.n_list = {n};
  validate(single);
  const auto energy = make_energy(c.energy);
  const auto state0 = initial_polygon(make_curve(c.curve, c.grid), discretize(energy, n));
  const double t_ext = extinction_time(state0);
  const double t_end = c.t_end_fraction * t_ext;
  FlowSettings flow;
  flow.integrator = c.integrator;
  const auto traj = evolve(state0, t_end, flow, sample_times(t_end, c.samples));
  const auto path = fs::path(c.out) / ("trajectory_N" + std::to_string(n) + ".csv");
  write_trajectory_csv(path, traj);
  const auto inv = check_invariants(traj);
  std::cout << "N = " << n << ", T = " << t_ext << ", t_end = " << t_end << ", " << traj.stats.accepted
            << " accepted / " << traj.stats.rejected << " rejected steps\n";
  print_invariants(inv);
  std::cout << "wrote " << path.string() << '\n';
  return kPass;
}

int cmd_reference(const Options& o) {
  const auto& c = o.config;
  const auto energy = make_energy(c.energy);
  const auto curve = make_curve(c.curve, c.grid);
  const double t_ext = smooth_extinction_time(curve, energy);
  const double t_end = c.t_end_fraction * t_ext;
  const auto ref = run_reference(curve, energy, sample_times(t_end, c.samples), c.reference_integrator);
  const auto path = fs::path(c.out) / "reference.csv";
  write_reference_csv(path, ref.snapshots, o.decimate);
  std::cout << "M = " << c.grid << ", T = " << t_ext << ", t_end = " << t_end << ", area " << enclosed_area(curve)
            << " -> " << enclosed_area(ref.snapshots.back()) << '\n'
            << "wrote " << path.string() << '\n';
  return kPass;
}

int cmd_converge(const Options& o) {
  const auto study = convergence_study(o.config);
  const auto files = emit_reports(study, o.config.out);
  const auto& r = study.report;
  std::cout << "t_end = " << r.t_end << '\n'
            << std::setw(6) << "N" << std::setw(15) << "sup D" << std::setw(15) << "sup Lambda" << std::setw(15)
            << "sup Upsilon" << std::setw(13) << "area drift" << '\n';
  for (const auto& rec : r.records) {
    std::cout << std::setw(6) << rec.n_sides << std::setw(15) << rec.sup_hausdorff << std::setw(15)
              << rec.sup_lambda << std::setw(15) << rec.sup_upsilon << std::setw(13) << rec.area_drift << '\n';
  }
  auto ratios = [](const char* name, const std::vector<double>& v, double slope) {
    std::cout << std::setw(10) << name << " ratios";
    for (double x : v) std::cout << ' ' << x;
    std::cout << "   slope " << slope << '\n';
  };
  ratios("Hausdorff", r.hausdorff_ratios, r.hausdorff_slope);
  ratios("Lambda", r.lambda_ratios, r.lambda_slope);
  ratios("Upsilon", r.upsilon_ratios, r.upsilon_slope);
  std::cout << "pass: hausdorff " << r.hausdorff_pass << ", lambda " << r.lambda_pass << ", upsilon "
            << r.upsilon_pass << ", invariants " << r.invariants_pass << '\n'
            << "wrote " << files.report.string() << " and " << 2 * files.trajectories.size() << " CSV files\n";
  return r.pass() ? kPass : kValidation;
}

int cmd_initial_error(const Options& o) {
  const auto& c = o.config;
  validate(c);
  const auto s = initial_error_study(make_curve(c.curve, c.grid), make_energy(c.energy), c.n_list,
                                     c.hausdorff_samples);
  const auto path = fs::path(c.out) / "initial_errors.csv";
  write_initial_error_csv(path, s);
  for (const auto& row : s.rows) {
    std::cout << "N = " << row.n_sides << "  Lambda(0) " << row.lambda_max0 << "  Upsilon(0) " << row.upsilon_max0
              << "  D(0) " << row.hausdorff0 << '\n';
  }
  std::cout << "wrote " << path.string() << '\n';
  return kPass;
}

int cmd_poincare(const Options& o) {
  const auto r = poincare_check(o.m_max, o.trials, o.seed);
  std::cout << r.trials << " sequences, M = 2.." << r.max_m << ", seed " << o.seed << '\n'
            << "  worst relative slack  " << r.worst_slack << '\n'
            << "  eigenvalue error      " << r.worst_eigen_error << '\n'
            << (r.pass ? "pass\n" : "FAIL\n");
  return r.pass ? kPass : kValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crystalline approximation of weighted curvature flow for convex curves"};
  app.set_config("--config", "", "flat key=value configuration file");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.fallthrough();
  app.require_subcommand(1);

  Options o;
  add_options(app, o);

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const Options&);
  };
  const Command commands[] = {
      {"validate-energy", "scan f and f + f'' for positivity", cmd_validate_energy},
      {"evolve", "single polygon run (side count --n)", cmd_evolve},
      {"reference", "smooth support-function run", cmd_reference},
      {"converge", "polygon vs reference convergence study over n_list", cmd_converge},
      {"initial-error", "discretization error of the initial polygons", cmd_initial_error},
      {"poincare", "discrete Poincare inequality and eigenvalue check", cmd_poincare},
  };
  for (const auto& cmd : commands) app.add_subcommand(cmd.name, cmd.help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::FileError& e) {
    std::cerr << e.what() << '\n';
    return kIo;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kValidation;
  }

  o.config.reference_integrator.abs_tol = o.tol_ref;
  o.config.reference_integrator.rel_tol = o.tol_ref;
  std::cout << std::setprecision(6);

  try {
    for (const auto& cmd : commands) {
      if (app.got_subcommand(cmd.name)) return cmd.run(o);
    }
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure at t = " << e.time() << ": " << e.what() << '\n';
    return kNumerical;
  } catch (const NonConvexFrankDiagram& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  }
  return kValidation;
}
