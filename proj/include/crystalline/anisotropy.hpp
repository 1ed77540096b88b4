#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crystalline/error.hpp"
#include "crystalline/periodic.hpp"

namespace crystalline {

/// Interfacial energy f(theta) given in closed form together with its first
/// and second derivatives. theta is the angle of the exterior normal.
class AnisotropyFunction {
 public:
  using Fn = std::function<double(double)>;

  AnisotropyFunction(Fn f, Fn f_prime, Fn f_double_prime, std::string name = "custom")
      : f_(std::move(f)),
        fp_(std::move(f_prime)),
        fpp_(std::move(f_double_prime)),
        name_(std::move(name)) {
    if (!f_ || !fp_ || !fpp_) throw InvalidEnergy("energy needs f, f' and f''");
  }

  double f(double theta) const { return f_(theta); }
  double f_prime(double theta) const { return fp_(theta); }
  double f_double_prime(double theta) const { return fpp_(theta); }

  /// Stiffness g = f + f''.
  double g(double theta) const { return f_(theta) + fpp_(theta); }
  double h(double theta) const { return 1.0 / g(theta); }

  const std::string& name() const noexcept { return name_; }

 private:
  Fn f_, fp_, fpp_;
  std::string name_;
};

struct EnergyValidation {
  bool pass = false;
  double min_f = 0.0;
  double min_g = 0.0;
  double argmin_f = 0.0;
  double argmin_g = 0.0;
  std::size_t samples = 0;
};

/// Heuristic admissibility check: scans f and f + f'' on a uniform grid of
/// `samples` angles and passes iff both minima are strictly positive.
inline EnergyValidation validate_energy(const AnisotropyFunction& energy, std::size_t samples = 4096) {
  if (samples < 64) throw ValidationError("validate_energy needs at least 64 samples");
  EnergyValidation result;
  result.samples = samples;
  result.min_f = std::numeric_limits<double>::infinity();
  result.min_g = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < samples; ++j) {
    const double theta = two_pi * static_cast<double>(j) / static_cast<double>(samples);
    const double f = energy.f(theta);
    const double fpp = energy.f_double_prime(theta);
    if (!std::isfinite(f) || !std::isfinite(fpp)) {
      throw InvalidEnergy("energy '" + energy.name() + "' is not finite at theta = " + std::to_string(theta));
    }
    if (f < result.min_f) {
      result.min_f = f;
      result.argmin_f = theta;
    }
    if (f + fpp < result.min_g) {
      result.min_g = f + fpp;
      result.argmin_g = theta;
    }
  }
  result.pass = result.min_f > 0.0 && result.min_g > 0.0;
  return result;
}

inline AnisotropyFunction isotropic_energy() {
  return AnisotropyFunction([](double) { return 1.0; }, [](double) { return 0.0; },
                            [](double) { return 0.0; }, "isotropic");
}

/// f(theta) = 1 + epsilon cos(harmonic theta), without admissibility check.
inline AnisotropyFunction cosine_energy_unchecked(double epsilon, int harmonic) {
  const double k = static_cast<double>(harmonic);
  return AnisotropyFunction(
      [=](double th) { return 1.0 + epsilon * std::cos(k * wrap_angle(th)); },
      [=](double th) { return -epsilon * k * std::sin(k * wrap_angle(th)); },
      [=](double th) { return -epsilon * k * k * std::cos(k * wrap_angle(th)); }, "cosine");
}

/// f(theta) = 1 + epsilon cos(harmonic theta). Throws InvalidEnergy unless
/// f > 0 and f + f'' > 0.
inline AnisotropyFunction cosine_energy(double epsilon, int harmonic) {
  if (harmonic < 0) throw InvalidEnergy("cosine energy harmonic must be nonnegative");
  // Closed form: min f = 1 - |eps|, min g = 1 - |eps| |1 - k^2|; harmonic 0
  // is the constant 1 + eps.
  const double k2 = static_cast<double>(harmonic) * static_cast<double>(harmonic);
  const double min_f = harmonic == 0 ? 1.0 + epsilon : 1.0 - std::abs(epsilon);
  const double min_g = harmonic == 0 ? 1.0 + epsilon : 1.0 - std::abs(epsilon) * std::abs(1.0 - k2);
  if (!(min_f > 0.0) || !(min_g > 0.0)) {
    throw InvalidEnergy("cosine energy with epsilon = " + std::to_string(epsilon) + ", harmonic = " +
                        std::to_string(harmonic) + " is not admissible (min f = " + std::to_string(min_f) +
                        ", min f+f'' = " + std::to_string(min_g) + ")");
  }
  return cosine_energy_unchecked(epsilon, harmonic);
}

/// Catalog entry as named in configuration files.
struct EnergySpec {
  std::string key = "isotropic";
  double epsilon = 0.0;
  int harmonic = 2;
};

inline AnisotropyFunction make_energy(const EnergySpec& spec) {
  if (spec.key == "isotropic") return isotropic_energy();
  if (spec.key == "cosine") return cosine_energy(spec.epsilon, spec.harmonic);
  throw InvalidEnergy("unknown energy '" + spec.key + "' (expected isotropic or cosine)");
}

/// Energy sampled at the N admissible normal angles i * 2pi / N, with the
/// discrete stiffness g_i and its reciprocal h_i.
class DiscreteAnisotropy {
 public:
  DiscreteAnisotropy(const AnisotropyFunction& energy, std::size_t n_sides)
      : n_(n_sides), dtheta_(n_sides > 0 ? two_pi / static_cast<double>(n_sides) : 0.0) {
    if (n_sides < 4) throw ValidationError("a polygon needs at least 4 sides");
    f_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) f_[i] = energy.f(static_cast<double>(i) * dtheta_);
    const double denom = two_one_minus_cos();
    g_.resize(n_);
    h_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      g_[i] = f_[i] + second_difference(f_, i) / denom;
      if (!(g_[i] > 0.0)) throw NonConvexFrankDiagram(i, g_[i]);
      h_[i] = 1.0 / g_[i];
    }
  }

  std::size_t n_sides() const noexcept { return n_; }
  double dtheta() const noexcept { return dtheta_; }
  double angle(std::size_t i) const noexcept { return static_cast<double>(i) * dtheta_; }
  std::span<const double> f() const noexcept { return f_; }
  std::span<const double> g() const noexcept { return g_; }
  std::span<const double> h() const noexcept { return h_; }

  /// 2(1 - cos dtheta), evaluated as 4 sin^2(dtheta / 2).
  double two_one_minus_cos() const noexcept {
    const double s = std::sin(0.5 * dtheta_);
    return 4.0 * s * s;
  }
  /// 2 tan(dtheta / 2): curvature of a side of unit length.
  double side_curvature_factor() const noexcept { return 2.0 * std::tan(0.5 * dtheta_); }

 private:
  std::size_t n_;
  double dtheta_;
  std::vector<double> f_, g_, h_;
};

inline std::shared_ptr<const DiscreteAnisotropy> discretize(const AnisotropyFunction& energy,
                                                           std::size_t n_sides) {
  return std::make_shared<const DiscreteAnisotropy>(energy, n_sides);
}

}  // namespace crystalline
