#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>

namespace crystalline {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline std::size_t next_index(std::size_t i, std::size_t n) noexcept { return i + 1 == n ? 0 : i + 1; }
inline std::size_t prev_index(std::size_t i, std::size_t n) noexcept { return i == 0 ? n - 1 : i - 1; }

// Wraps any integer offset into [0, n).
inline std::size_t wrap_index(long long i, std::size_t n) noexcept {
  const auto m = static_cast<long long>(n);
  return static_cast<std::size_t>(((i % m) + m) % m);
}

// Wraps an angle into [0, 2pi).
inline double wrap_angle(double phi) noexcept {
  double r = std::fmod(phi, two_pi);
  if (r < 0.0) r += two_pi;
  if (r >= two_pi) r = 0.0;
  return r;
}

// Undivided periodic second difference v_{i+1} - 2 v_i + v_{i-1}.
inline double second_difference(std::span<const double> v, std::size_t i) noexcept {
  const std::size_t n = v.size();
  return v[next_index(i, n)] - 2.0 * v[i] + v[prev_index(i, n)];
}

// Cubic Lagrange interpolation of uniformly sampled periodic data,
// values[j] = F(j * 2pi / n). Exact at the nodes.
inline double interpolate_periodic(std::span<const double> values, double phi) noexcept {
  const std::size_t n = values.size();
  const double spacing = two_pi / static_cast<double>(n);
  const double x = wrap_angle(phi) / spacing;
  auto base = static_cast<long long>(std::floor(x));
  double s = x - static_cast<double>(base);
  if (s < 1e-12) return values[wrap_index(base, n)];
  if (s > 1.0 - 1e-12) return values[wrap_index(base + 1, n)];
  const double ym1 = values[wrap_index(base - 1, n)];
  const double y0 = values[wrap_index(base, n)];
  const double y1 = values[wrap_index(base + 1, n)];
  const double y2 = values[wrap_index(base + 2, n)];
  return -s * (s - 1.0) * (s - 2.0) / 6.0 * ym1 + (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0 * y0 -
         (s + 1.0) * s * (s - 2.0) / 2.0 * y1 + (s + 1.0) * s * (s - 1.0) / 6.0 * y2;
}

}  // namespace crystalline
