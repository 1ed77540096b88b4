#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "crystalline/anisotropy.hpp"
#include "crystalline/crystalline_flow.hpp"
#include "crystalline/error.hpp"
#include "crystalline/periodic.hpp"
#include "crystalline/rates.hpp"
#include "crystalline/smooth_flow.hpp"
#include "crystalline/vec2.hpp"

namespace crystalline {

/// Anything with a support function h(phi) = max over the body of x . (cos phi, sin phi).
template <class T>
concept SupportBody = requires(const T& body, double phi) {
  { body.support(phi) } -> std::convertible_to<double>;
};

/// Convex polygon given by its vertices in counterclockwise order.
class VertexPolygon {
 public:
  explicit VertexPolygon(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.size() < 3) throw ValidationError("a polygon needs at least 3 vertices");
  }

  std::span<const Vec2> vertices() const& noexcept { return vertices_; }
  std::span<const Vec2> vertices() const&& = delete;
  std::size_t size() const noexcept { return vertices_.size(); }

  double support(double phi) const noexcept {
    const Vec2 e = unit_at(phi);
    double best = -std::numeric_limits<double>::infinity();
    for (const Vec2& v : vertices_) best = std::max(best, dot(v, e));
    return best;
  }

  bool strictly_convex() const noexcept {
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 a = vertices_[next_index(i, n)] - vertices_[i];
      const Vec2 b = vertices_[next_index(next_index(i, n), n)] - vertices_[next_index(i, n)];
      if (!(cross(a, b) > 0.0)) return false;
    }
    return true;
  }

  /// Shoelace area.
  double area() const noexcept {
    const std::size_t n = vertices_.size();
    double twice = 0.0;
    for (std::size_t i = 0; i < n; ++i) twice += cross(vertices_[i], vertices_[next_index(i, n)]);
    return 0.5 * twice;
  }

 private:
  std::vector<Vec2> vertices_;
};

inline double polygon_support(const VertexPolygon& poly, double phi) noexcept { return poly.support(phi); }

/// Disk of the given centre and radius.
struct Disk {
  Vec2 center{};
  double radius = 1.0;
  double support(double phi) const noexcept { return dot(center, unit_at(phi)) + radius; }
};

/// Vertex k joins side k-1 and side k, so side i runs from vertex i to
/// vertex i+1 and the vertices are counterclockwise.
inline std::vector<Vec2> vertices_from_support(std::span<const double> d, double dtheta) {
  const std::size_t n = d.size();
  const double inv_sin = 1.0 / std::sin(dtheta);
  std::vector<Vec2> v(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = prev_index(k, n);
    const double ai = static_cast<double>(i) * dtheta, ak = static_cast<double>(k) * dtheta;
    const double ci = std::cos(ai), si = std::sin(ai), ck = std::cos(ak), sk = std::sin(ak);
    // Solves x . e_i = d_i, x . e_k = d_k.
    v[k] = {(d[i] * sk - d[k] * si) * inv_sin, (ci * d[k] - ck * d[i]) * inv_sin};
  }
  return v;
}

inline VertexPolygon vertices_from_support(const PolygonState& state) {
  return VertexPolygon(vertices_from_support(state.support(), state.dtheta()));
}

/// Support distances of the polygon circumscribed about `curve` with
/// tangent lines at exterior normals i * 2pi / n.
inline std::vector<double> initial_support_distances(const SupportFunctionField& curve, std::size_t n_sides) {
  if (n_sides < 4) throw ValidationError("a polygon needs at least 4 sides");
  std::vector<double> d(n_sides);
  const double dtheta = two_pi / static_cast<double>(n_sides);
  for (std::size_t i = 0; i < n_sides; ++i) d[i] = curve.support(static_cast<double>(i) * dtheta);
  return d;
}

/// Initial polygon: d_i(0) = u(i dtheta, 0). Every side must have nonzero
/// length, otherwise DegenerateInitialization is thrown.
inline PolygonState initial_polygon(const SupportFunctionField& curve,
                                    std::shared_ptr<const DiscreteAnisotropy> aniso) {
  auto d = initial_support_distances(curve, aniso->n_sides());
  const auto lengths = side_lengths_from_support(d, aniso->dtheta());
  const double scale = *std::max_element(lengths.begin(), lengths.end());
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (!(lengths[i] > 1e-12 * scale)) {
      throw DegenerateInitialization("initial polygon side " + std::to_string(i) + " has zero length");
    }
  }
  return PolygonState(std::move(aniso), std::move(d), curve.time());
}

/// Hausdorff distance of two convex bodies, computed as the maximum support
/// gap over `samples` uniformly spaced directions. Both bodies must contain
/// the origin in their interior.
template <SupportBody A, SupportBody B>
double hausdorff_distance(const A& a, const B& b, std::size_t samples = 8192) {
  if (samples < 4) throw ValidationError("hausdorff_distance needs at least 4 samples");
  double worst = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const double phi = two_pi * static_cast<double>(k) / static_cast<double>(samples);
    const double ha = a.support(phi);
    const double hb = b.support(phi);
    if (!(ha > 0.0) || !(hb > 0.0)) {
      throw InvalidComparison("origin is not interior to both bodies (support direction " +
                              std::to_string(phi) + ")");
    }
    worst = std::max(worst, std::abs(ha - hb));
  }
  return worst;
}

struct CurvatureErrors {
  /// max_i |W(i dtheta) - omega_i|
  double lambda_max = 0.0;
  /// max_i |W_theta(i dtheta) - (omega_{i+1} - omega_i) / sin dtheta|
  double upsilon_max = 0.0;
};

/// Compares the polygon's weighted curvatures with those of the smooth
/// curve at the polygon's normal angles. W_theta uses periodic central
/// differences on the curve's grid.
inline CurvatureErrors curvature_errors(const SupportFunctionField& curve, const AnisotropyFunction& energy,
                                        const PolygonState& state) {
  const auto w = weighted_curvature_field(curve, energy);
  const auto w_theta = central_derivative(w);
  const auto omega = weighted_curvatures(state);
  const std::size_t n = omega.size();
  const double dtheta = state.dtheta();
  const double inv_sin = 1.0 / std::sin(dtheta);
  CurvatureErrors e;
  for (std::size_t i = 0; i < n; ++i) {
    const double phi = static_cast<double>(i) * dtheta;
    e.lambda_max = std::max(e.lambda_max, std::abs(interpolate_periodic(w, phi) - omega[i]));
    const double quotient = (omega[next_index(i, n)] - omega[i]) * inv_sin;
    e.upsilon_max = std::max(e.upsilon_max, std::abs(interpolate_periodic(w_theta, phi) - quotient));
  }
  return e;
}

struct InitialErrorRow {
  std::size_t n_sides = 0;
  double dtheta = 0.0;
  double lambda_max0 = 0.0;
  double upsilon_max0 = 0.0;
  double hausdorff0 = 0.0;
};

struct InitialErrorStudy {
  std::vector<InitialErrorRow> rows;
  std::vector<double> lambda_ratios;
  std::vector<double> upsilon_ratios;
  std::vector<double> hausdorff_ratios;
};

/// Discretization error of the circumscribed initial polygon for each N.
inline InitialErrorStudy initial_error_study(const SupportFunctionField& curve, const AnisotropyFunction& energy,
                                             std::span<const std::size_t> n_list,
                                             std::size_t hausdorff_samples = 8192) {
  if (n_list.empty()) throw ValidationError("initial error study needs at least one N");
  InitialErrorStudy study;
  std::vector<double> lambdas, upsilons, hausdorffs;
  for (std::size_t n : n_list) {
    const auto state = initial_polygon(curve, discretize(energy, n));
    const auto e = curvature_errors(curve, energy, state);
    InitialErrorRow row;
    row.n_sides = n;
    row.dtheta = state.dtheta();
    row.lambda_max0 = e.lambda_max;
    row.upsilon_max0 = e.upsilon_max;
    row.hausdorff0 = hausdorff_distance(vertices_from_support(state), curve, hausdorff_samples);
    study.rows.push_back(row);
    lambdas.push_back(row.lambda_max0);
    upsilons.push_back(row.upsilon_max0);
    hausdorffs.push_back(row.hausdorff0);
  }
  study.lambda_ratios = doubling_ratios(n_list, lambdas);
  study.upsilon_ratios = doubling_ratios(n_list, upsilons);
  study.hausdorff_ratios = doubling_ratios(n_list, hausdorffs);
  return study;
}

}  // namespace crystalline
