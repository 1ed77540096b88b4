#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "crystalline/anisotropy.hpp"
#include "crystalline/crystalline_flow.hpp"
#include "crystalline/error.hpp"
#include "crystalline/geometry.hpp"

using namespace crystalline;

namespace {

constexpr double pi = std::numbers::pi;

PolygonState regular(std::size_t n, double apothem = 1.0, const AnisotropyFunction& e = isotropic_energy()) {
  return PolygonState(discretize(e, n), std::vector<double>(n, apothem));
}

// Random convex polygon: perturbed support distances of a regular N-gon.
PolygonState random_state(std::size_t n, std::mt19937_64& rng, const AnisotropyFunction& e, double amp = 0.1) {
  std::uniform_real_distribution<double> u(-amp, amp);
  for (;;) {
    std::vector<double> d(n);
    for (auto& v : d) v = 1.0 + u(rng);
    const auto l = side_lengths_from_support(d, two_pi / static_cast<double>(n));
    if (*std::min_element(l.begin(), l.end()) > 1e-3) return PolygonState(discretize(e, n), d);
  }
}

// Circumscribed about a smooth convex curve with low-mode support function.
PolygonState smooth_state(std::size_t n, std::mt19937_64& rng, const AnisotropyFunction& e, double amp = 0.05) {
  std::uniform_real_distribution<double> u(-amp, amp);
  const double c1 = u(rng), s1 = u(rng), c2 = u(rng), s2 = u(rng), c3 = u(rng);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double th = two_pi * static_cast<double>(i) / static_cast<double>(n);
    d[i] = 1.0 + c1 * std::cos(th) + s1 * std::sin(th) + c2 * std::cos(2 * th) + s2 * std::sin(2 * th) +
           c3 * std::cos(3 * th);
  }
  return PolygonState(discretize(e, n), d);
}

// Intersection of the lines x . e_a = d_a and x . e_b = d_b, by Cramer's rule.
Vec2 intersect(double ta, double da, double tb, double db) {
  const double a11 = std::cos(ta), a12 = std::sin(ta), a21 = std::cos(tb), a22 = std::sin(tb);
  const double det = a11 * a22 - a12 * a21;
  return {(da * a22 - a12 * db) / det, (a11 * db - da * a21) / det};
}

std::vector<Vec2> brute_vertices(const std::vector<double>& d) {
  const std::size_t n = d.size();
  const double dt = two_pi / static_cast<double>(n);
  std::vector<Vec2> v(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = (k + n - 1) % n;
    v[k] = intersect(i * dt, d[i], k * dt, d[k]);
  }
  return v;
}

std::vector<double> advanced(const PolygonState& s, double h) {
  const auto rate = support_ode_rhs(s);
  std::vector<double> d(s.support().begin(), s.support().end());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += h * rate[i];
  return d;
}

}  // namespace

TEST(SideLengths, RegularPolygons) {
  for (double l : side_lengths(regular(4))) EXPECT_NEAR(l, 2.0, 1e-15);
  for (double l : side_lengths(regular(6))) EXPECT_NEAR(l, 2.0 / std::sqrt(3.0), 1e-15);
}

TEST(SideLengths, RectangleMatchesBruteForceVertices) {
  // Lines x = 1, y = 1, x = -1, y = -2 bound the rectangle [-1, 1] x [-2, 1].
  const std::vector<double> d{1.0, 1.0, 1.0, 2.0};
  const PolygonState s(discretize(isotropic_energy(), 4), d);
  const auto l = side_lengths(s);
  const auto v = brute_vertices(d);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(l[i], norm(v[(i + 1) % 4] - v[i]), 1e-14);
  EXPECT_NEAR(l[0], 3.0, 1e-14);
  EXPECT_NEAR(l[1], 2.0, 1e-14);
  EXPECT_NEAR(l[2], 3.0, 1e-14);
  EXPECT_NEAR(l[3], 2.0, 1e-14);
  const auto k = curvatures(s);
  EXPECT_NEAR(k[0], 2.0 / 3.0, 1e-14);
  EXPECT_NEAR(k[1], 1.0, 1e-14);
  EXPECT_NEAR(enclosed_area(s), 6.0, 1e-14);
  EXPECT_NEAR(enclosed_area(s), VertexPolygon(v).area(), 1e-14);
}

TEST(SideLengths, RandomStatesMatchBruteForce) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = random_state(5 + trial % 20, rng, isotropic_energy());
    const std::vector<double> d(s.support().begin(), s.support().end());
    const auto v = brute_vertices(d);
    const auto l = side_lengths(s);
    for (std::size_t i = 0; i < l.size(); ++i) EXPECT_NEAR(l[i], norm(v[(i + 1) % l.size()] - v[i]), 1e-12);
    EXPECT_NEAR(enclosed_area(s), VertexPolygon(v).area(), 1e-12);
  }
}

TEST(Curvatures, RegularPolygonsHaveUnitCurvature) {
  for (std::size_t n : {4u, 6u, 9u, 64u}) {
    for (double k : curvatures(regular(n))) EXPECT_NEAR(k, 1.0, 1e-13);
  }
  for (double k : curvatures(regular(8, 2.0))) EXPECT_NEAR(k, 0.5, 1e-14);
}

TEST(WeightedCurvatures, Examples) {
  for (double w : weighted_curvatures(regular(4))) EXPECT_NEAR(w, 1.0, 1e-15);
  const auto oct = regular(8, 1.0, cosine_energy(0.1, 2));
  const double g0 = 1.1 + (1.0 - 2.2 + 1.0) / (2.0 - std::numbers::sqrt2);
  EXPECT_NEAR(weighted_curvatures(oct)[0], g0, 1e-13);
  const auto rate = support_ode_rhs(oct);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(rate[i], -oct.aniso().g()[i], 1e-13);
}

TEST(SupportOde, SquareMovesAtUnitSpeed) {
  for (double r : support_ode_rhs(regular(4))) EXPECT_NEAR(r, -1.0, 1e-15);
}

TEST(OmegaOde, Examples) {
  const auto a4 = discretize(isotropic_energy(), 4);
  const auto r = omega_ode_rhs(std::vector<double>{1.0, 2.0, 1.0, 2.0}, *a4);
  EXPECT_NEAR(r[0], 2.0, 1e-14);
  EXPECT_NEAR(r[1], 4.0, 1e-14);
  EXPECT_NEAR(r[2], 2.0, 1e-14);
  EXPECT_NEAR(r[3], 4.0, 1e-14);
  const auto a7 = discretize(isotropic_energy(), 7);
  for (double v : omega_ode_rhs(std::vector<double>(7, 1.5), *a7)) EXPECT_NEAR(v, 1.5 * 1.5 * 1.5, 1e-13);
}

TEST(OmegaOde, MatchesDerivativeOfWeightedCurvatures) {
  std::mt19937_64 rng(3);
  const auto e = cosine_energy(0.1, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = smooth_state(12, rng, e);
    const double h = 1e-6;
    const PolygonState plus(s.aniso_ptr(), advanced(s, h));
    const PolygonState minus(s.aniso_ptr(), advanced(s, -h));
    const auto wp = weighted_curvatures(plus), wm = weighted_curvatures(minus);
    const auto rhs = omega_ode_rhs(weighted_curvatures(s), s.aniso());
    for (std::size_t i = 0; i < 12; ++i) EXPECT_NEAR((wp[i] - wm[i]) / (2.0 * h), rhs[i], 1e-6 * (1.0 + std::abs(rhs[i])));
  }
}

TEST(SideLengthRate, Examples) {
  const auto sq = side_length_rate(regular(4));
  for (double r : sq) EXPECT_NEAR(r, -2.0, 1e-14);
  EXPECT_NEAR(total_length_rate(regular(4)), -8.0, 1e-14);
  const std::size_t n = 10;
  const double dt = two_pi / n;
  for (double r : side_length_rate(regular(n, 0.5))) {
    EXPECT_NEAR(r, 2.0 * 2.0 * (std::cos(dt) / std::sin(dt) - 1.0 / std::sin(dt)), 1e-12);
  }
}

TEST(SideLengthRate, RandomStatesMatchFiniteDifferencesAndTotal) {
  std::mt19937_64 rng(5);
  const auto e = cosine_energy(0.1, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = smooth_state(12, rng, e);
    const auto rate = side_length_rate(s);
    double sum = 0.0;
    for (double r : rate) sum += r;
    EXPECT_NEAR(sum, total_length_rate(s), 1e-12);
    const double h = 1e-6;
    const auto lp = side_lengths_from_support(advanced(s, h), s.dtheta());
    const auto lm = side_lengths_from_support(advanced(s, -h), s.dtheta());
    for (std::size_t i = 0; i < 12; ++i) EXPECT_NEAR((lp[i] - lm[i]) / (2.0 * h), rate[i], 1e-7);
  }
}

TEST(Area, RegularPolygonsAndRate) {
  EXPECT_NEAR(enclosed_area(regular(4)), 4.0, 1e-14);
  EXPECT_NEAR(enclosed_area(regular(6)), 2.0 * std::sqrt(3.0), 1e-14);
  EXPECT_NEAR(area_rate(*discretize(isotropic_energy(), 4)), -8.0, 1e-14);
  EXPECT_NEAR(area_rate(*discretize(isotropic_energy(), 4096)), -two_pi, 1e-5);
  EXPECT_NEAR(extinction_time(regular(4)), 0.5, 1e-15);
  for (std::size_t n : {5u, 8u, 33u, 256u}) EXPECT_NEAR(extinction_time(regular(n, 1.0)), 0.5, 1e-12);
}

TEST(Area, AnisotropicRateTendsToMinusTwoPi) {
  const auto e = cosine_energy(0.1, 2);
  std::vector<double> gaps;
  for (std::size_t n : {16u, 32u, 64u}) gaps.push_back(std::abs(area_rate(*discretize(e, n)) + two_pi));
  EXPECT_NEAR(gaps[0] / gaps[1], 4.0, 0.1);
  EXPECT_NEAR(gaps[1] / gaps[2], 4.0, 0.1);
}

TEST(Area, RateIsMinusSumOmegaLAndMatchesFiniteDifference) {
  std::mt19937_64 rng(9);
  const auto e = cosine_energy(0.1, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = smooth_state(16, rng, e);
    const auto w = weighted_curvatures(s);
    const auto l = side_lengths(s);
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) sum += w[i] * l[i];
    EXPECT_NEAR(-sum, area_rate(s.aniso()), 1e-12);
    const double h = 1e-5;
    const double fd = (enclosed_area(PolygonState(s.aniso_ptr(), advanced(s, h))) -
                       enclosed_area(PolygonState(s.aniso_ptr(), advanced(s, -h)))) / (2.0 * h);
    EXPECT_NEAR(fd, area_rate(s.aniso()), 1e-8);
  }
}

TEST(Area, OriginOutsideRejected) {
  const PolygonState s(discretize(isotropic_energy(), 4), std::vector<double>{-0.1, 1.0, 1.0, 1.0});
  EXPECT_THROW(enclosed_area(s), OriginOutside);
}

TEST(MedianCurvature, Examples) {
  EXPECT_DOUBLE_EQ(median_weighted_curvature(std::vector<double>(6, 2.5)), 2.5);
  EXPECT_DOUBLE_EQ(median_weighted_curvature(std::vector<double>{1, 2, 3, 4}), 3.0);
  EXPECT_DOUBLE_EQ(median_weighted_curvature(std::vector<double>{5, 1, 2, 3, 4}), 4.0);
  EXPECT_THROW(median_weighted_curvature(std::vector<double>{1, 2, 3}), ValidationError);
}

TEST(MedianCurvature, BoundedByExtremes) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> w(4 + trial % 13);
    for (auto& v : w) v = u(rng);
    const double m = median_weighted_curvature(w);
    EXPECT_GE(m, *std::min_element(w.begin(), w.end()));
    EXPECT_LE(m, *std::max_element(w.begin(), w.end()));
  }
}

TEST(MidpointVelocity, Examples) {
  for (std::size_t i = 0; i < 6; ++i) {
    const auto v = midpoint_velocity(regular(6), i);
    const auto n = interior_normal(i, pi / 3.0);
    EXPECT_NEAR(v.x, n.x, 1e-14);
    EXPECT_NEAR(v.y, n.y, 1e-14);
  }
  // d = (0.5, 1, 0.5, 1) gives L = (2, 1, 2, 1) and omega = (1, 2, 1, 2).
  const PolygonState s(discretize(isotropic_energy(), 4), std::vector<double>{0.5, 1.0, 0.5, 1.0});
  const auto w = weighted_curvatures(s);
  EXPECT_NEAR(w[0], 1.0, 1e-15);
  EXPECT_NEAR(w[1], 2.0, 1e-15);
  const auto v = midpoint_velocity(s, 0);
  EXPECT_NEAR(v.x, -1.0, 1e-15);
  EXPECT_NEAR(v.y, 0.0, 1e-15);
  EXPECT_THROW(midpoint_velocity(s, 4), ValidationError);
}

TEST(MidpointVelocity, MatchesMotionOfSideMidpoints) {
  std::mt19937_64 rng(17);
  const auto e = cosine_energy(0.1, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = smooth_state(10, rng, e);
    const double h = 1e-6;
    const auto vp = brute_vertices(advanced(s, h));
    const auto vm = brute_vertices(advanced(s, -h));
    for (std::size_t i = 0; i < 10; ++i) {
      const Vec2 mp = 0.5 * (vp[i] + vp[(i + 1) % 10]);
      const Vec2 mm = 0.5 * (vm[i] + vm[(i + 1) % 10]);
      const Vec2 fd = (1.0 / (2.0 * h)) * (mp - mm);
      const Vec2 v = midpoint_velocity(s, i);
      EXPECT_NEAR(fd.x, v.x, 1e-7);
      EXPECT_NEAR(fd.y, v.y, 1e-7);
    }
  }
}

TEST(H1Functional, Examples) {
  EXPECT_NEAR(h1_functional(std::vector<double>{1, 2, 1, 2}, pi / 2.0), 4.0 * pi, 1e-13);
  EXPECT_NEAR(h1_functional(std::vector<double>(4, 3.0), pi / 2.0), 2.0 * pi * 9.0, 1e-13);
}

TEST(PolygonState, Validation) {
  const auto a = discretize(isotropic_energy(), 4);
  EXPECT_THROW(PolygonState(a, std::vector<double>(5, 1.0)), ValidationError);
  EXPECT_THROW(PolygonState(a, std::vector<double>{1.0, NAN, 1.0, 1.0}), ValidationError);
  EXPECT_THROW(PolygonState(a, std::vector<double>(4, 1.0), -1.0), ValidationError);
  // Side 1 has length d_0 + d_2 = 0.
  EXPECT_THROW(PolygonState(a, std::vector<double>{1.0, 1.0, -1.0, 1.0}), DegenerateInitialization);
  EXPECT_THROW(PolygonState(nullptr, std::vector<double>(4, 1.0)), ValidationError);
}

TEST(Evolve, SquareFollowsApothemLaw) {
  const auto traj = evolve(regular(4), 0.375);
  EXPECT_EQ(traj.final_state().time(), 0.375);
  for (double d : traj.final_state().support()) EXPECT_NEAR(d, 0.5, 1e-8);
  for (const auto& s : traj.states) {
    for (double d : s.support()) EXPECT_NEAR(d, std::sqrt(1.0 - 2.0 * s.time()), 1e-8);
  }
}

TEST(Evolve, LandsOnSampleTimes) {
  const std::vector<double> times{0.0, 0.05, 0.1, 0.2, 0.3};
  const auto traj = evolve(regular(8), 0.3, {}, times);
  for (double t : times) {
    const auto* s = traj.at_time(t);
    ASSERT_NE(s, nullptr) << t;
    EXPECT_NEAR(s->support(0), std::sqrt(1.0 - 2.0 * t), 1e-9);
  }
  EXPECT_EQ(traj.at_time(0.123456), nullptr);
  FlowSettings sparse;
  sparse.record_every_step = false;
  EXPECT_EQ(evolve(regular(8), 0.3, sparse, times).states.size(), times.size());
}

TEST(Evolve, RefusesToReachExtinction) {
  EXPECT_THROW(evolve(regular(4), 0.5), ValidationError);
  EXPECT_THROW(evolve(regular(4), 0.6), ValidationError);
  EXPECT_THROW(evolve(regular(4), 0.0), ValidationError);
  EXPECT_NO_THROW(evolve(regular(4), 0.49));
}

TEST(Evolve, VanishingSideCarriesLastState) {
  // Rectangle with sides 2, 4, 2, 4; the short sides shrink at rate 1.
  FlowSettings s;
  s.vanish_fraction = 0.99;
  const PolygonState rect(discretize(isotropic_energy(), 4), std::vector<double>{2.0, 1.0, 2.0, 1.0});
  try {
    evolve(rect, 0.5, s);
    FAIL() << "expected SideVanished";
  } catch (const SideVanished& e) {
    EXPECT_TRUE(e.side() == 0 || e.side() == 2);
    EXPECT_GT(e.time(), 0.0);
    ASSERT_EQ(e.last_state().size(), 4u);
    const auto l = side_lengths_from_support(e.last_state(), pi / 2.0);
    EXPECT_GT(l[e.side()], 0.99 * 2.0);
    EXPECT_LT(l[e.side()], 2.0);
  }
}

TEST(Evolve, RandomAnisotropicRunsKeepInvariants) {
  std::mt19937_64 rng(23);
  const auto e = cosine_energy(0.1, 2);
  for (int trial = 0; trial < 8; ++trial) {
    const auto s0 = smooth_state(8 + 4 * trial, rng, e);
    const auto traj = evolve(s0, 0.6 * extinction_time(s0));
    const auto inv = check_invariants(traj);
    EXPECT_LT(inv.area_drift, 1e-8);
    EXPECT_TRUE(inv.monotone(1e-10)) << inv.omega_min_decrease << ' ' << inv.length_increase << ' ' << inv.h1_decrease;
    EXPECT_TRUE(inv.convex);
    EXPECT_TRUE(inv.times_increasing);
    for (std::size_t k = 1; k < traj.monitors.size(); ++k) {
      EXPECT_LE(traj.monitors[k].omega_median, traj.monitors[k].omega_max);
      EXPECT_GE(traj.monitors[k].omega_median, traj.monitors[k].omega_min);
    }
  }
}

TEST(Evolve, DualRepresentationsAgree) {
  std::mt19937_64 rng(29);
  const auto s0 = smooth_state(16, rng, cosine_energy(0.1, 2));
  const double t_end = 0.5 * extinction_time(s0);
  const std::vector<double> times{0.25 * t_end, 0.5 * t_end, t_end};
  const auto traj = evolve(s0, t_end, {}, times);
  const auto snaps = evolve_weighted_curvatures(weighted_curvatures(s0), s0.aniso_ptr(), 0.0, times);
  ASSERT_EQ(snaps.size(), times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    EXPECT_EQ(snaps[k].time, times[k]);
    const auto w = weighted_curvatures(*traj.at_time(times[k]));
    for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(snaps[k].omega[i], w[i], 1e-7);
  }
}
