#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "crystalline/periodic.hpp"

using namespace crystalline;

TEST(Periodic, NeighbourIndicesWrap) {
  EXPECT_EQ(next_index(4, 5), 0u);
  EXPECT_EQ(prev_index(0, 5), 4u);
  EXPECT_EQ(next_index(2, 5), 3u);
  EXPECT_EQ(wrap_index(-1, 7), 6u);
  EXPECT_EQ(wrap_index(-15, 7), 6u);
  EXPECT_EQ(wrap_index(15, 7), 1u);
}

TEST(Periodic, WrapAngleRange) {
  for (double phi : {-10.0, -two_pi, -1e-18, 0.0, 1.0, two_pi, 3.0 * two_pi + 0.5}) {
    const double w = wrap_angle(phi);
    EXPECT_GE(w, 0.0);
    EXPECT_LT(w, two_pi);
    EXPECT_NEAR(std::cos(w), std::cos(phi), 1e-12);
    EXPECT_NEAR(std::sin(w), std::sin(phi), 1e-12);
  }
}

TEST(Periodic, SecondDifferenceWrapsAround) {
  const std::vector<double> v{1.0, 2.0, 1.0, 2.0};
  EXPECT_DOUBLE_EQ(second_difference(v, 0), 2.0);
  EXPECT_DOUBLE_EQ(second_difference(v, 1), -2.0);
  EXPECT_DOUBLE_EQ(second_difference(v, 3), -2.0);
}

TEST(Periodic, InterpolationExactAtNodes) {
  std::vector<double> v(32);
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = std::exp(std::sin(two_pi * j / 32.0));
  for (std::size_t j = 0; j < v.size(); ++j) EXPECT_EQ(interpolate_periodic(v, two_pi * j / 32.0), v[j]);
}

TEST(Periodic, InterpolationIsFourthOrder) {
  auto fn = [](double x) { return std::exp(std::cos(x)) + std::sin(3.0 * x); };
  auto max_error = [&](std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = fn(two_pi * static_cast<double>(j) / static_cast<double>(n));
    double worst = 0.0;
    for (int k = 0; k < 997; ++k) {
      const double x = two_pi * (k + 0.37) / 997.0;
      worst = std::max(worst, std::abs(interpolate_periodic(v, x) - fn(x)));
    }
    return worst;
  };
  const double e1 = max_error(64), e2 = max_error(128), e3 = max_error(256);
  EXPECT_GT(e1 / e2, 12.0);
  EXPECT_GT(e2 / e3, 12.0);
  EXPECT_LT(e3, 1e-6);
}
