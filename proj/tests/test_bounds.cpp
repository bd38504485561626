#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "test_util.hpp"

using namespace mcs;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

BoundParams circle_params() {
  BoundParams p;
  p.d = 1;
  p.V = kTwoPi;
  p.reach = 1;
  return p;
}

BoundParams table_params() {
  BoundParams p;
  p.d = 2;
  p.eps = 0.5;
  p.J = 5;
  p.V = 10;
  p.D = 100;
  p.reach = 1;
  return p;
}

}  // namespace

TEST(CoverBound, CircleValues) {
  // 2 pi 1.5^1.5 / (2^0.5 delta), evaluated by hand to 16 digits
  EXPECT_NEAR(cover_bound(circle_params(), 0.1), 81.62097139053980, 1e-11);
  EXPECT_NEAR(cover_bound(circle_params(), 1.0 - 1e-12), 8.162097139053980, 1e-10);
}

TEST(CoverBound, TwoSphere) {
  BoundParams p;
  p.d = 2;
  p.V = 4 * std::numbers::pi;
  // V 2^2 / (2 delta^2)
  EXPECT_NEAR(cover_bound(p, 0.05), 4 * std::numbers::pi * 4.0 / (2.0 * 0.0025), 1e-8);
}

TEST(CoverBound, Errors) {
  EXPECT_THROW(cover_bound(circle_params(), 1.0), std::invalid_argument);
  EXPECT_THROW(cover_bound(circle_params(), 1.5), std::invalid_argument);
  EXPECT_THROW(cover_bound(circle_params(), 0.0), std::invalid_argument);
  auto p = circle_params();
  p.d = 0;
  EXPECT_THROW(cover_bound(p, 0.1), std::invalid_argument);
}

TEST(CoverBound, DominatesGreedyCovers) {
  const auto circle = gen_sphere(4000, 1, 2);
  const auto sphere = gen_sphere(4000, 2, 3);
  BoundParams s;
  s.d = 2;
  s.V = 4 * std::numbers::pi;
  for (double f : {0.05, 0.1, 0.2, 0.4, 0.8}) {
    EXPECT_LE(greedy_delta_cover(circle, f).center_indices.size(), cover_bound(circle_params(), f)) << f;
    EXPECT_LE(greedy_delta_cover(sphere, f).center_indices.size(), cover_bound(s, f)) << f;
  }
}

TEST(CenterCountBound, ValueAndExponent) {
  auto p = circle_params();
  p.C1 = 1;
  EXPECT_NEAR(center_count_bound(p, 0), 32.64838855621592, 1e-11);
  for (int d = 1; d <= 3; ++d) {
    p.d = d;
    for (int j = 0; j < 6; ++j) EXPECT_NEAR(center_count_bound(p, j + 1) / center_count_bound(p, j), std::pow(2.0, d), 1e-9);
  }
}

TEST(CenterCountBound, DominatesBuiltCircleDictionary) {
  const auto dict = mcs::testing::circle_dictionary(512, 6);
  auto p = circle_params();
  p.C1 = dict.sep_constant();
  int valid = 0;
  for (int j = 0; j <= dict.max_scale(); ++j) {
    if (!center_count_bound_valid(p, j)) continue;
    ++valid;
    EXPECT_LE(static_cast<double>(dict.size(j)), center_count_bound(p, j)) << "scale " << j;
  }
  EXPECT_GE(valid, 4);
}

TEST(MNonuniform, TableValue) {
  EXPECT_EQ(m_nonuniform(table_params()), 61);
  EXPECT_NEAR(m_nonuniform_value(table_params()), 8 * (5 + std::log(4.0)) + 4 * std::log(10.0), 1e-12);
}

TEST(MNonuniform, EpsScalingAndIndependenceOfD) {
  auto p = table_params();
  p.V = 1;  // isolates the leading term
  p.J = 5;
  const double full = m_nonuniform_value(p);
  p.eps = 0.25;
  // leading term d eps^-2 (J + ln(d/eps)): J part scales by exactly 4
  const double quartered = m_nonuniform_value(p);
  EXPECT_NEAR(quartered / full, 4.0 * (5 + std::log(8.0)) / (5 + std::log(4.0)), 1e-12);
  auto q = table_params();
  const auto base = m_nonuniform(q);
  for (double D : {3.0, 1e3, 1e9}) {
    q.D = D;
    EXPECT_EQ(m_nonuniform(q), base);
  }
}

TEST(MNonuniform, JlCircleSizing) {
  BoundParams p = circle_params();
  p.eps = 0.3;
  p.J = 5;
  p.big_o_constant = 8;
  EXPECT_EQ(m_nonuniform(p), 715);
}

TEST(MUniform, TableValueAndGrowth) {
  EXPECT_EQ(m_uniform(table_params()), 92);
  auto p = table_params();
  const double a = m_uniform_value(p);
  p.D = 100 * std::exp(1.0);
  // one extra unit of ln D adds d eps^-2 = 8
  EXPECT_NEAR(m_uniform_value(p) - a, 8.0, 1e-10);
}

TEST(MUniform, DominatesNonuniformWhenDLarge) {
  for (int d = 1; d <= 4; ++d)
    for (double eps : {0.1, 0.25, 0.4})
      for (double D : {5.0, 50.0, 5000.0}) {
        BoundParams p;
        p.d = d;
        p.eps = eps;
        p.D = D;
        p.J = 3;
        p.V = 7;
        p.reach = 0.5;
        if (D / (eps * p.reach) >= d / eps) {
          EXPECT_GE(m_uniform_value(p), m_nonuniform_value(p));
        }
      }
}

TEST(Bounds, MonotoneOnGrids) {
  for (int d = 1; d <= 3; ++d) {
    for (double V : {1.0, 3.0, 30.0}) {
      BoundParams p;
      p.d = d;
      p.V = V;
      p.reach = 2;
      p.D = 50;
      double prev = 0;
      for (int J = 0; J <= 8; ++J) {
        p.J = J;
        EXPECT_GE(m_nonuniform_value(p), prev);
        prev = m_nonuniform_value(p);
        BoundParams q = p;
        q.V = V * 2;
        EXPECT_GE(m_nonuniform_value(q), m_nonuniform_value(p));
        EXPECT_GE(m_uniform_value(q), m_uniform_value(p));
        EXPECT_GE(center_count_bound(q, J), center_count_bound(p, J));
      }
      double last_m = 1e300, last_u = 1e300;
      for (double eps : {0.05, 0.1, 0.2, 0.3, 0.45}) {
        p.eps = eps;
        EXPECT_LE(m_nonuniform_value(p), last_m);
        EXPECT_LE(m_uniform_value(p), last_u);
        last_m = m_nonuniform_value(p);
        last_u = m_uniform_value(p);
      }
      double last_c = 1e300;
      for (double delta : {0.01, 0.1, 0.5, 1.0, 1.9}) {
        EXPECT_LE(cover_bound(p, delta), last_c);
        last_c = cover_bound(p, delta);
      }
    }
  }
}

TEST(Bounds, PrecisionForms) {
  auto p = table_params();
  // c (d ln(D / (delta reach)) + ln V)
  EXPECT_EQ(m_uniform_precision(p, 0.5), static_cast<long long>(std::ceil(2 * std::log(200.0) + std::log(10.0))));
  EXPECT_EQ(m_nonuniform_precision(p, 0.5), static_cast<long long>(std::ceil(2 * std::log(4.0) + std::log(10.0))));
  EXPECT_THROW(m_uniform_precision(p, 0.0), std::invalid_argument);
}

TEST(Bounds, JlRows) {
  EXPECT_EQ(m_jl(100, 0.3), 410);
  EXPECT_EQ(m_jl(100, 0.3, 2), 103);
  EXPECT_THROW(m_jl(0.5, 0.3), std::invalid_argument);
  EXPECT_THROW(m_jl(100, 1.0), std::invalid_argument);
}

TEST(Bounds, InvalidParams) {
  auto p = table_params();
  p.eps = 0.6;
  EXPECT_THROW(m_nonuniform(p), std::invalid_argument);
  p.eps = 0.0;
  EXPECT_THROW(m_nonuniform(p), std::invalid_argument);
  p = table_params();
  p.J = -1;
  EXPECT_THROW(m_uniform(p), std::invalid_argument);
  p = table_params();
  p.V = 0;
  EXPECT_THROW(m_nonuniform(p), std::invalid_argument);
}
