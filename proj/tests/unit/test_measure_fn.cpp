#include <gtest/gtest.h>

#include <cmath>

#include "measure_fn.hpp"
#include "orlicz.hpp"
#include "quadrature.hpp"

using namespace pol;

TEST(Window, DisjointPiecesKeepTheirMeasure) {
  Window w({{0.0, 1.0}, {2.0, 3.0}});
  EXPECT_EQ(w.intervals().size(), 2u);
  EXPECT_DOUBLE_EQ(w.measure(), 2.0);
}

TEST(Window, OverlapsMerge) {
  Window w({{0.0, 2.0}, {1.0, 3.0}});
  ASSERT_EQ(w.intervals().size(), 1u);
  EXPECT_EQ(w.intervals()[0], (Interval{0.0, 3.0}));
  EXPECT_DOUBLE_EQ(w.measure(), 3.0);
}

TEST(Window, EmptyIsUnionIdentity) {
  Window u = Window().united(Window::interval(0.0, 1.0));
  EXPECT_EQ(u, Window::interval(0.0, 1.0));
}

TEST(Window, LocateMapsUniformsAcrossPieces) {
  Window w({{0.0, 1.0}, {5.0, 6.0}});
  EXPECT_DOUBLE_EQ(w.locate(0.25), 0.5);
  EXPECT_DOUBLE_EQ(w.locate(0.75), 5.5);
  EXPECT_TRUE(w.contains(Window::interval(5.2, 5.8)));
  EXPECT_FALSE(w.contains(3.0));
}

TEST(Quadrature, IndicatorIntegral) {
  auto f = indicator(Window::interval(0.0, 1.0));
  auto r = integrate(f, Window::interval(-2.0, 2.0), [](double v) { return v; }, 1e-10);
  EXPECT_NEAR(r.value, 1.0, 1e-10);
}

TEST(Quadrature, PhiOfUnitIndicator) {
  auto f = indicator(Window::interval(0.0, 3.0));
  auto r = integrate(f, Window::interval(0.0, 3.0), young_phi, 1e-10, std::array{kPhiKink});
  EXPECT_NEAR(r.value, 3.0, 1e-10);
}

TEST(Quadrature, SquareOfIdentity) {
  TestFunction f;
  f.eval = [](double x) { return x >= 0.0 && x <= 1.0 ? x : 0.0; };
  f.support = Window::interval(0.0, 1.0);
  auto r = integrate(f, f.support, [](double v) { return v * v; }, 1e-12);
  EXPECT_NEAR(r.value, 1.0 / 3.0, 1e-12);
  EXPECT_LE(r.err_bound, 1e-12);
}

TEST(Quadrature, WholeLineGaussian) {
  auto r = integrate_line([](double x) { return std::exp(-x * x); }, 1e-10);
  EXPECT_NEAR(r.value, std::sqrt(M_PI), 1e-9);
}

TEST(SimpleFunction, Moments) {
  auto m = simple_moments(SimpleFunction({{1.0, 0.5}, {-1.0, 0.5}}));
  EXPECT_DOUBLE_EQ(m.l1, 1.0);
  EXPECT_DOUBLE_EQ(m.l2sq, 1.0);
  EXPECT_DOUBLE_EQ(m.integral, 0.0);
  m = simple_moments(SimpleFunction({{2.0, 1.0}}));
  EXPECT_DOUBLE_EQ(m.l1, 2.0);
  EXPECT_DOUBLE_EQ(m.l2sq, 4.0);
  EXPECT_DOUBLE_EQ(m.integral, 2.0);
  m = simple_moments(SimpleFunction{});
  EXPECT_DOUBLE_EQ(m.l1 + m.l2sq + m.integral, 0.0);
}

TEST(SimpleFunction, RealizeLaysAtomsOut) {
  SimpleFunction s({{2.0, 0.5}, {-1.0, 1.5}});
  auto f = s.realize(1.0);
  EXPECT_DOUBLE_EQ(f(1.2), 2.0);
  EXPECT_DOUBLE_EQ(f(2.0), -1.0);
  EXPECT_DOUBLE_EQ(f(3.5), 0.0);
  EXPECT_DOUBLE_EQ(f.support.measure(), 2.0);
}

TEST(SimpleFunction, PartsAndScaling) {
  SimpleFunction s({{2.0, 0.5}, {-1.0, 1.5}});
  EXPECT_EQ(s.positive_part().size(), 1u);
  EXPECT_EQ(s.negative_part().atoms()[0].value, 1.0);
  EXPECT_EQ(s.scaled(-3.0).atoms()[0].value, -6.0);
  EXPECT_TRUE(s.scaled(0.0).empty());
}

TEST(TestFunctionAlgebra, SumAndDifference) {
  auto a = indicator(Window::interval(0.0, 1.0), 2.0);
  auto b = triangular_bump(0.0, 2.0, 1.0);
  auto s = a + b;
  auto d = a - b;
  EXPECT_DOUBLE_EQ(s(0.5), 2.5);
  EXPECT_DOUBLE_EQ(d(1.0), 1.0);
  EXPECT_DOUBLE_EQ(s.support.measure(), 2.0);
  EXPECT_DOUBLE_EQ(absolute(scaled(b, -2.0))(1.0), 2.0);
}
