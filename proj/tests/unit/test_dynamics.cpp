#include <gtest/gtest.h>

#include <cmath>

#include "dynamics.hpp"
#include "error.hpp"
#include "quadrature.hpp"

using namespace pol;

TEST(Translation, PreimagesAndInflate) {
  auto t = make_translation(1.0);
  auto p = t->preimages(5.0);
  ASSERT_EQ(p.count, 1);
  EXPECT_DOUBLE_EQ(p.items[0].y, 4.0);
  EXPECT_DOUBLE_EQ(p.items[0].inv_jacobian, 1.0);
  EXPECT_EQ(t->backward_inflate(Window::interval(0.0, 1.0), 3), Window::interval(-3.0, 1.0));
}

TEST(Translation, TransferIsInverseComposition) {
  auto t = make_translation(0.5);
  auto f = triangular_bump(0.0, 1.0);
  for (long n : {1L, 3L}) {
    auto g = transfer_apply(f, t, n);
    for (double x : {0.2, 1.6, 2.1}) EXPECT_DOUBLE_EQ(g(x), f(x - 0.5 * static_cast<double>(n)));
  }
}

TEST(Boole, PreimagesOfZero) {
  auto b = make_boole();
  auto p = b->preimages(0.0);
  ASSERT_EQ(p.count, 2);
  double lo = std::min(p.items[0].y, p.items[1].y);
  double hi = std::max(p.items[0].y, p.items[1].y);
  EXPECT_NEAR(lo, -1.0, 1e-15);
  EXPECT_NEAR(hi, 1.0, 1e-15);
  EXPECT_NEAR(p.items[0].inv_jacobian, 0.5, 1e-15);
  EXPECT_NEAR(p.items[1].inv_jacobian, 0.5, 1e-15);
}

TEST(Boole, InverseJacobiansSumToOne) {
  auto b = make_boole();
  for (double x : {3.7, -12.0, 0.01, 1e6}) {
    auto p = b->preimages(x);
    double s = 0.0;
    for (const auto& q : p.view()) {
      EXPECT_NEAR(b->forward(q.y), x, 1e-9 * std::max(1.0, std::abs(x)));
      s += q.inv_jacobian;
    }
    EXPECT_NEAR(s, 1.0, 1e-12) << x;
  }
  EXPECT_DOUBLE_EQ(b->forward(2.0), 1.5);
}

TEST(Boole, PullbackPreservesMeasure) {
  auto b = make_boole();
  Window w({{1.0, 2.0}, {-3.0, -2.5}});
  EXPECT_NEAR(b->pullback(w).measure(), w.measure(), 1e-12);
}

TEST(Boole, TransferOfConstantIsConstant) {
  auto b = make_boole();
  auto f = indicator(Window::interval(-1e6, 1e6));
  auto g = transfer_apply(f, b, 1);
  for (double x : {-3.0, 0.0, 0.4, 10.0}) EXPECT_NEAR(g(x), 1.0, 1e-9);
}

TEST(Boole, TransferConservesMass) {
  auto b = make_boole();
  auto f = indicator(Window::interval(1.0, 2.0));
  for (long n : {1L, 3L, 6L}) {
    auto g = transfer_apply(f, b, n);
    QuadResult q = g.exact_support() ? integrate_window(g.eval, g.support, 1e-9, g.breaks)
                                     : integrate_line(g.eval, 1e-9, g.breaks);
    EXPECT_NEAR(q.value, 1.0, 1e-6) << n;
  }
}

TEST(Boole, TransferDepthLimit) {
  auto b = make_boole();
  EXPECT_THROW(transfer_apply(indicator(Window::interval(1.0, 2.0)), b, kBooleMaxTransferDepth + 1), Error);
}

TEST(Composite, RotationAndInvariance) {
  auto c = make_composite(0.3, 1.0);
  EXPECT_NEAR(c->forward(0.9), 0.2, 1e-15);
  auto f = indicator(composite_circle());
  auto g = compose(f, c, 1);
  auto avg = birkhoff(f, c, 7);
  for (double x : {0.05, 0.5, 0.95, 1.5, -2.3}) {
    EXPECT_EQ(g(x), f(x));
    EXPECT_NEAR(avg(x), f(x), 1e-15);
  }
}

TEST(Birkhoff, TranslationAverage) {
  auto t = make_translation(1.0);
  auto f = indicator(Window::interval(0.0, 1.0));
  auto g = birkhoff(f, t, 2);
  EXPECT_DOUBLE_EQ(g(-1.5), 0.5);
  EXPECT_DOUBLE_EQ(g(-0.5), 0.5);
  EXPECT_DOUBLE_EQ(g(0.5), 0.0);
  EXPECT_NEAR(g.support.measure(), 2.0, 1e-15);
  auto g1 = birkhoff(f, t, 1);
  auto ft = compose(f, t, 1);
  for (double x : {-0.5, 0.5}) EXPECT_EQ(g1(x), ft(x));
}

TEST(Birkhoff, AlongRequiresIncreasingTimes) {
  auto t = make_translation(1.0);
  auto f = indicator(Window::interval(0.0, 1.0));
  std::vector<long> bad = {1, 1, 2};
  EXPECT_THROW(birkhoff_along(f, t, bad), Error);
  std::vector<long> sq = {1, 4, 9};
  auto g = birkhoff_along(f, t, sq);
  EXPECT_NEAR(g(-3.5), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(g(-1.5), 0.0, 1e-15);
}
