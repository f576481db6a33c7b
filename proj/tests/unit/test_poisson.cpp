#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "dynamics.hpp"
#include "error.hpp"
#include "poisson.hpp"

using namespace pol;

namespace {

struct Frozen {
  SimpleFunction f;
  double star;      // E|sum v (N - m)|
  double starstar;  // E|sum v N|
};

// Values from an independent dense joint-pmf summation (numpy/scipy, per-atom cutoff m + 20 sqrt(m) + 40).
const std::vector<Frozen>& panel() {
  static const std::vector<Frozen> p = {
      {SimpleFunction({{1, 1}}), 0.7357588823428847, 1.0},
      {SimpleFunction({{-1, 0.5}}), 0.6065306597126334, 0.5},
      {SimpleFunction({{1, 1}, {-1, 1}}), 1.0475552236052175, 1.0475552236052175},
      {SimpleFunction({{2, 0.3}, {-0.5, 2}}), 0.9765306369973602, 1.098345987217848},
      {SimpleFunction({{1, 3}, {0.5, 2}, {-2, 0.7}}), 1.9716175003908507, 3.0174454355664184},
      {SimpleFunction({{5, 0.01}}), 0.09900498337491684, 0.05},
      {SimpleFunction({{0.1, 10}}), 0.2502200714422671, 1.0},
      {SimpleFunction({{3, 0.2}, {-3, 0.2}, {1, 1.5}}), 1.7053210980211937, 2.0716957179620885},
      {SimpleFunction({{1.5, 4}, {-0.25, 6}}), 2.43968702186501, 4.591323564601714},
      {SimpleFunction({{-4, 0.05}, {2, 0.1}, {0.7, 2.5}, {-1.2, 1}}), 1.5066305576984274, 1.5989670859504848},
  };
  return p;
}

// Direct double sum over (N1, N2) for two-atom functions.
double two_atom_bruteforce(double v1, double m1, double v2, double m2) {
  double total = 0.0;
  double p1 = std::exp(-m1);
  for (int a = 0; a < 80; ++a) {
    double p2 = std::exp(-m2);
    for (int b = 0; b < 80; ++b) {
      total += p1 * p2 * std::abs(v1 * (a - m1) + v2 * (b - m2));
      p2 *= m2 / (b + 1);
    }
    p1 *= m1 / (a + 1);
  }
  return total;
}

}  // namespace

TEST(Sampling, MeanCountOnUnitWindow) {
  const Window w = Window::interval(0.0, 1.0);
  double total = 0.0;
  const int R = 100000;
  for (int r = 0; r < R; ++r) total += static_cast<double>(sample_process(w, 42, r).points.size());
  EXPECT_NEAR(total / R, 1.0, 3.0 * std::pow(10.0, -2.5));
}

TEST(Sampling, EmptyWindowHasNoPoints) {
  for (int r = 0; r < 100; ++r) EXPECT_TRUE(sample_process(Window(), 1, r).points.empty());
}

TEST(Sampling, PointsStayInWindow) {
  const Window w({{0.0, 2.0}, {5.0, 6.0}});
  for (int r = 0; r < 1000; ++r)
    for (double x : sample_process(w, 3, r).points) ASSERT_TRUE(w.contains(x));
}

TEST(Sampling, LargeMeanCounts) {
  StreamRng rng(11, 0);
  double total = 0.0;
  for (int i = 0; i < 2000; ++i) total += static_cast<double>(sample_poisson_count(1000.0, rng));
  EXPECT_NEAR(total / 2000, 1000.0, 5.0 * std::sqrt(1000.0 / 2000));
}

TEST(Integral, CountMinusMeasure) {
  PoissonSample s{Window::interval(0.0, 2.0), {0.3, 0.7, 1.8}};
  auto f = indicator(Window::interval(0.0, 1.0));
  EXPECT_DOUBLE_EQ(integral_centered(f, s, compensator(f, s.window)), 1.0);
  PoissonSample empty{Window::interval(0.0, 2.0), {}};
  EXPECT_DOUBLE_EQ(integral_centered(f, empty, 1.0), -1.0);
  EXPECT_DOUBLE_EQ(integral_centered(zero_function(), s, 0.0), 0.0);
}

TEST(ExactOracle, FrozenPanel) {
  for (const auto& p : panel()) {
    EXPECT_NEAR(star_norm_exact(p.f), p.star, 1e-12);
    EXPECT_NEAR(starstar_norm_exact(p.f), p.starstar, 1e-12);
  }
}

TEST(ExactOracle, IndicatorFamily) {
  for (int n : {2, 3, 5, 10}) {
    double c = 1.0 / n;
    EXPECT_NEAR(star_norm_exact(SimpleFunction({{-1.0, c}})), 2.0 * c * std::exp(-c), 1e-12);
  }
  EXPECT_NEAR(star_norm_exact(SimpleFunction({{-1.0, 1.0 / 3.0}})), 0.4776875, 1e-7);
}

TEST(ExactOracle, SignSymmetry) {
  for (double c : {0.3, 1.0, 4.5})
    EXPECT_NEAR(star_norm_exact(SimpleFunction({{1.0, c}})), star_norm_exact(SimpleFunction({{-1.0, c}})), 1e-14);
}

TEST(ExactOracle, TwoAtomBruteForce) {
  EXPECT_NEAR(star_norm_exact(SimpleFunction({{1.0, 0.25}, {-1.0, 0.25}})),
              two_atom_bruteforce(1.0, 0.25, -1.0, 0.25), 1e-12);
  EXPECT_NEAR(star_norm_exact(SimpleFunction({{0.3, 2.5}, {-1.7, 0.8}})),
              two_atom_bruteforce(0.3, 2.5, -1.7, 0.8), 1e-12);
}

TEST(ExactOracle, EqualValuesMerge) {
  EXPECT_NEAR(star_norm_exact(SimpleFunction({{1.0, 0.4}, {1.0, 0.6}})), 2.0 / std::exp(1.0), 1e-12);
}

TEST(ExactOracle, RefusesOversizedInputs) {
  std::vector<Atom> many;
  for (int i = 0; i < 7; ++i) many.push_back({1.0 + i, 0.1});
  try {
    star_norm_exact(SimpleFunction(many));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::limit_exceeded);
  }
  EXPECT_THROW(star_norm_exact(SimpleFunction({{1.0, 31.0}})), Error);
}

TEST(Hsu, AgreesWithExact) {
  for (const auto& p : panel()) {
    auto h = star_norm_hsu(p.f, 1e-6);
    EXPECT_NEAR(h.value, p.star, 1e-6);
    EXPECT_LE(h.err, 1e-6);
  }
}

TEST(Hsu, SkellamQuarter) {
  SimpleFunction f({{1.0, 0.25}, {-1.0, 0.25}});
  EXPECT_NEAR(star_norm_hsu(f, 1e-6).value, star_norm_exact(f), 1e-6 + kDefaultTailEps);
}

TEST(Hsu, TestFunctionPath) {
  auto h = star_norm_hsu(indicator(Window::interval(0.0, 0.5), -1.0), 1e-6);
  EXPECT_TRUE(h.discretized);
  EXPECT_NEAR(h.value, std::exp(-0.5), 1e-5);
}

TEST(MonteCarlo, HalfIndicator) {
  auto f = indicator(Window::interval(0.0, 0.5), -1.0);
  auto e = estimate_star_norm(f, f.support, 100000, 42);
  EXPECT_NEAR(e.mean, std::exp(-0.5), 3.0 * e.std_error);
  EXPECT_EQ(e.replicates, 100000u);
}

TEST(MonteCarlo, ZeroFunctionHasZeroVariance) {
  auto e = estimate_star_norm(zero_function(), Window::interval(0.0, 1.0), 1000, 1);
  EXPECT_EQ(e.mean, 0.0);
  EXPECT_EQ(e.std_error, 0.0);
}

TEST(MonteCarlo, SkellamBelowL1) {
  SimpleFunction s({{1.0, 0.25}, {-1.0, 0.25}});
  auto f = s.realize();
  auto e = estimate_star_norm(f, f.support, 100000, 7);
  EXPECT_LE(e.mean, 0.5 + 3.0 * e.std_error);
  EXPECT_NEAR(e.mean, star_norm_exact(s), 3.0 * e.std_error);
}

TEST(MonteCarlo, TooFewReplicatesRejected) {
  auto f = indicator(Window::interval(0.0, 1.0));
  EXPECT_THROW(estimate_star_norm(f, f.support, 10, 1), Error);
}

TEST(MonteCarlo, TruncationBoundCoversMissedSupport) {
  auto f = indicator(Window::interval(0.0, 2.0));
  auto e = estimate_star_norm(f, Window::interval(0.0, 1.0), 20000, 1);
  EXPECT_GT(e.truncation_bound, 0.0);
  EXPECT_NEAR(e.mean, star_norm_exact(SimpleFunction({{1.0, 2.0}})), 3.0 * e.std_error + e.truncation_bound);
}

TEST(StarStar, NonnegativeEqualsL1) {
  auto f = indicator(Window::interval(0.0, 0.7));
  auto e = estimate_starstar_norm(f, f.support, 100000, 42);
  EXPECT_NEAR(e.mean, 0.7, 3.0 * e.std_error);
  EXPECT_EQ(estimate_starstar_norm(zero_function(), Window::interval(0.0, 1.0), 1000, 1).mean, 0.0);
}

TEST(StarStar, ZeroIntegralMatchesStar) {
  auto f = SimpleFunction({{2.0, 0.5}, {-1.0, 1.0}}).realize();
  auto a = estimate_starstar_norm(f, f.support, 100000, 5);
  auto b = estimate_star_norm(f, f.support, 100000, 5);
  EXPECT_NEAR(a.mean, b.mean, 3.0 * std::hypot(a.std_error, b.std_error));
}

TEST(Mecke, ConstantAndCampbell) {
  const Window w = Window::interval(0.0, 3.0);
  auto one = mecke_check({[](double, std::span<const double>) { return 1.0; }, {}}, w, 20000, 1);
  EXPECT_NEAR(one.rhs.mean, 3.0, 1e-9);
  EXPECT_NEAR(one.diff.mean, 0.0, 3.0 * one.diff.std_error);
  auto g = triangular_bump(0.0, 2.0);
  auto camp = mecke_check({[&g](double x, std::span<const double>) { return g(x); }, g.breaks}, w, 20000, 2);
  EXPECT_NEAR(camp.rhs.mean, 1.0, 1e-8);
  EXPECT_NEAR(camp.lhs.mean, 1.0, 3.0 * camp.lhs.std_error);
}

TEST(Difference, ExactlyFx) {
  auto f = indicator(Window::interval(0.0, 1.0));
  const Window w = Window::interval(0.0, 2.0);
  for (int r = 0; r < 200; ++r) {
    auto s = sample_process(w, 4, r);
    auto a = difference_check(f, s, 0.5, 1.0);
    EXPECT_EQ(a.observed, 1.0);
    EXPECT_EQ(a.observed, a.expected);
    auto b = difference_check(f, s, 1.5, 1.0);
    EXPECT_EQ(b.observed, 0.0);
  }
}

TEST(SecondMoment, Isometry) {
  auto a = second_moment_check(indicator(Window::interval(0.0, 2.0)), Window::interval(0.0, 2.0), 100000, 3);
  EXPECT_NEAR(a.sample_var.mean, 2.0, 3.0 * a.sample_var.std_error);
  auto f = SimpleFunction({{1.0, 1.0}, {-2.0, 0.5}}).realize();
  auto b = second_moment_check(f, f.support, 100000, 4);
  EXPECT_NEAR(b.l2sq, 3.0, 1e-10);
  EXPECT_NEAR(b.sample_var.mean, 3.0, 3.0 * b.sample_var.std_error);
  auto z = second_moment_check(zero_function(), Window::interval(0.0, 1.0), 1000, 4);
  EXPECT_EQ(z.sample_var.mean, 0.0);
}

TEST(ReducedMoment, SameAndDisjoint) {
  auto a = indicator(Window::interval(0.0, 1.0));
  auto b = indicator(Window::interval(2.0, 3.0));
  auto same = reduced_moment_check(a, a, Window::interval(0.0, 3.0), 100000, 5);
  EXPECT_NEAR(same.lhs.mean, 1.0, 3.0 * same.lhs.std_error);
  auto dis = reduced_moment_check(a, b, Window::interval(0.0, 3.0), 100000, 6);
  EXPECT_NEAR(dis.rhs, 1.0, 1e-10);
  EXPECT_NEAR(dis.lhs.mean, 1.0, 3.0 * dis.lhs.std_error);
  auto z = reduced_moment_check(zero_function(), a, Window::interval(0.0, 3.0), 1000, 6);
  EXPECT_EQ(z.lhs.mean, 0.0);
}

TEST(Equivariance, TranslationIsExact) {
  auto t = make_translation(1.0);
  auto f = indicator(Window::interval(0.0, 1.0));
  for (int r = 0; r < 200; ++r) {
    auto s = sample_process(Window::interval(-1.0, 1.0), 8, r);
    auto p = equivariance_check(f, *t, s);
    EXPECT_NEAR(p.lhs, p.rhs, p.tolerance);
    auto c = coboundary_check(f, *t, s);
    EXPECT_NEAR(c.lhs, c.rhs, c.tolerance);
  }
}

TEST(Equivariance, BooleWithinQuadrature) {
  auto b = make_boole();
  auto f = indicator(Window::interval(-1.0, 1.0));
  Window w = b->pullback(f.support).united(f.support);
  for (int r = 0; r < 200; ++r) {
    auto s = sample_process(w, 9, r);
    auto p = equivariance_check(f, *b, s);
    EXPECT_LE(std::abs(p.lhs - p.rhs), p.tolerance);
    auto c = coboundary_check(f, *b, s);
    EXPECT_LE(std::abs(c.lhs - c.rhs), c.tolerance);
  }
}

TEST(Equivariance, WindowPreconditionEnforced) {
  auto t = make_translation(1.0);
  auto f = indicator(Window::interval(0.0, 1.0));
  auto s = sample_process(Window::interval(0.0, 1.0), 1, 0);
  try {
    equivariance_check(f, *t, s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::precondition);
  }
}
