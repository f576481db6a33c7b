#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "exact_sum.hpp"
#include "parallel.hpp"
#include "rng.hpp"

using namespace pol;

// Known-answer vectors published with Random123 for philox4x32-10.
TEST(Philox, KnownAnswerZero) {
  auto out = philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerOnes) {
  auto out = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out, (std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPi) {
  auto out = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out, (std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(StreamRng, StreamsAreReproducibleAndDistinct) {
  StreamRng a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  for (int i = 0; i < 100; ++i) {
    auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
    EXPECT_NE(x, d.next_u64());
  }
}

TEST(StreamRng, UniformMoments) {
  StreamRng r(1, 0);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(sq / n, 1.0 / 3.0, 5e-3);
}

TEST(ExactSum, CancelsCatastrophically) {
  ExactSum s;
  for (double x : {1e100, 1.0, -1e100, 1e-30}) s.add(x);
  EXPECT_EQ(s.value(), 1.0 + 1e-30);
}

TEST(ExactSum, OrderIndependent) {
  std::vector<double> xs;
  StreamRng r(5, 0);
  for (int i = 0; i < 1000; ++i) xs.push_back((r.uniform() - 0.5) * std::pow(10.0, 20.0 * r.uniform()));
  ExactSum fwd, bwd;
  for (double x : xs) fwd.add(x);
  for (auto it = xs.rbegin(); it != xs.rend(); ++it) bwd.add(*it);
  EXPECT_EQ(fwd.value(), bwd.value());
}

TEST(ExactSum, CorrectlyRoundsTenths) {
  ExactSum s;
  for (int i = 0; i < 10; ++i) s.add(0.1);
  EXPECT_EQ(s.value(), 1.0);
}

TEST(ParallelMap, IndependentOfThreadCount) {
  auto fn = [](std::size_t i) {
    StreamRng r(9, i);
    return r.uniform();
  };
  set_thread_count(1);
  auto one = parallel_map<double>(5000, fn);
  set_thread_count(4);
  auto four = parallel_map<double>(5000, fn);
  set_thread_count(0);
  EXPECT_EQ(one, four);
}

TEST(ParallelMap, PropagatesExceptions) {
  set_thread_count(3);
  EXPECT_THROW(parallel_map<int>(2000,
                                 [](std::size_t i) {
                                   if (i == 1500) throw std::runtime_error("boom");
                                   return 0;
                                 }),
               std::runtime_error);
  set_thread_count(0);
}
