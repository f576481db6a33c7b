#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "error.hpp"
#include "experiments.hpp"
#include "parallel.hpp"
#include "report.hpp"

using namespace pol;

namespace {

ExperimentConfig small(Scenario s, std::uint64_t seed = 42) {
  auto c = default_config(s);
  c.seed = seed;
  if (c.replicates > 0) c.replicates = 2000;
  return c;
}

ErrorCode code_of(const ExperimentConfig& c) {
  try {
    validate(c);
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(0);
}

// 2 c^{j+1} e^{-c} / j! evaluated by direct series summation of E|N - c|.
double mad_series(double c) {
  double p = std::exp(-c), total = 0.0;
  for (int k = 0; k < 400; ++k) {
    total += p * std::abs(k - c);
    p *= c / (k + 1);
  }
  return total;
}

}  // namespace

TEST(PoissonMad, MatchesSeries) {
  for (double c : {0.1, 0.5, 1.0, 2.0, 4.0, 7.5, 32.0, 100.0})
    EXPECT_NEAR(poisson_mad(c), mad_series(c), 1e-12 * std::max(1.0, c)) << c;
  EXPECT_NEAR(poisson_mad(1.0), 2.0 / std::exp(1.0), 1e-15);
  EXPECT_NEAR(poisson_mad(4.0) / 4.0, 0.39073, 1e-5);
  EXPECT_EQ(poisson_mad(0.0), 0.0);
}

TEST(Config, DefaultsMatchDocumentation) {
  auto b = default_config(Scenario::birkhoff_decay);
  EXPECT_EQ(b.depths, (std::vector<long>{1, 2, 4, 8, 16, 32}));
  EXPECT_EQ(b.replicates, 100000u);
  EXPECT_FALSE(b.seed);
  auto t = default_config(Scenario::transfer_decay);
  EXPECT_EQ(t.depths.size(), 11u);
  EXPECT_EQ(t.system, "boole");
  EXPECT_EQ(default_config(Scenario::urbanik_scan).urbanik.samples, 200u);
}

TEST(Config, ValidationFailures) {
  auto c = default_config(Scenario::birkhoff_decay);
  EXPECT_EQ(code_of(c), ErrorCode::invalid_argument);  // no seed
  c.seed = 1;
  EXPECT_EQ(code_of(c), static_cast<ErrorCode>(0));
  c.replicates = 10;
  EXPECT_EQ(code_of(c), ErrorCode::invalid_argument);
  c.replicates = 1000;
  c.depths = {1, 4, 4};
  EXPECT_EQ(code_of(c), ErrorCode::invalid_argument);
  auto bh = small(Scenario::blum_hanson);
  bh.subsequence = SubsequenceSpec{SubsequenceKind::explicit_list, 100, {3, 3, 3}};
  EXPECT_EQ(code_of(bh), ErrorCode::invalid_argument);
  auto tr = small(Scenario::transfer_decay);
  tr.depths = {0, 15};
  EXPECT_EQ(code_of(tr), ErrorCode::invalid_argument);
}

TEST(Config, JsonRoundTrip) {
  for (Scenario s : {Scenario::birkhoff_decay, Scenario::blum_hanson, Scenario::transfer_decay,
                     Scenario::urbanik_scan, Scenario::invariant_vector, Scenario::identity_suite}) {
    auto c = small(s, 77);
    std::string text = config_to_json(c);
    EXPECT_EQ(config_to_json(config_from_json(text)), text);
  }
}

TEST(Config, PartialJsonTakesDefaults) {
  auto c = config_from_json(R"({"scenario": "birkhoff_decay", "seed": 3, "tolerances": {"slope_tol": 0.2}})");
  EXPECT_EQ(c.replicates, 100000u);
  EXPECT_EQ(*c.seed, 3u);
  EXPECT_DOUBLE_EQ(c.tol.slope_tol, 0.2);
  EXPECT_DOUBLE_EQ(c.tol.se_multiplier, 3.0);
  auto o = config_from_json(R"({"scenario": "birkhoff_decay", "seed": 3})", 9);
  EXPECT_EQ(*o.seed, 9u);
}

TEST(Config, JsonErrors) {
  EXPECT_THROW(config_from_json(R"({"scenario": "birkhoff_decay", "replicats": 5})"), Error);
  EXPECT_THROW(config_from_json(R"({"scenario": "nope"})"), Error);
  EXPECT_THROW(config_from_json(R"({"scenario": "birkhoff_decay", "replicates": -5})"), Error);
  EXPECT_THROW(config_from_json("{"), Error);
  EXPECT_THROW(config_from_json(R"({"scenario": "birkhoff_decay", "tolerances": {"bogus": 1}})"), Error);
}

TEST(Config, HashTracksContent) {
  auto a = small(Scenario::birkhoff_decay, 1);
  auto b = small(Scenario::birkhoff_decay, 2);
  EXPECT_NE(fnv1a64(config_to_json(a)), fnv1a64(config_to_json(b)));
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
}

TEST(Birkhoff, RowsAndVerdicts) {
  auto r = run_experiment(small(Scenario::birkhoff_decay));
  ASSERT_EQ(r.rows.size(), 6u);
  for (const auto& row : r.rows) {
    EXPECT_NEAR(row.gauge, 1.0 / std::sqrt(static_cast<double>(row.n)), 1e-8);
    EXPECT_NEAR(row.l1, 1.0, 1e-9);
  }
  EXPECT_TRUE(r.all_pass());
}

TEST(BlumHanson, LinearSubsequenceReducesToBirkhoff) {
  auto b = run_experiment(small(Scenario::birkhoff_decay));
  auto cfg = small(Scenario::blum_hanson);
  cfg.subsequence->kind = SubsequenceKind::linear;
  auto h = run_experiment(cfg);
  ASSERT_EQ(h.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < b.rows.size(); ++i) EXPECT_EQ(h.rows[i].star.mean, b.rows[i].star.mean);
}

TEST(BlumHanson, CapTruncatesWithWarning) {
  auto cfg = small(Scenario::blum_hanson);
  cfg.subsequence->cap = 100;  // k^2 <= 100 leaves 10 terms
  auto r = run_experiment(cfg);
  EXPECT_EQ(r.rows.size(), 4u);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Birkhoff, RejectsComposite) {
  auto cfg = small(Scenario::birkhoff_decay);
  cfg.system = "composite";
  EXPECT_THROW(run_experiment(cfg), Error);
}

TEST(Tampered, ExpectedValueFails) {
  auto cfg = small(Scenario::birkhoff_decay);
  cfg.depths = {1, 2};
  cfg.expected_star = {0.9, poisson_mad(2.0) / 2.0};
  auto r = run_experiment(cfg);
  EXPECT_FALSE(r.rows[0].verdicts[0].pass);
  EXPECT_TRUE(r.rows[1].verdicts[0].pass);
  EXPECT_FALSE(r.all_pass());
}

TEST(StarStar, FirstRowIsTwoOverE) {
  auto r = run_experiment(small(Scenario::starstar_ergodic));
  ASSERT_FALSE(r.rows.empty());
  EXPECT_NEAR(r.rows[0].star.mean, 2.0 / std::exp(1.0), 3.0 * r.rows[0].star.std_error);
  EXPECT_TRUE(r.all_pass());
}

TEST(Invariant, ConstantColumn) {
  auto r = run_experiment(small(Scenario::invariant_vector));
  for (const auto& row : r.rows) EXPECT_EQ(row.star.mean, r.rows[0].star.mean);
  EXPECT_TRUE(r.all_pass());
}

TEST(Invariant, DissipativePartApproachesCircleValue) {
  auto cfg = small(Scenario::invariant_vector);
  cfg.function = "circle + indicator(1,2)";
  cfg.replicates = 20000;
  auto r = run_experiment(cfg);
  ASSERT_FALSE(r.summary.empty());
  EXPECT_EQ(r.summary.back().id, "approaches_invariant");
  EXPECT_TRUE(r.summary.back().pass);
}

TEST(Urbanik, SmallScanPasses) {
  auto cfg = small(Scenario::urbanik_scan);
  cfg.urbanik.samples = 20;
  auto r = run_experiment(cfg);
  EXPECT_EQ(r.rows.size(), 20u);
  EXPECT_TRUE(r.all_pass());
}

TEST(Transfer, ShallowRun) {
  auto cfg = small(Scenario::transfer_decay);
  cfg.depths = {0, 1, 2, 3};
  auto r = run_experiment(cfg);
  ASSERT_EQ(r.rows.size(), 4u);
  for (const auto& row : r.rows) EXPECT_NEAR(row.l1, 1.0, 1e-6);
  EXPECT_TRUE(r.all_pass());
}

TEST(Determinism, ThreadCountDoesNotChangeOutput) {
  auto cfg = small(Scenario::birkhoff_decay);
  set_thread_count(1);
  std::string a = render_json(run_experiment(cfg)) + render_csv(run_experiment(cfg));
  set_thread_count(4);
  std::string b = render_json(run_experiment(cfg)) + render_csv(run_experiment(cfg));
  set_thread_count(0);
  EXPECT_EQ(a, b);
}

TEST(Report, CsvLayout) {
  auto r = run_experiment(small(Scenario::birkhoff_decay));
  std::string csv = render_csv(r);
  EXPECT_EQ(csv.rfind("n,star_mean,star_se,star_trunc,gauge,orlicz_paper,l1,l2,", 0), 0u);
  EXPECT_NE(csv.find("# summary loglog_slope"), std::string::npos);
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-2.0), "-2");
}
