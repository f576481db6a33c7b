#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "poisson.hpp"

namespace pol {

enum class Scenario {
  birkhoff_decay,
  blum_hanson,
  transfer_decay,
  urbanik_scan,
  starstar_ergodic,
  invariant_vector,
  identity_suite,
};

std::string_view scenario_name(Scenario s);
std::optional<Scenario> scenario_from_name(std::string_view name);

enum class SubsequenceKind { linear, square, power2, explicit_list };

struct SubsequenceSpec {
  SubsequenceKind kind = SubsequenceKind::square;
  long cap = 1'000'000;
  std::vector<long> times;  // explicit_list only
};

struct Tolerances {
  double se_multiplier = 3.0;
  double monotone_se = 2.0;
  double slope_target = -0.5;
  double slope_tol = 0.1;
  long slope_min_n = 8;
  double quad_tol = 1e-7;
  double mass_tol = 1e-6;
  double window_tol = 0.05;
  double bracket_tol = 1e-8;
  double norm_tol = 1e-6;
  double tail_eps = 1e-12;
};

struct UrbanikSpec {
  std::size_t samples = 200;
  std::size_t max_atoms = 5;
  double value_bound = 5.0;
  double mass_lo = 0.01;
  double mass_hi = 10.0;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::birkhoff_decay;
  std::string system;
  std::string function;
  std::vector<long> depths;
  std::optional<SubsequenceSpec> subsequence;
  std::uint64_t replicates = 0;
  std::optional<std::uint64_t> seed;
  Tolerances tol;
  UrbanikSpec urbanik;
  // Replaces the closed-form star targets row by row when present.
  std::vector<double> expected_star;
};

// The scenario's documented defaults; the seed is left unset.
ExperimentConfig default_config(Scenario s);

// Throws ErrorCode::invalid_argument describing the first violated rule.
void validate(const ExperimentConfig& cfg);

struct Verdict {
  std::string id;
  bool pass = false;
  // allowed - deviation: nonnegative exactly when the verdict passes.
  double margin = 0.0;
  double value = 0.0;
  double target = 0.0;
  double allowed = 0.0;
  std::string detail;
};

struct ExperimentRow {
  long n = 0;
  MCEstimate star;
  double gauge = 0.0;
  double orlicz_paper = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  bool norms_discretized = false;
  std::vector<std::pair<std::string, double>> extra;
  std::vector<Verdict> verdicts;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::string config_text;  // canonical serialization, defaults included
  std::uint64_t config_hash = 0;
  std::vector<ExperimentRow> rows;
  std::vector<Verdict> summary;
  std::vector<std::string> notes;
  std::vector<std::string> warnings;

  bool all_pass() const;
};

// FNV-1a 64-bit.
std::uint64_t fnv1a64(std::string_view bytes);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

ExperimentResult run_birkhoff_decay(const ExperimentConfig& cfg);
ExperimentResult run_blum_hanson(const ExperimentConfig& cfg);
ExperimentResult run_transfer_decay(const ExperimentConfig& cfg);
ExperimentResult run_urbanik_scan(const ExperimentConfig& cfg);
ExperimentResult run_starstar_ergodic(const ExperimentConfig& cfg);
ExperimentResult run_invariant_vector(const ExperimentConfig& cfg);
ExperimentResult run_identity_suite(const ExperimentConfig& cfg);

struct SuiteResult {
  std::uint64_t seed = 0;
  std::vector<ExperimentResult> parts;
  bool all_pass() const;
};

// Identity suite followed by the default scenarios, all under one seed.
SuiteResult run_suite(std::uint64_t seed);

// E|N - c| for N ~ Poisson(c): 2 c^{floor(c)+1} e^{-c} / floor(c)!.
double poisson_mad(double c);

}  // namespace pol
