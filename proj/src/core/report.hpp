#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "experiments.hpp"

namespace pol {

// JSON config document; see docs/config.md. Unknown keys are rejected,
// missing keys take the scenario defaults. `seed_override` replaces the file's seed.
ExperimentConfig config_from_json(std::string_view text, std::optional<std::uint64_t> seed_override = std::nullopt);

// Canonical serialization with every default filled in (sorted keys, no whitespace).
std::string config_to_json(const ExperimentConfig& cfg);

std::string render_csv(const ExperimentResult& r);
std::string render_json(const ExperimentResult& r);
std::string render_suite_csv(const SuiteResult& s);
std::string render_suite_json(const SuiteResult& s);

// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace pol
