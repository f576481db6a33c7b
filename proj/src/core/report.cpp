#include "report.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "error.hpp"

namespace pol {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

namespace {

constexpr std::pair<SubsequenceKind, const char*> kKinds[] = {
    {SubsequenceKind::linear, "linear"},
    {SubsequenceKind::square, "square"},
    {SubsequenceKind::power2, "power2"},
    {SubsequenceKind::explicit_list, "explicit"},
};

const char* kind_name(SubsequenceKind k) {
  for (const auto& [kind, name] : kKinds)
    if (kind == k) return name;
  return "square";
}

[[noreturn]] void config_error(const std::string& msg) { fail(ErrorCode::parse, "config: " + msg); }

void reject_unknown(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  for (const auto& [k, v] : obj.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) config_error("unknown key '" + k + "' in " + where);
  }
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    config_error("key '" + std::string(key) + "' in " + where + " has the wrong type");
  }
}

void read_count(const json& obj, const char* key, std::uint64_t& out, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_number_integer() || (it->is_number_integer() && !it->is_number_unsigned() && it->get<long long>() < 0))
    config_error("key '" + std::string(key) + "' in " + where + " must be a nonnegative integer");
  out = it->get<std::uint64_t>();
}

// Non-finite values travel as strings so the document stays valid JSON.
json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

json tolerances_json(const Tolerances& t) {
  return json{{"se_multiplier", t.se_multiplier}, {"monotone_se", t.monotone_se}, {"slope_target", t.slope_target},
              {"slope_tol", t.slope_tol},         {"slope_min_n", t.slope_min_n}, {"quad_tol", t.quad_tol},
              {"mass_tol", t.mass_tol},           {"window_tol", t.window_tol},   {"bracket_tol", t.bracket_tol},
              {"norm_tol", t.norm_tol},           {"tail_eps", t.tail_eps}};
}

json config_json(const ExperimentConfig& c) {
  json j;
  j["scenario"] = std::string(scenario_name(c.scenario));
  j["system"] = c.system;
  j["function"] = c.function;
  j["depths"] = c.depths;
  j["replicates"] = c.replicates;
  j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  j["tolerances"] = tolerances_json(c.tol);
  j["urbanik"] = json{{"samples", c.urbanik.samples},
                      {"max_atoms", c.urbanik.max_atoms},
                      {"value_bound", c.urbanik.value_bound},
                      {"mass_lo", c.urbanik.mass_lo},
                      {"mass_hi", c.urbanik.mass_hi}};
  if (c.subsequence)
    j["subsequence"] = json{{"kind", kind_name(c.subsequence->kind)},
                            {"cap", c.subsequence->cap},
                            {"times", c.subsequence->times}};
  else
    j["subsequence"] = nullptr;
  j["expected_star"] = c.expected_star;
  return j;
}

json verdict_json(const Verdict& v) {
  return json{{"id", v.id},
              {"pass", v.pass},
              {"margin", number(v.margin)},
              {"value", number(v.value)},
              {"target", number(v.target)},
              {"allowed", number(v.allowed)},
              {"detail", v.detail}};
}

json estimate_json(const MCEstimate& e) {
  return json{{"mean", number(e.mean)},
              {"std_error", number(e.std_error)},
              {"replicates", e.replicates},
              {"seed", e.seed},
              {"truncation_bound", number(e.truncation_bound)}};
}

std::string hex64(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

json result_json(const ExperimentResult& r) {
  json j;
  j["scenario"] = std::string(scenario_name(r.config.scenario));
  j["config"] = config_json(r.config);
  j["config_hash"] = hex64(r.config_hash);
  j["seed"] = r.config.seed ? json(*r.config.seed) : json(nullptr);
  json rows = json::array();
  for (const auto& row : r.rows) {
    json jr;
    jr["n"] = row.n;
    jr["star"] = estimate_json(row.star);
    jr["gauge"] = number(row.gauge);
    jr["orlicz_paper"] = number(row.orlicz_paper);
    jr["l1"] = number(row.l1);
    jr["l2"] = number(row.l2);
    jr["norms_discretized"] = row.norms_discretized;
    json extra = json::object();
    for (const auto& [k, v] : row.extra) extra[k] = number(v);
    jr["extra"] = extra;
    json verdicts = json::array();
    for (const auto& v : row.verdicts) verdicts.push_back(verdict_json(v));
    jr["verdicts"] = verdicts;
    rows.push_back(jr);
  }
  j["rows"] = rows;
  json summary = json::array();
  for (const auto& v : r.summary) summary.push_back(verdict_json(v));
  j["summary"] = summary;
  j["notes"] = r.notes;
  j["warnings"] = r.warnings;
  j["all_pass"] = r.all_pass();
  return j;
}

// CSV cells never contain commas except in free text, which is quoted.
std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

void verdict_table(std::ostringstream& os, const ExperimentResult& r) {
  os << "id,pass,value,target,allowed,margin,detail,seed,config_hash\n";
  std::string seed = r.config.seed ? std::to_string(*r.config.seed) : "";
  for (const auto& v : r.summary)
    os << v.id << ',' << (v.pass ? 1 : 0) << ',' << format_double(v.value) << ',' << format_double(v.target) << ','
       << format_double(v.allowed) << ',' << format_double(v.margin) << ',' << quoted(v.detail) << ',' << seed << ','
       << hex64(r.config_hash) << '\n';
}

void row_table(std::ostringstream& os, const ExperimentResult& r) {
  std::vector<std::string> extra_cols, verdict_cols;
  auto remember = [](std::vector<std::string>& cols, const std::string& k) {
    if (std::find(cols.begin(), cols.end(), k) == cols.end()) cols.push_back(k);
  };
  for (const auto& row : r.rows) {
    for (const auto& [k, v] : row.extra) remember(extra_cols, k);
    for (const auto& v : row.verdicts) remember(verdict_cols, v.id);
  }
  os << "n,star_mean,star_se,star_trunc,gauge,orlicz_paper,l1,l2";
  for (const auto& k : extra_cols) os << ',' << k;
  for (const auto& k : verdict_cols) os << ",v:" << k << ",m:" << k;
  os << ",seed,config_hash\n";
  std::string seed = r.config.seed ? std::to_string(*r.config.seed) : "";
  for (const auto& row : r.rows) {
    os << row.n << ',' << format_double(row.star.mean) << ',' << format_double(row.star.std_error) << ','
       << format_double(row.star.truncation_bound) << ',' << format_double(row.gauge) << ','
       << format_double(row.orlicz_paper) << ',' << format_double(row.l1) << ',' << format_double(row.l2);
    for (const auto& k : extra_cols) {
      os << ',';
      for (const auto& [ek, ev] : row.extra)
        if (ek == k) {
          os << format_double(ev);
          break;
        }
    }
    for (const auto& k : verdict_cols) {
      const Verdict* found = nullptr;
      for (const auto& v : row.verdicts)
        if (v.id == k) found = &v;
      if (found)
        os << ',' << (found->pass ? 1 : 0) << ',' << format_double(found->margin);
      else
        os << ",,";
    }
    os << ',' << seed << ',' << hex64(r.config_hash) << '\n';
  }
  for (const auto& v : r.summary)
    os << "# summary " << v.id << " pass=" << (v.pass ? 1 : 0) << " value=" << format_double(v.value)
       << " target=" << format_double(v.target) << " allowed=" << format_double(v.allowed)
       << " margin=" << format_double(v.margin) << '\n';
}

}  // namespace

ExperimentConfig config_from_json(std::string_view text, std::optional<std::uint64_t> seed_override) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) config_error("top level must be an object");
  reject_unknown(j,
                 {"scenario", "system", "function", "depths", "replicates", "seed", "tolerances", "urbanik",
                  "subsequence", "expected_star"},
                 "config");
  auto it = j.find("scenario");
  if (it == j.end() || !it->is_string()) config_error("'scenario' is required");
  auto sc = scenario_from_name(it->get<std::string>());
  if (!sc) config_error("unknown scenario '" + it->get<std::string>() + "'");
  ExperimentConfig c = default_config(*sc);
  read(j, "system", c.system, "config");
  read(j, "function", c.function, "config");
  read(j, "depths", c.depths, "config");
  read_count(j, "replicates", c.replicates, "config");
  if (auto s = j.find("seed"); s != j.end() && !s->is_null()) {
    std::uint64_t seed = 0;
    read_count(j, "seed", seed, "config");
    c.seed = seed;
  }
  if (seed_override) c.seed = seed_override;
  read(j, "expected_star", c.expected_star, "config");
  if (auto t = j.find("tolerances"); t != j.end()) {
    if (!t->is_object()) config_error("'tolerances' must be a table");
    reject_unknown(*t,
                   {"se_multiplier", "monotone_se", "slope_target", "slope_tol", "slope_min_n", "quad_tol",
                    "mass_tol", "window_tol", "bracket_tol", "norm_tol", "tail_eps"},
                   "tolerances");
    auto& tol = c.tol;
    read(*t, "se_multiplier", tol.se_multiplier, "tolerances");
    read(*t, "monotone_se", tol.monotone_se, "tolerances");
    read(*t, "slope_target", tol.slope_target, "tolerances");
    read(*t, "slope_tol", tol.slope_tol, "tolerances");
    read(*t, "slope_min_n", tol.slope_min_n, "tolerances");
    read(*t, "quad_tol", tol.quad_tol, "tolerances");
    read(*t, "mass_tol", tol.mass_tol, "tolerances");
    read(*t, "window_tol", tol.window_tol, "tolerances");
    read(*t, "bracket_tol", tol.bracket_tol, "tolerances");
    read(*t, "norm_tol", tol.norm_tol, "tolerances");
    read(*t, "tail_eps", tol.tail_eps, "tolerances");
  }
  if (auto u = j.find("urbanik"); u != j.end()) {
    if (!u->is_object()) config_error("'urbanik' must be a table");
    reject_unknown(*u, {"samples", "max_atoms", "value_bound", "mass_lo", "mass_hi"}, "urbanik");
    read(*u, "samples", c.urbanik.samples, "urbanik");
    read(*u, "max_atoms", c.urbanik.max_atoms, "urbanik");
    read(*u, "value_bound", c.urbanik.value_bound, "urbanik");
    read(*u, "mass_lo", c.urbanik.mass_lo, "urbanik");
    read(*u, "mass_hi", c.urbanik.mass_hi, "urbanik");
  }
  if (auto s = j.find("subsequence"); s != j.end()) {
    if (s->is_null()) {
      c.subsequence.reset();
    } else {
      if (!s->is_object()) config_error("'subsequence' must be a table");
      reject_unknown(*s, {"kind", "cap", "times"}, "subsequence");
      SubsequenceSpec sub = c.subsequence.value_or(SubsequenceSpec{});
      std::string kind = kind_name(sub.kind);
      read(*s, "kind", kind, "subsequence");
      bool found = false;
      for (const auto& [k, name] : kKinds)
        if (kind == name) {
          sub.kind = k;
          found = true;
        }
      if (!found) config_error("unknown subsequence kind '" + kind + "'");
      read(*s, "cap", sub.cap, "subsequence");
      read(*s, "times", sub.times, "subsequence");
      c.subsequence = sub;
    }
  }
  return c;
}

std::string config_to_json(const ExperimentConfig& cfg) { return config_json(cfg).dump(); }

std::string render_json(const ExperimentResult& r) { return result_json(r).dump(2) + "\n"; }

std::string render_csv(const ExperimentResult& r) {
  std::ostringstream os;
  if (r.rows.empty())
    verdict_table(os, r);
  else
    row_table(os, r);
  for (const auto& n : r.notes) os << "# note " << n << '\n';
  for (const auto& w : r.warnings) os << "# warning " << w << '\n';
  return os.str();
}

std::string render_suite_csv(const SuiteResult& s) {
  std::ostringstream os;
  for (const auto& part : s.parts) {
    os << "# scenario " << scenario_name(part.config.scenario) << " pass=" << (part.all_pass() ? 1 : 0) << '\n';
    os << render_csv(part);
  }
  os << "# suite seed=" << s.seed << " pass=" << (s.all_pass() ? 1 : 0) << '\n';
  return os.str();
}

std::string render_suite_json(const SuiteResult& s) {
  json j;
  j["seed"] = s.seed;
  j["all_pass"] = s.all_pass();
  json parts = json::array();
  for (const auto& p : s.parts) parts.push_back(result_json(p));
  j["parts"] = parts;
  return j.dump(2) + "\n";
}

}  // namespace pol
