// Command-line front end. Talks to the library only through pol/pol.h.
#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pol/pol.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerdict = 2;

struct Failure {
  std::string message;
};

void check(pol_status s) {
  if (s != POL_OK) throw Failure{std::string(pol_status_name(s)) + ": " + pol_last_error()};
}

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string take(char* s) {
  std::string out(s);
  pol_string_free(s);
  return out;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{"io: cannot open '" + path + "' for writing"};
  out << text;
  if (!out) throw Failure{"io: write to '" + path + "' failed"};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{"io: cannot read '" + path + "'"};
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct NormName {
  const char* name;
  pol_norm_kind kind;
};

constexpr NormName kNorms[] = {
    {"gauge", POL_NORM_GAUGE},       {"orlicz", POL_NORM_ORLICZ}, {"amemiya", POL_NORM_AMEMIYA},
    {"star", POL_NORM_STAR},         {"starstar", POL_NORM_STARSTAR}, {"l1", POL_NORM_L1},
    {"l2", POL_NORM_L2},             {"star_hsu", POL_NORM_STAR_HSU},
};

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

struct Options {
  std::string format = "csv";
  std::string out;
  unsigned threads = 0;
  std::optional<std::uint64_t> seed;

  // norm
  std::optional<std::string> atoms;
  std::optional<std::string> function;
  std::string system;
  std::string which = "gauge,orlicz,amemiya,star,starstar,l1,l2";
  double tol = 1e-8;
  std::uint64_t replicates = 100000;

  // sample
  std::string window;
  std::uint64_t replicate = 0;

  // run
  std::string config;
  std::string scenario;
};

struct Row {
  std::string name, method;
  double value = 0.0, err = 0.0, se = 0.0;
};

int cmd_norm(const Options& o) {
  if (o.atoms.has_value() == o.function.has_value()) throw Failure{"usage: give exactly one of --atoms or --function"};
  pol_function* f = nullptr;
  const std::string spec = o.atoms ? *o.atoms : *o.function;
  check(pol_function_parse(spec.c_str(), o.system.empty() ? nullptr : o.system.c_str(), &f));
  std::unique_ptr<pol_function, decltype(&pol_function_free)> guard(f, pol_function_free);
  if (o.atoms && !pol_function_is_simple(f)) throw Failure{"usage: --atoms expects an atom list '(v,m),...'"};
  std::vector<Row> rows;
  for (const auto& w : split(o.which)) {
    const NormName* found = nullptr;
    for (const auto& n : kNorms)
      if (w == n.name) found = &n;
    if (!found) throw Failure{"usage: unknown norm '" + w + "'"};
    Row row;
    row.name = w;
    bool mc = (found->kind == POL_NORM_STAR || found->kind == POL_NORM_STARSTAR) && !pol_function_is_simple(f);
    if (mc) {
      if (!o.seed) throw Failure{"usage: Monte Carlo " + w + " needs --seed"};
      pol_estimate e{};
      check(pol_function_estimate(f, found->kind == POL_NORM_STAR, o.replicates, *o.seed, &e));
      row.value = e.mean;
      row.se = e.std_error;
      row.err = e.truncation_bound;
      row.method = "monte_carlo";
    } else {
      pol_value v{};
      check(pol_function_norm(f, found->kind, o.tol, &v));
      row.value = v.value;
      row.err = v.err;
      row.method = v.discretized ? "discretized" : "exact";
    }
    rows.push_back(row);
  }
  std::ostringstream os;
  if (o.format == "json") {
    os << "{";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      os << (i ? "," : "") << "\n  \"" << r.name << "\": {\"value\": " << shortest(r.value)
         << ", \"err\": " << shortest(r.err) << ", \"std_error\": " << shortest(r.se) << ", \"method\": \""
         << r.method << "\"}";
    }
    os << "\n}\n";
  } else {
    os << "norm,value,err,std_error,method\n";
    for (const auto& r : rows)
      os << r.name << ',' << shortest(r.value) << ',' << shortest(r.err) << ',' << shortest(r.se) << ','
         << r.method << '\n';
  }
  emit(os.str(), o.out);
  return kExitOk;
}

int cmd_sample(const Options& o) {
  if (!o.seed) throw Failure{"usage: --seed is required"};
  std::size_t count = 0;
  check(pol_sample(o.window.c_str(), *o.seed, o.replicate, nullptr, 0, &count));
  std::vector<double> pts(count);
  check(pol_sample(o.window.c_str(), *o.seed, o.replicate, pts.data(), pts.size(), &count));
  std::ostringstream os;
  if (o.format == "json") {
    os << "{\"window\": \"" << o.window << "\", \"seed\": " << *o.seed << ", \"replicate\": " << o.replicate
       << ", \"points\": [";
    for (std::size_t i = 0; i < pts.size(); ++i) os << (i ? ", " : "") << shortest(pts[i]);
    os << "]}\n";
  } else {
    os << "point\n";
    for (double p : pts) os << shortest(p) << '\n';
  }
  emit(os.str(), o.out);
  return kExitOk;
}

int finish_result(pol_result* r, const Options& o) {
  std::unique_ptr<pol_result, decltype(&pol_result_free)> guard(r, pol_result_free);
  char* text = nullptr;
  check(pol_result_render(r, o.format == "json" ? POL_FORMAT_JSON : POL_FORMAT_CSV, &text));
  emit(take(text), o.out);
  std::size_t failures = pol_result_failures(r);
  if (failures > 0) {
    std::cerr << "pol: " << failures << " verdict(s) failed\n";
    return kExitVerdict;
  }
  return kExitOk;
}

int cmd_run(const Options& o) {
  if (o.config.empty() == o.scenario.empty()) throw Failure{"usage: give exactly one of --config or --scenario"};
  std::string text;
  if (!o.config.empty()) {
    text = slurp(o.config);
  } else {
    char* c = nullptr;
    check(pol_default_config(o.scenario.c_str(), &c));
    text = take(c);
  }
  pol_result* r = nullptr;
  check(pol_run_config(text.c_str(), o.seed ? &*o.seed : nullptr, &r));
  return finish_result(r, o);
}

int cmd_suite(const Options& o) {
  if (!o.seed) throw Failure{"usage: --seed is required"};
  pol_result* r = nullptr;
  check(pol_run_suite(*o.seed, &r));
  return finish_result(r, o);
}

void common(CLI::App* sub, Options& o) {
  sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--out,-o", o.out, "Output file (default: stdout)");
  sub->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Poisson star norms, Orlicz norms and ergodic averaging experiments"};
  app.require_subcommand(1);
  Options o;

  auto* norm = app.add_subcommand("norm", "Norms of one function");
  common(norm, o);
  norm->add_option("--atoms", o.atoms, "Atom list '(v,m),...'");
  norm->add_option("--function", o.function, "Function spec");
  norm->add_option("--system", o.system, "Dynamical system for system-derived specs");
  norm->add_option("--which", o.which, "Comma-separated subset of gauge,orlicz,amemiya,star,starstar,l1,l2,star_hsu");
  norm->add_option("--tol", o.tol, "Quadrature / oracle tolerance");
  norm->add_option("--seed", o.seed, "Seed for Monte Carlo norms of non-simple functions");
  norm->add_option("--replicates", o.replicates, "Monte Carlo replicates");

  auto* sample = app.add_subcommand("sample", "One Poisson configuration on a window");
  common(sample, o);
  sample->add_option("--window", o.window, "Window such as '[0,1],[2,3]'")->required();
  sample->add_option("--seed", o.seed, "Seed");
  sample->add_option("--replicate", o.replicate, "Replicate index");

  auto* run = app.add_subcommand("run", "Run one experiment config");
  common(run, o);
  run->add_option("--config,-c", o.config, "JSON config file");
  run->add_option("--scenario", o.scenario, "Run a scenario with its defaults");
  run->add_option("--seed", o.seed, "Seed (overrides the config)");

  auto* suite = app.add_subcommand("suite", "Identity suite and default acceptance scenarios");
  common(suite, o);
  suite->add_option("--seed", o.seed, "Seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    check(pol_set_threads(o.threads));
    if (norm->parsed()) return cmd_norm(o);
    if (sample->parsed()) return cmd_sample(o);
    if (run->parsed()) return cmd_run(o);
    return cmd_suite(o);
  } catch (const Failure& f) {
    std::cerr << "pol: " << f.message << '\n';
    return kExitUsage;
  }
}
