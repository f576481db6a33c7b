#include "pol/pol.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <optional>
#include <exception>
#include <new>
#include <string>
#include <variant>

#include "error.hpp"
#include "experiments.hpp"
#include "function_spec.hpp"
#include "orlicz.hpp"
#include "parallel.hpp"
#include "poisson.hpp"
#include "quadrature.hpp"
#include "report.hpp"

struct pol_function {
  pol::ParsedFunction parsed;
};

struct pol_result {
  std::variant<pol::ExperimentResult, pol::SuiteResult> value;
};

namespace {

thread_local std::string g_last_error;

template <class Fn>
pol_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return POL_OK;
  } catch (const pol::Error& e) {
    g_last_error = e.what();
    return static_cast<pol_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return POL_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return POL_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) pol::fail(pol::ErrorCode::invalid_argument, std::string(what) + " must not be null");
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

pol::QuadResult integrate_power(const pol::TestFunction& f, int power, double tol) {
  pol::RealMap h = [&f, power](double x) {
    double v = std::abs(f(x));
    return power == 1 ? v : v * v;
  };
  if (f.exact_support()) {
    if (f.support.empty()) return {};
    return pol::integrate_window(h, f.support, tol, f.breaks);
  }
  return pol::integrate_line(h, tol, f.breaks);
}

pol_value to_value(const pol::NormValue& v) { return {v.value, v.err, v.discretized ? 1 : 0}; }

pol_value exact(double v) { return {v, 0.0, 0}; }

}  // namespace

extern "C" {

const char* pol_last_error(void) { return g_last_error.c_str(); }

const char* pol_status_name(pol_status s) {
  switch (s) {
    case POL_OK:
      return "ok";
    case POL_ERR_INVALID_ARGUMENT:
      return "invalid_argument";
    case POL_ERR_DOMAIN:
      return "domain";
    case POL_ERR_LIMIT_EXCEEDED:
      return "limit_exceeded";
    case POL_ERR_NON_CONVERGENCE:
      return "non_convergence";
    case POL_ERR_PARSE:
      return "parse";
    case POL_ERR_IO:
      return "io";
    case POL_ERR_PRECONDITION:
      return "precondition";
    case POL_ERR_INTERNAL:
      return "internal";
  }
  return "unknown";
}

pol_status pol_set_threads(unsigned n) {
  return guarded([&] { pol::set_thread_count(n); });
}

pol_status pol_function_parse(const char* spec, const char* system, pol_function** out) {
  return guarded([&] {
    require(spec, "spec");
    require(out, "out");
    pol::SystemPtr sys = system ? pol::parse_system(system) : nullptr;
    auto f = std::make_unique<pol_function>();
    f->parsed = pol::parse_function(spec, sys);
    *out = f.release();
  });
}

pol_status pol_function_from_atoms(const double* values, const double* masses, size_t n, pol_function** out) {
  return guarded([&] {
    require(out, "out");
    if (n > 0) {
      require(values, "values");
      require(masses, "masses");
    }
    std::vector<pol::Atom> atoms;
    for (size_t i = 0; i < n; ++i) atoms.push_back({values[i], masses[i]});
    pol::SimpleFunction s(std::move(atoms));
    auto f = std::make_unique<pol_function>();
    f->parsed.fn = s.empty() ? pol::zero_function() : s.realize(0.0);
    f->parsed.nonnegative = true;
    for (const auto& a : s.atoms()) f->parsed.nonnegative = f->parsed.nonnegative && a.value > 0.0;
    f->parsed.simple = std::move(s);
    *out = f.release();
  });
}

void pol_function_free(pol_function* f) { delete f; }

int pol_function_is_simple(const pol_function* f) { return f && f->parsed.simple ? 1 : 0; }

double pol_function_eval(const pol_function* f, double x) { return f ? f->parsed.fn(x) : std::nan(""); }

pol_status pol_function_norm(const pol_function* f, pol_norm_kind kind, double tol, pol_value* out) {
  return guarded([&] {
    require(f, "function");
    require(out, "out");
    if (!(tol > 0.0)) pol::fail(pol::ErrorCode::invalid_argument, "tol must be positive");
    const auto& simple = f->parsed.simple;
    const auto& fn = f->parsed.fn;
    if (simple) {
      const auto& s = *simple;
      auto m = pol::simple_moments(s);
      switch (kind) {
        case POL_NORM_GAUGE:
          *out = exact(pol::gauge_norm(s));
          return;
        case POL_NORM_ORLICZ:
          *out = exact(pol::orlicz_norm_paper(s));
          return;
        case POL_NORM_AMEMIYA:
          *out = exact(pol::orlicz_norm_amemiya(s));
          return;
        case POL_NORM_STAR:
          *out = exact(s.empty() ? 0.0 : pol::star_norm_exact(s));
          return;
        case POL_NORM_STARSTAR:
          *out = exact(s.empty() ? 0.0 : pol::starstar_norm_exact(s));
          return;
        case POL_NORM_L1:
          *out = exact(m.l1);
          return;
        case POL_NORM_L2:
          *out = exact(std::sqrt(m.l2sq));
          return;
        case POL_NORM_STAR_HSU:
          *out = s.empty() ? exact(0.0) : to_value(pol::star_norm_hsu(s, tol));
          return;
      }
      pol::fail(pol::ErrorCode::invalid_argument, "unknown norm kind");
    }
    bool empty = fn.exact_support() && fn.support.empty();
    switch (kind) {
      case POL_NORM_GAUGE:
        *out = empty ? exact(0.0) : to_value(pol::gauge_norm(fn, tol));
        return;
      case POL_NORM_ORLICZ:
        *out = empty ? exact(0.0) : to_value(pol::orlicz_norm_paper(fn, tol));
        return;
      case POL_NORM_AMEMIYA:
        *out = empty ? exact(0.0) : to_value(pol::orlicz_norm_amemiya(fn, tol));
        return;
      case POL_NORM_L1: {
        auto q = integrate_power(fn, 1, tol);
        *out = {q.value + fn.l1_tail_bound, q.err_bound + fn.l1_tail_bound, 1};
        return;
      }
      case POL_NORM_L2: {
        auto q = integrate_power(fn, 2, tol);
        double v = std::sqrt(std::max(0.0, q.value));
        *out = {v, std::sqrt(q.err_bound + fn.l2_tail_bound * fn.l2_tail_bound), 1};
        return;
      }
      case POL_NORM_STAR_HSU:
        *out = empty ? exact(0.0) : to_value(pol::star_norm_hsu(fn, tol));
        return;
      case POL_NORM_STAR:
      case POL_NORM_STARSTAR:
        pol::fail(pol::ErrorCode::precondition,
                  "the exact oracle needs a simple function; use the Monte Carlo estimate instead");
    }
    pol::fail(pol::ErrorCode::invalid_argument, "unknown norm kind");
  });
}

pol_status pol_function_estimate(const pol_function* f, int centered, uint64_t replicates, uint64_t seed,
                                 pol_estimate* out) {
  return guarded([&] {
    require(f, "function");
    require(out, "out");
    const auto& fn = f->parsed.fn;
    pol::MCEstimate e;
    if (fn.support.empty()) {
      if (replicates < pol::kMinReplicates)
        pol::fail(pol::ErrorCode::invalid_argument, "replicates must be >= " + std::to_string(pol::kMinReplicates));
      e.replicates = replicates;
      e.seed = seed;
    } else if (centered) {
      e = pol::estimate_star_norm(fn, fn.support, replicates, seed);
    } else {
      e = pol::estimate_starstar_norm(fn, fn.support, replicates, seed);
    }
    *out = {e.mean, e.std_error, e.truncation_bound, e.replicates, e.seed};
  });
}

pol_status pol_sample(const char* window, uint64_t seed, uint64_t replicate, double* points, size_t cap,
                      size_t* count) {
  return guarded([&] {
    require(window, "window");
    require(count, "count");
    if (cap > 0) require(points, "points");
    auto s = pol::sample_process(pol::parse_window(window), seed, replicate);
    *count = s.points.size();
    for (size_t i = 0; i < s.points.size() && i < cap; ++i) points[i] = s.points[i];
  });
}

pol_status pol_default_config(const char* scenario, char** out) {
  return guarded([&] {
    require(scenario, "scenario");
    require(out, "out");
    auto sc = pol::scenario_from_name(scenario);
    if (!sc) pol::fail(pol::ErrorCode::invalid_argument, std::string("unknown scenario '") + scenario + "'");
    *out = copy_string(pol::config_to_json(pol::default_config(*sc)));
  });
}

pol_status pol_run_config(const char* config_json, const uint64_t* seed_override, pol_result** out) {
  return guarded([&] {
    require(config_json, "config");
    require(out, "out");
    std::optional<std::uint64_t> seed;
    if (seed_override) seed = *seed_override;
    auto cfg = pol::config_from_json(config_json, seed);
    auto r = std::make_unique<pol_result>();
    r->value = pol::run_experiment(cfg);
    *out = r.release();
  });
}

pol_status pol_run_suite(uint64_t seed, pol_result** out) {
  return guarded([&] {
    require(out, "out");
    auto r = std::make_unique<pol_result>();
    r->value = pol::run_suite(seed);
    *out = r.release();
  });
}

void pol_result_free(pol_result* r) { delete r; }

int pol_result_all_pass(const pol_result* r) {
  if (!r) return 0;
  return std::visit([](const auto& v) { return v.all_pass() ? 1 : 0; }, r->value);
}

size_t pol_result_failures(const pol_result* r) {
  if (!r) return 0;
  auto count = [](const pol::ExperimentResult& e) {
    size_t n = 0;
    for (const auto& row : e.rows)
      for (const auto& v : row.verdicts) n += v.pass ? 0 : 1;
    for (const auto& v : e.summary) n += v.pass ? 0 : 1;
    return n;
  };
  if (const auto* e = std::get_if<pol::ExperimentResult>(&r->value)) return count(*e);
  size_t n = 0;
  for (const auto& p : std::get<pol::SuiteResult>(r->value).parts) n += count(p);
  return n;
}

pol_status pol_result_render(const pol_result* r, pol_format format, char** out) {
  return guarded([&] {
    require(r, "result");
    require(out, "out");
    std::string text;
    if (const auto* e = std::get_if<pol::ExperimentResult>(&r->value))
      text = format == POL_FORMAT_JSON ? pol::render_json(*e) : pol::render_csv(*e);
    else
      text = format == POL_FORMAT_JSON ? pol::render_suite_json(std::get<pol::SuiteResult>(r->value))
                                       : pol::render_suite_csv(std::get<pol::SuiteResult>(r->value));
    *out = copy_string(text);
  });
}

void pol_string_free(char* s) { std::free(s); }

}  // extern "C"
