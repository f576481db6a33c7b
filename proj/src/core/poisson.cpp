#include "poisson.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include "dynamics.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"

namespace pol {

namespace {

constexpr double kPoissonChunk = 200.0;

std::uint64_t poisson_by_inversion(double mean, StreamRng& rng) {
  double u = rng.uniform();
  double p = std::exp(-mean);
  double cdf = p;
  std::uint64_t k = 0;
  while (u >= cdf) {
    ++k;
    p *= mean / static_cast<double>(k);
    double next = cdf + p;
    if (next == cdf) break;
    cdf = next;
  }
  return k;
}

Window intersect(const Window& a, const Window& b) {
  std::vector<Interval> out;
  for (const auto& iv : b.intervals()) {
    Window piece = a.intersected(iv);
    out.insert(out.end(), piece.intervals().begin(), piece.intervals().end());
  }
  return Window(std::move(out));
}

// a \ b, up to the measure-zero boundary.
Window subtract(const Window& a, const Window& b) {
  std::vector<Interval> out;
  for (const auto& iv : a.intervals()) {
    double cur = iv.lo;
    for (const auto& cut : b.intervals()) {
      if (cut.hi <= cur) continue;
      if (cut.lo >= iv.hi) break;
      if (cut.lo > cur) out.push_back({cur, cut.lo});
      cur = std::max(cur, cut.hi);
      if (cur >= iv.hi) break;
    }
    if (cur < iv.hi) out.push_back({cur, iv.hi});
  }
  return Window(std::move(out));
}

// Region of w on which f can be nonzero.
Window effective_window(const TestFunction& f, const Window& w) {
  return f.exact_support() ? intersect(w, f.support) : w;
}

QuadResult integrate_on(const RealMap& h, const Window& w, double tol, std::span<const double> breaks) {
  if (w.empty()) return {};
  return integrate_window(h, w, tol, breaks);
}

void require_replicates(std::uint64_t r) {
  if (r < kMinReplicates)
    fail(ErrorCode::invalid_argument,
         "replicates must be >= " + std::to_string(kMinReplicates) + " (got " + std::to_string(r) + ")");
}

}  // namespace

std::uint64_t sample_poisson_count(double mean, StreamRng& rng) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) fail(ErrorCode::invalid_argument, "Poisson mean must be finite and >= 0");
  if (mean == 0.0) return 0;
  std::uint64_t total = 0;
  while (mean > kPoissonChunk) {
    total += poisson_by_inversion(kPoissonChunk, rng);
    mean -= kPoissonChunk;
  }
  return total + poisson_by_inversion(mean, rng);
}

PoissonSample sample_process(const Window& w, StreamRng& rng) {
  PoissonSample s{w, {}};
  if (w.empty()) return s;
  std::uint64_t k = sample_poisson_count(w.measure(), rng);
  s.points.reserve(k);
  for (std::uint64_t i = 0; i < k; ++i) s.points.push_back(w.locate(rng.uniform()));
  return s;
}

PoissonSample sample_process(const Window& w, std::uint64_t seed, std::uint64_t replicate) {
  StreamRng rng(seed, replicate);
  return sample_process(w, rng);
}

double compensator(const TestFunction& f, const Window& w, double tol) {
  return integrate_on(f.eval, effective_window(f, w), tol, f.breaks).value;
}

ExactSum point_sum(const TestFunction& f, std::span<const double> points) {
  ExactSum s;
  for (double x : points) s.add(f(x));
  return s;
}

double integral_centered(const TestFunction& f, const PoissonSample& s, double comp) {
  ExactSum sum = point_sum(f, s.points);
  sum.add(-comp);
  return sum.value();
}

TailBounds tail_bounds(const TestFunction& f, const Window& w, double tol) {
  TailBounds t{f.l1_tail_bound, f.l2_tail_bound};
  Window missed = subtract(f.support, w);
  if (!missed.empty()) {
    auto abs_f = [&f](double x) { return std::abs(f(x)); };
    auto sq_f = [&f](double x) {
      double v = f(x);
      return v * v;
    };
    auto l1 = integrate_window(abs_f, missed, tol, f.breaks);
    auto l2 = integrate_window(sq_f, missed, tol, f.breaks);
    t.l1 += l1.value + l1.err_bound;
    t.l2 += std::sqrt(l2.value + l2.err_bound);
  }
  return t;
}

MCEstimate summarize(std::span<const double> values, std::uint64_t seed, double truncation_bound) {
  MCEstimate e;
  e.replicates = values.size();
  e.seed = seed;
  e.truncation_bound = truncation_bound;
  if (values.empty()) return e;
  ExactSum sum;
  for (double v : values) sum.add(v);
  double n = static_cast<double>(values.size());
  e.mean = sum.value() / n;
  if (values.size() > 1) {
    ExactSum dev;
    for (double v : values) {
      double d = v - e.mean;
      dev.add(d * d);
    }
    e.std_error = std::sqrt(dev.value() / (n - 1.0) / n);
  }
  return e;
}

MCEstimate estimate_star_norm(const TestFunction& f, const Window& w, std::uint64_t replicates, std::uint64_t seed) {
  require_replicates(replicates);
  double comp = compensator(f, w);
  auto values = parallel_map<double>(replicates, [&](std::size_t r) {
    auto s = sample_process(w, seed, r);
    return std::abs(integral_centered(f, s, comp));
  });
  return summarize(values, seed, tail_bounds(f, w).star_truncation());
}

MCEstimate estimate_starstar_norm(const TestFunction& f, const Window& w, std::uint64_t replicates,
                                  std::uint64_t seed) {
  require_replicates(replicates);
  auto values = parallel_map<double>(replicates, [&](std::size_t r) {
    auto s = sample_process(w, seed, r);
    return std::abs(point_sum(f, s.points).value());
  });
  // E|N(g)| <= ||g||_1 on the omitted part.
  return summarize(values, seed, tail_bounds(f, w).l1);
}

namespace {

// Atoms with equal values share a Poisson count (superposition), so merge them.
std::vector<Atom> merged_atoms(const SimpleFunction& f) {
  std::map<double, double> by_value;
  for (const auto& a : f.atoms()) by_value[a.value] += a.mass;
  std::vector<Atom> out;
  for (const auto& [v, m] : by_value) out.push_back({v, m});
  return out;
}

// Chernoff bound P(N >= k) <= e^{-m} (e m / k)^k for k > m.
double chernoff_tail(double m, double k) {
  if (k <= m) return 1.0;
  return std::exp(-m + k * (1.0 + std::log(m / k)));
}

// Smallest K with P(N >= K) <= budget.
std::size_t truncation_point(double m, double budget) {
  std::size_t k = static_cast<std::size_t>(std::ceil(m)) + 1;
  while (chernoff_tail(m, static_cast<double>(k)) > budget) ++k;
  return k;
}

std::vector<double> poisson_pmf(double m, std::size_t count) {
  std::vector<double> p(count);
  // Log-space start keeps large masses away from underflow.
  for (std::size_t k = 0; k < count; ++k)
    p[k] = std::exp(-m + static_cast<double>(k) * std::log(m) - std::lgamma(static_cast<double>(k) + 1.0));
  return p;
}

constexpr double kMaxExactLeaves = 4e9;

// E|sum v_i (N_i - c m_i)| with c = 1 (centered) or 0.
double abs_moment_exact(const SimpleFunction& f, double tail_eps, bool centered) {
  if (!(tail_eps > 0.0)) fail(ErrorCode::invalid_argument, "tail_eps must be positive");
  if (f.size() > kExactMaxAtoms)
    fail(ErrorCode::limit_exceeded, "exact star norm supports at most " + std::to_string(kExactMaxAtoms) +
                                        " atoms (got " + std::to_string(f.size()) + ")");
  for (const auto& a : f.atoms())
    if (a.mass > kExactMaxMass)
      fail(ErrorCode::limit_exceeded, "exact star norm supports masses <= 30 (got " + std::to_string(a.mass) + ")");
  if (f.empty()) return 0.0;

  auto atoms = merged_atoms(f);
  // The largest-mass atom is handled in closed form; the rest are enumerated.
  auto last_it = std::max_element(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.mass < b.mass; });
  Atom last = *last_it;
  atoms.erase(last_it);

  double l1 = 0.0;
  for (const auto& a : f.atoms()) l1 += std::abs(a.value) * a.mass;
  // Cutting N_i at K_i loses E[|Z| 1{N_i >= K_i}] <= P(N_i >= K_i - 1) (|v_i| m_i + 2 ||f||_1).
  std::vector<std::vector<double>> pmfs;
  double leaves = 1.0;
  for (const auto& a : atoms) {
    double budget = tail_eps / (static_cast<double>(atoms.size()) * (std::abs(a.value) * a.mass + 2.0 * l1));
    std::size_t k = truncation_point(a.mass, budget) + 1;
    pmfs.push_back(poisson_pmf(a.mass, k));
    leaves *= static_cast<double>(k);
  }
  if (leaves > kMaxExactLeaves)
    fail(ErrorCode::limit_exceeded, "exact star norm would enumerate " + std::to_string(leaves) + " configurations");

  // Closed form for E|N - s| with N ~ Poisson(m): (m - s) + 2 (s F(j) - m F(j-1)), j = floor(s).
  const double m = last.mass;
  std::size_t table = static_cast<std::size_t>(m + 40.0 * std::sqrt(m) + 60.0);
  auto p = poisson_pmf(m, table);
  std::vector<double> cdf(table);
  {
    ExactSum acc;
    for (std::size_t k = 0; k < table; ++k) {
      acc.add(p[k]);
      cdf[k] = std::min(1.0, acc.value());
    }
  }
  auto cdf_at = [&](long j) -> double {
    if (j < 0) return 0.0;
    if (static_cast<std::size_t>(j) >= table) return 1.0;
    return cdf[static_cast<std::size_t>(j)];
  };
  auto mad_shift = [&](double s) -> double {
    if (s < 0.0) return m - s;
    long j = static_cast<long>(std::floor(s));
    return (m - s) + 2.0 * (s * cdf_at(j) - m * cdf_at(j - 1));
  };
  const double inv_v = 1.0 / last.value;
  const double abs_v = std::abs(last.value);

  ExactSum total;
  std::vector<std::size_t> idx(atoms.size(), 0);
  // Odometer over the truncated counts of the enumerated atoms.
  for (;;) {
    double prob = 1.0;
    double rest = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      prob *= pmfs[i][idx[i]];
      rest += atoms[i].value * (static_cast<double>(idx[i]) - (centered ? atoms[i].mass : 0.0));
    }
    if (prob > 0.0) total.add(prob * abs_v * mad_shift((centered ? m : 0.0) - rest * inv_v));
    std::size_t i = 0;
    while (i < atoms.size()) {
      if (++idx[i] < pmfs[i].size()) break;
      idx[i] = 0;
      ++i;
    }
    if (i == atoms.size()) break;
  }
  return total.value();
}

}  // namespace

double star_norm_exact(const SimpleFunction& f, double tail_eps) { return abs_moment_exact(f, tail_eps, true); }

double starstar_norm_exact(const SimpleFunction& f, double tail_eps) { return abs_moment_exact(f, tail_eps, false); }

namespace {

struct GaussRule {
  std::vector<double> x, w;  // on [-1, 1]
};

GaussRule legendre_rule(int n) {
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    r.x[i] = z;
    r.w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return r;
}

const GaussRule& rule20() {
  static const GaussRule r = legendre_rule(20);
  return r;
}
const GaussRule& rule10() {
  static const GaussRule r = legendre_rule(10);
  return r;
}

// 1 - Re E e^{itZ}, with -a = sum m (1 - cos tv) and b = sum m (sin tv - tv), from the
// per-atom (sin tv, cos tv) pairs.
double hsu_numerator(std::span<const Atom> atoms, std::span<const double> s, std::span<const double> c, double t) {
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    double tv = t * atoms[i].value;
    double one_minus_cos = c[i] >= 0.0 ? s[i] * s[i] / (1.0 + c[i]) : 1.0 - c[i];
    a -= atoms[i].mass * one_minus_cos;
    double sin_minus = 0.0;
    if (std::abs(tv) < 0.5) {
      double x2 = tv * tv;
      // -x^3/3! + x^5/5! - ... to full precision for |x| < 0.5.
      double term = -tv * x2 / 6.0;
      sin_minus = term;
      for (int k = 2; k < 12; ++k) {
        term *= -x2 / ((2.0 * k) * (2.0 * k + 1.0));
        sin_minus += term;
      }
    } else {
      sin_minus = s[i] - tv;
    }
    b += atoms[i].mass * sin_minus;
  }
  double sb = std::sin(0.5 * b);
  return -std::expm1(a) + std::exp(a) * 2.0 * sb * sb;
}

}  // namespace

NormValue star_norm_hsu(const SimpleFunction& f, double tol) {
  if (!(tol > 0.0)) fail(ErrorCode::invalid_argument, "tol must be positive");
  NormValue out;
  if (f.empty()) return out;
  auto atoms = merged_atoms(f);
  // The integral over [T, inf) equals 1/T - int_T^inf Re(phi)/t^2, and the second
  // term is at most 1/T in absolute value.
  const double t_max = 4.0 / (std::numbers::pi * tol);
  // Panel width from the effective frequency range of Z.
  double band = 0.0;
  for (const auto& a : atoms) band += std::abs(a.value) * (a.mass + 4.0 * std::sqrt(a.mass) + 4.0);
  double width = std::min(1.0, 12.0 / band);
  std::size_t panels = static_cast<std::size_t>(std::ceil(t_max / width));
  if (panels > 200'000'000)
    fail(ErrorCode::limit_exceeded, "Hsu integral needs too many panels; loosen tol");
  double t_end = static_cast<double>(panels) * width;

  const auto& g20 = rule20();
  const auto& g10 = rule10();
  const std::size_t na = atoms.size();
  // Node offsets are shared by every panel, so their rotations are tabulated once.
  auto offsets = [&](const GaussRule& g) {
    std::vector<double> d(g.x.size());
    for (std::size_t j = 0; j < d.size(); ++j) d[j] = 0.5 * width * (g.x[j] + 1.0);
    return d;
  };
  auto d20 = offsets(g20), d10 = offsets(g10);
  auto rot_table = [&](const std::vector<double>& d, std::vector<double>& sd, std::vector<double>& cd) {
    sd.resize(d.size() * na);
    cd.resize(d.size() * na);
    for (std::size_t j = 0; j < d.size(); ++j)
      for (std::size_t i = 0; i < na; ++i) {
        sd[j * na + i] = std::sin(d[j] * atoms[i].value);
        cd[j * na + i] = std::cos(d[j] * atoms[i].value);
      }
  };
  std::vector<double> sd20, cd20, sd10, cd10;
  rot_table(d20, sd20, cd20);
  rot_table(d10, sd10, cd10);

  struct PanelSums {
    double hi = 0.0, lo = 0.0;
  };
  auto panel = [&](std::size_t k) {
    double t0 = static_cast<double>(k) * width;
    std::vector<double> s0(na), c0(na), s(na), c(na);
    for (std::size_t i = 0; i < na; ++i) {
      s0[i] = std::sin(t0 * atoms[i].value);
      c0[i] = std::cos(t0 * atoms[i].value);
    }
    auto eval_rule = [&](const GaussRule& g, const std::vector<double>& d, const std::vector<double>& sd,
                         const std::vector<double>& cd) {
      double acc = 0.0;
      for (std::size_t j = 0; j < d.size(); ++j) {
        double t = t0 + d[j];
        for (std::size_t i = 0; i < na; ++i) {
          double sj = sd[j * na + i], cj = cd[j * na + i];
          s[i] = s0[i] * cj + c0[i] * sj;
          c[i] = c0[i] * cj - s0[i] * sj;
        }
        if (k == 0) {
          for (std::size_t i = 0; i < na; ++i) {
            s[i] = std::sin(t * atoms[i].value);
            c[i] = std::cos(t * atoms[i].value);
          }
        }
        acc += g.w[j] * hsu_numerator(atoms, s, c, t) / (t * t);
      }
      return 0.5 * width * acc;
    };
    return PanelSums{eval_rule(g20, d20, sd20, cd20), eval_rule(g10, d10, sd10, cd10)};
  };

  constexpr std::size_t kBlock = 4096;
  std::size_t blocks = (panels + kBlock - 1) / kBlock;
  auto block_sums = parallel_map<std::pair<double, double>>(blocks, [&](std::size_t b) {
    ExactSum value, err;
    std::size_t end = std::min(panels, (b + 1) * kBlock);
    for (std::size_t k = b * kBlock; k < end; ++k) {
      auto ps = panel(k);
      value.add(ps.hi);
      err.add(std::abs(ps.hi - ps.lo));
    }
    return std::pair{value.value(), err.value()};
  });
  ExactSum value, err;
  for (const auto& [v, e] : block_sums) {
    value.add(v);
    err.add(e);
  }
  value.add(1.0 / t_end);
  const double scale = 2.0 / std::numbers::pi;
  out.value = scale * value.value();
  // The 10-point rule error dominates the 20-point one, so the gap is a safe estimate.
  out.err = scale * (err.value() + 1.0 / t_end);
  if (out.err > tol)
    fail(ErrorCode::non_convergence, "Hsu integral error estimate " + std::to_string(out.err) +
                                         " exceeds tol (partial value " + std::to_string(out.value) + ")");
  return out;
}

NormValue star_norm_hsu(const TestFunction& f, double tol) {
  if (f.support.empty()) return {};
  auto d = discretize(f, 0.25 * tol);
  // |E|I(f)| - E|I(g)|| <= ||f - g||_2; the fine/coarse gap estimates it.
  auto fine = star_norm_hsu(d.fine, 0.5 * tol);
  NormValue out;
  out.value = fine.value;
  out.discretized = true;
  double gap = 0.0;
  if (!d.coarse.empty()) gap = std::abs(fine.value - star_norm_hsu(d.coarse, 0.5 * tol).value);
  out.err = fine.err + gap + d.quad_err;
  return out;
}

PairedEstimate mecke_check(const MeckeFunctional& phi, const Window& w, std::uint64_t replicates, std::uint64_t seed,
                           double quad_tol) {
  require_replicates(replicates);
  struct Pair {
    double lhs = 0.0, rhs = 0.0;
  };
  auto pairs = parallel_map<Pair>(replicates, [&](std::size_t r) {
    auto s = sample_process(w, seed, r);
    ExactSum lhs;
    for (double x : s.points) lhs.add(phi.phi(x, s.points));
    std::vector<double> with = s.points;
    with.push_back(0.0);
    std::vector<double> breaks = phi.breaks;
    breaks.insert(breaks.end(), s.points.begin(), s.points.end());
    std::sort(breaks.begin(), breaks.end());
    RealMap inner = [&](double x) {
      with.back() = x;
      return phi.phi(x, with);
    };
    double rhs = integrate_window(inner, w, quad_tol, breaks).value;
    return Pair{lhs.value(), rhs};
  });
  std::vector<double> l(replicates), rr(replicates), d(replicates);
  for (std::size_t i = 0; i < replicates; ++i) {
    l[i] = pairs[i].lhs;
    rr[i] = pairs[i].rhs;
    d[i] = pairs[i].lhs - pairs[i].rhs;
  }
  return {summarize(l, seed), summarize(rr, seed), summarize(d, seed)};
}

DifferenceResult difference_check(const TestFunction& f, const PoissonSample& s, double x, double comp) {
  if (!s.window.contains(x)) fail(ErrorCode::precondition, "difference_check: x lies outside the sample window");
  ExactSum with = point_sum(f, s.points);
  with.add(f(x));
  with.add(-comp);
  ExactSum without = point_sum(f, s.points);
  without.add(-comp);
  return {(with - without).value(), f(x)};
}

SecondMomentResult second_moment_check(const TestFunction& f, const Window& w, std::uint64_t replicates,
                                       std::uint64_t seed) {
  require_replicates(replicates);
  double comp = compensator(f, w);
  auto values = parallel_map<double>(replicates, [&](std::size_t r) {
    return integral_centered(f, sample_process(w, seed, r), comp);
  });
  MCEstimate first = summarize(values, seed);
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    double d = values[i] - first.mean;
    sq[i] = d * d;
  }
  SecondMomentResult out;
  out.sample_var = summarize(sq, seed);
  double n = static_cast<double>(values.size());
  out.sample_var.mean *= n / (n - 1.0);
  auto sq_f = [&f](double x) {
    double v = f(x);
    return v * v;
  };
  out.l2sq = integrate_on(sq_f, effective_window(f, w), kCompensatorTol, f.breaks).value;
  return out;
}

ReducedMomentResult reduced_moment_check(const TestFunction& g, const TestFunction& h, const Window& w,
                                         std::uint64_t replicates, std::uint64_t seed) {
  require_replicates(replicates);
  auto values = parallel_map<double>(replicates, [&](std::size_t r) {
    auto s = sample_process(w, seed, r);
    ExactSum ng, nh, ngh;
    for (double x : s.points) {
      double gx = g(x), hx = h(x);
      ng.add(gx);
      nh.add(hx);
      ngh.add(gx * hx);
    }
    return ng.value() * nh.value() - ngh.value();
  });
  ReducedMomentResult out;
  out.lhs = summarize(values, seed);
  out.rhs = compensator(g, w) * compensator(h, w);
  return out;
}

namespace {

struct Compensators {
  double base = 0.0, base_err = 0.0;
  double pulled = 0.0, pulled_err = 0.0;
};

// `scale` bounds the integrals whose quadrature sums were rounded.
double rounding_slack(double a, double b, const ExactSum& points, std::span<const double> values, double scale) {
  double mag = std::abs(a) + std::abs(b) + std::abs(points.value()) + scale;
  for (double v : values) mag = std::max(mag, std::abs(v));
  return 8.0 * std::numeric_limits<double>::epsilon() * mag;
}

}  // namespace

IdentityPair equivariance_check(const TestFunction& f, const DynamicalSystem& sys, const PoissonSample& s,
                                double quad_tol) {
  if (!f.exact_support()) fail(ErrorCode::precondition, "equivariance_check needs an exactly supported f");
  Window pre = sys.pullback(f.support);
  if (!s.window.contains(pre))
    fail(ErrorCode::precondition, "equivariance_check: window must contain the preimage of supp f");
  auto base = integrate_on(f.eval, f.support, quad_tol, f.breaks);
  RealMap fT = [&](double x) {
    double y = sys.forward(x);
    return std::isnan(y) ? 0.0 : f(y);
  };
  std::vector<double> pulled_breaks;
  for (double b : f.breaks)
    for (const auto& p : sys.preimages(b).view()) pulled_breaks.push_back(p.y);
  std::sort(pulled_breaks.begin(), pulled_breaks.end());
  auto pulled = integrate_on(fT, intersect(s.window, pre), quad_tol, pulled_breaks);

  ExactSum pushed;
  std::vector<double> vals;
  for (double x : s.points) {
    double v = fT(x);
    vals.push_back(v);
    pushed.add(v);
  }
  ExactSum lhs = pushed, rhs = pushed;
  lhs.add(-base.value);
  rhs.add(-pulled.value);
  IdentityPair out{lhs.value(), rhs.value(), 0.0};
  out.tolerance = base.err_bound + pulled.err_bound + rounding_slack(out.lhs, out.rhs, pushed, vals, std::abs(base.value) + std::abs(pulled.value));
  return out;
}

IdentityPair coboundary_check(const TestFunction& f, const DynamicalSystem& sys, const PoissonSample& s,
                              double quad_tol) {
  if (!f.exact_support()) fail(ErrorCode::precondition, "coboundary_check needs an exactly supported f");
  Window pre = sys.pullback(f.support);
  if (!s.window.contains(pre) || !s.window.contains(f.support))
    fail(ErrorCode::precondition, "coboundary_check: window must contain supp f and its preimage");
  RealMap fT = [&](double x) {
    double y = sys.forward(x);
    return std::isnan(y) ? 0.0 : f(y);
  };
  std::vector<double> breaks = f.breaks;
  for (double b : f.breaks)
    for (const auto& p : sys.preimages(b).view()) breaks.push_back(p.y);
  std::sort(breaks.begin(), breaks.end());
  RealMap diff = [&](double x) { return fT(x) - f(x); };
  Window region = intersect(s.window, pre.united(f.support));
  // Left: I_1(f o T - f) on omega.
  auto comp_diff = integrate_on(diff, region, quad_tol, breaks);
  ExactSum left;
  std::vector<double> vals;
  for (double x : s.points) {
    double v = fT(x) - f(x);
    vals.push_back(v);
    left.add(v);
  }
  left.add(-comp_diff.value);
  // Right: I_1(f)(T_+ omega) - I_1(f)(omega).
  auto comp_f = integrate_on(f.eval, f.support, quad_tol, f.breaks);
  ExactSum right;
  for (double x : s.points) {
    right.add(fT(x));
    right.add(-f(x));
  }
  // The two compensators of f cancel exactly in the windowed form.
  right.add(-comp_f.value);
  right.add(comp_f.value);
  ExactSum points;
  for (double v : vals) points.add(v);
  // f o T - f cancels inside the quadrature, so its rounding scales with 2 int |f|.
  auto abs_f = integrate_on([&](double x) { return std::abs(f(x)); }, f.support, quad_tol, f.breaks);
  IdentityPair out{left.value(), right.value(), 0.0};
  out.tolerance = comp_diff.err_bound + 2.0 * comp_f.err_bound +
                  rounding_slack(out.lhs, out.rhs, points, vals, 2.0 * abs_f.value);
  return out;
}

}  // namespace pol
