#include "orlicz.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "error.hpp"

namespace pol {

double young_phi(double x) {
  if (!(x >= 0.0)) fail(ErrorCode::domain, "young_phi: argument must be nonnegative");
  return x <= 1.0 ? x * x : 2.0 * x - 1.0;
}

double young_psi(double y) {
  if (!(y >= 0.0)) fail(ErrorCode::domain, "young_psi: argument must be nonnegative");
  return y <= 2.0 ? y * y : kInfinity;
}

namespace {

double phi_abs(double v) {
  double a = std::abs(v);
  return a <= 1.0 ? a * a : 2.0 * a - 1.0;
}

double scaled_modular(std::span<const Atom> atoms, double inv_lambda) {
  double s = 0.0;
  for (const auto& a : atoms) s += a.mass * phi_abs(a.value * inv_lambda);
  return s;
}

// Bisection on a strictly monotone bracketed unknown until the bracket stops shrinking
// or its relative width drops under rel_tol.
template <class Pred>
double bisect(double lo, double hi, double rel_tol, Pred below) {
  for (int it = 0; it < 400; ++it) {
    double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    if (below(mid))
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= rel_tol * hi) break;
  }
  return 0.5 * (lo + hi);
}

double bisect_rel(double rel_tol) { return std::max(rel_tol * 1e-3, 1e-16); }

}  // namespace

double modular(const SimpleFunction& f) { return scaled_modular(f.atoms(), 1.0); }

NormValue modular(const TestFunction& f, double tol) {
  if (f.support.empty()) return {};
  const std::array<double, 1> kinks{kPhiKink};
  auto r = integrate(f, f.support, phi_abs, tol, kinks);
  // Tail: Phi(t) <= min(2t, t^2).
  double tail = std::min(2.0 * f.l1_tail_bound, f.l2_tail_bound * f.l2_tail_bound);
  return {r.value, r.err_bound + tail, false};
}

double gauge_norm(const SimpleFunction& f, double rel_tol) {
  if (f.empty()) return 0.0;
  auto atoms = f.atoms();
  double hi = f.sup_abs();
  while (scaled_modular(atoms, 1.0 / hi) > 1.0) hi *= 2.0;
  double lo = hi;
  while (scaled_modular(atoms, 1.0 / lo) <= 1.0) lo *= 0.5;
  // Modular of f/lambda decreases strictly in lambda.
  return bisect(lo, hi, bisect_rel(rel_tol), [&](double lam) { return scaled_modular(atoms, 1.0 / lam) > 1.0; });
}

double orlicz_norm_paper(const SimpleFunction& f, double rel_tol) {
  if (f.empty()) return 0.0;
  auto atoms = f.atoms();
  double mass = f.total_mass();
  double l1 = simple_moments(f).l1;
  if (4.0 * mass <= 1.0) return 2.0 * l1;
  auto g_of = [](double a, double theta) { return std::min(2.0, a / (2.0 * theta)); };
  auto constraint = [&](double theta) {
    double s = 0.0;
    for (const auto& at : atoms) {
      double g = g_of(std::abs(at.value), theta);
      s += g * g * at.mass;
    }
    return s;
  };
  double hi = f.sup_abs();
  while (constraint(hi) > 1.0) hi *= 2.0;
  double lo = hi;
  while (constraint(lo) <= 1.0) lo *= 0.5;
  double theta = bisect(lo, hi, bisect_rel(rel_tol), [&](double t) { return constraint(t) > 1.0; });
  // Rescale the unsaturated part so the L2 constraint is met with equality.
  double value = 0.0;
  double sat_mass = 0.0, free_sq = 0.0;
  for (const auto& at : atoms) {
    double a = std::abs(at.value);
    if (a / (2.0 * theta) >= 2.0)
      sat_mass += at.mass;
    else
      free_sq += at.mass * a * a;
  }
  if (free_sq > 0.0 && 4.0 * sat_mass < 1.0) {
    double scale = std::sqrt((1.0 - 4.0 * sat_mass) / free_sq);
    for (const auto& at : atoms) {
      double a = std::abs(at.value);
      double g = a / (2.0 * theta) >= 2.0 ? 2.0 : std::min(2.0, a * scale);
      value += a * g * at.mass;
    }
  } else {
    for (const auto& at : atoms) {
      double a = std::abs(at.value);
      value += a * g_of(a, theta) * at.mass;
    }
  }
  return value;
}

double orlicz_norm_amemiya(const SimpleFunction& f, double rel_tol) {
  if (f.empty()) return 0.0;
  auto atoms = f.atoms();
  double min_abs = kInfinity;
  for (const auto& a : atoms) min_abs = std::min(min_abs, std::abs(a.value));
  double mass = f.total_mass();
  double l1 = simple_moments(f).l1;
  // For k >= 1/min|v| every atom sits on the linear branch and the map is 2 l1 + (1 - mass)/k.
  if (mass <= 1.0) return 2.0 * l1;
  double k_max = 1.0 / min_abs;
  auto objective = [&](double k) { return (1.0 + scaled_modular(atoms, k)) / k; };
  double a = std::min(rel_tol, 1e-3 * k_max);
  double b = k_max;
  if (objective(a) <= objective(b))
    fail(ErrorCode::non_convergence, "orlicz_norm_amemiya: bracket [" + std::to_string(a) + ", " +
                                         std::to_string(b) + "] does not enclose the minimum");
  // Golden-section search; the objective is quasi-convex in k.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = objective(c), fd = objective(d);
  for (int it = 0; it < 400 && (b - a) > bisect_rel(rel_tol) * b; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective(d);
    }
  }
  return std::min({fc, fd, objective(k_max)});
}

Discretization discretize(const TestFunction& f, double tol) {
  Discretization out;
  if (f.support.empty()) return out;
  std::vector<QuadCell> cells;
  const std::array<double, 1> kinks{kPhiKink};
  auto r = integrate(f, f.support, phi_abs, tol, kinks, &cells);
  out.quad_err = r.err_bound;
  std::vector<Atom> fine, coarse;
  std::vector<double> x, w;
  for (const auto& c : cells) {
    x.clear();
    w.clear();
    kronrod_nodes(c.lo, c.hi, x, w);
    for (std::size_t i = 0; i < x.size(); ++i) {
      double v = f(x[i]);
      if (v != 0.0 && w[i] > 0.0) fine.push_back({v, w[i]});
    }
    x.clear();
    w.clear();
    gauss_nodes(c.lo, c.hi, x, w);
    for (std::size_t i = 0; i < x.size(); ++i) {
      double v = f(x[i]);
      if (v != 0.0 && w[i] > 0.0) coarse.push_back({v, w[i]});
    }
  }
  out.fine = SimpleFunction(std::move(fine));
  out.coarse = SimpleFunction(std::move(coarse));
  return out;
}

namespace {

NormValue via_discretization(const TestFunction& f, double tol, double (*norm)(const SimpleFunction&, double),
                             double tail_factor) {
  auto d = discretize(f, tol);
  double fine = norm(d.fine, kDefaultRelTol);
  double coarse = norm(d.coarse, kDefaultRelTol);
  double tail = tail_factor * std::min(2.0 * f.l1_tail_bound, f.l2_tail_bound);
  return {fine, std::abs(fine - coarse) + tail, true};
}

}  // namespace

NormValue gauge_norm(const TestFunction& f, double tol) { return via_discretization(f, tol, gauge_norm, 1.0); }

NormValue orlicz_norm_paper(const TestFunction& f, double tol) {
  return via_discretization(f, tol, orlicz_norm_paper, 1.0);
}

NormValue orlicz_norm_amemiya(const TestFunction& f, double tol) {
  return via_discretization(f, tol, orlicz_norm_amemiya, 2.0);
}

BracketCheck check_gauge_orlicz_bracket(double gauge, double orlicz, double tol) {
  BracketCheck c;
  c.lower_slack = orlicz - gauge;
  c.upper_slack = 2.0 * gauge - orlicz;
  c.holds = c.lower_slack >= -tol && c.upper_slack >= -tol;
  return c;
}

}  // namespace pol
