#include "dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "error.hpp"
#include "quadrature.hpp"

namespace pol {

double DynamicalSystem::forward_n(double x, long n) const {
  for (long k = 0; k < n; ++k) x = forward(x);
  return x;
}

Window DynamicalSystem::backward_inflate(const Window& w, long n) const {
  Window out = w;
  Window level = w;
  for (long k = 0; k < n; ++k) {
    level = pullback(level);
    out = out.united(level);
  }
  return out;
}

namespace {

class Translation final : public DynamicalSystem {
 public:
  explicit Translation(double step) : step_(step) {}
  SystemKind kind() const override { return SystemKind::translation; }
  std::string name() const override {
    std::ostringstream os;
    os << "translation(" << step_ << ")";
    return os.str();
  }
  double forward(double x) const override { return x + step_; }
  double forward_n(double x, long n) const override { return x + static_cast<double>(n) * step_; }
  Preimages preimages(double x) const override {
    Preimages p;
    p.items[0] = {x - step_, 1.0};
    p.count = 1;
    return p;
  }
  Window pullback(const Window& w) const override { return w.shifted(-step_); }
  Window backward_inflate(const Window& w, long n) const override {
    std::vector<Interval> ivs;
    for (long k = 0; k <= n; ++k)
      for (const auto& iv : w.intervals())
        ivs.push_back({iv.lo - static_cast<double>(k) * step_, iv.hi - static_cast<double>(k) * step_});
    return Window(std::move(ivs));
  }
  std::optional<Window> forward_image(const Window& w) const override { return w.shifted(step_); }
  bool invertible() const override { return true; }

 private:
  double step_;
};

// Inverse branches of x -> x - 1/x: beta_plus > 0 > beta_minus, both increasing in x.
struct BooleBranches {
  double plus, minus;
};

BooleBranches boole_branches(double x) {
  double s = std::sqrt(x * x + 4.0);
  if (x >= 0.0) {
    double yp = 0.5 * (x + s);
    return {yp, -1.0 / yp};
  }
  double ym = 0.5 * (x - s);
  return {-1.0 / ym, ym};
}

double boole_weight(double y) {
  double y2 = y * y;
  return y2 / (1.0 + y2);
}

class Boole final : public DynamicalSystem {
 public:
  SystemKind kind() const override { return SystemKind::boole; }
  std::string name() const override { return "boole"; }
  double forward(double x) const override {
    if (x == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return x - 1.0 / x;
  }
  Preimages preimages(double x) const override {
    auto b = boole_branches(x);
    Preimages p;
    p.items[0] = {b.plus, boole_weight(b.plus)};
    p.items[1] = {b.minus, boole_weight(b.minus)};
    p.count = 2;
    return p;
  }
  Window pullback(const Window& w) const override {
    std::vector<Interval> ivs;
    for (const auto& iv : w.intervals()) {
      auto lo = boole_branches(iv.lo);
      auto hi = boole_branches(iv.hi);
      ivs.push_back({lo.plus, hi.plus});
      ivs.push_back({lo.minus, hi.minus});
    }
    return Window(std::move(ivs));
  }
  // |beta(x)| <= |x| + 1, so depth-k pullbacks of [-a, a] stay in [-a - k, a + k].
  Window backward_inflate(const Window& w, long n) const override {
    if (w.empty()) return w;
    double a = std::max(std::abs(w.lo()), std::abs(w.hi()));
    return Window::interval(-a - static_cast<double>(n) - 1.0, a + static_cast<double>(n) + 1.0);
  }
  std::optional<Window> forward_image(const Window& w) const override {
    std::vector<Interval> ivs;
    for (const auto& iv : w.intervals()) {
      if (iv.lo <= 0.0 && iv.hi >= 0.0) return std::nullopt;
      ivs.push_back({forward(iv.lo), forward(iv.hi)});
    }
    return Window(std::move(ivs));
  }
};

double wrap_unit(double x) {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

class Composite final : public DynamicalSystem {
 public:
  Composite(double angle, double step) : angle_(angle), step_(step) {}
  SystemKind kind() const override { return SystemKind::composite; }
  std::string name() const override {
    std::ostringstream os;
    os << "composite(angle=" << angle_ << ",step=" << step_ << ")";
    return os.str();
  }
  double forward(double x) const override { return move(x, angle_, step_); }
  Preimages preimages(double x) const override {
    Preimages p;
    p.items[0] = {move(x, -angle_, -step_), 1.0};
    p.count = 1;
    return p;
  }
  Window pullback(const Window& w) const override { return move_window(w, -angle_, -step_); }
  std::optional<Window> forward_image(const Window& w) const override { return move_window(w, angle_, step_); }
  bool invertible() const override { return true; }

 private:
  static bool on_circle(double x) { return x >= 0.0 && x < 1.0; }
  static double decode(double x) { return x < 0.0 ? x : x - 1.0; }
  static double encode(double u) { return u < 0.0 ? u : u + 1.0; }

  static double move(double x, double angle, double step) {
    if (on_circle(x)) return wrap_unit(x + angle);
    return encode(decode(x) + step);
  }

  static Window move_window(const Window& w, double angle, double step) {
    std::vector<Interval> out;
    auto emit_line = [&](double ulo, double uhi) {
      ulo += step;
      uhi += step;
      if (uhi <= 0.0) {
        out.push_back({ulo, uhi});
      } else if (ulo >= 0.0) {
        out.push_back({ulo + 1.0, uhi + 1.0});
      } else {
        out.push_back({ulo, 0.0});
        out.push_back({1.0, uhi + 1.0});
      }
    };
    for (const auto& iv : w.intervals()) {
      if (iv.lo < 0.0) emit_line(iv.lo, std::min(iv.hi, 0.0));
      if (iv.hi > 1.0) emit_line(std::max(iv.lo, 1.0) - 1.0, iv.hi - 1.0);
      double clo = std::max(iv.lo, 0.0), chi = std::min(iv.hi, 1.0);
      if (clo < chi) {
        double a = clo + angle - std::floor(clo + angle);
        double b = a + (chi - clo);
        if (b <= 1.0) {
          out.push_back({a, b});
        } else {
          out.push_back({a, 1.0});
          out.push_back({0.0, b - 1.0});
        }
      }
    }
    std::erase_if(out, [](const Interval& iv) { return !(iv.lo < iv.hi); });
    return Window(std::move(out));
  }

  double angle_;
  double step_;
};

}  // namespace

SystemPtr make_translation(double step) {
  if (step == 0.0 || !std::isfinite(step)) fail(ErrorCode::invalid_argument, "translation step must be nonzero");
  return std::make_shared<Translation>(step);
}

SystemPtr make_boole() { return std::make_shared<Boole>(); }

SystemPtr make_composite(double angle, double step) {
  if (step == 0.0 || !std::isfinite(step) || !std::isfinite(angle))
    fail(ErrorCode::invalid_argument, "composite system needs a finite angle and a nonzero step");
  return std::make_shared<Composite>(angle, step);
}

Window composite_circle() { return Window::interval(0.0, 1.0); }

namespace {

constexpr std::size_t kMaxTrackedBreaks = 4096;

// Pulls break points back through T^k for every k in `times`, giving up (returning
// an empty list) once the preimage tree grows past the tracking budget.
std::vector<double> pulled_breaks(const std::vector<double>& breaks, const DynamicalSystem& sys,
                                  std::span<const long> times) {
  std::vector<double> out;
  if (breaks.empty() || times.empty()) return out;
  long max_t = *std::max_element(times.begin(), times.end());
  std::vector<double> level = breaks;
  std::vector<bool> wanted(static_cast<std::size_t>(max_t) + 1, false);
  for (long t : times) wanted[static_cast<std::size_t>(t)] = true;
  for (long k = 1; k <= max_t; ++k) {
    std::vector<double> next;
    for (double b : level) {
      auto p = sys.preimages(b);
      for (const auto& q : p.view()) next.push_back(q.y);
    }
    if (next.size() > kMaxTrackedBreaks || out.size() + next.size() > 4 * kMaxTrackedBreaks) return {};
    level = std::move(next);
    if (wanted[static_cast<std::size_t>(k)]) out.insert(out.end(), level.begin(), level.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Window pulled_support(const TestFunction& f, const DynamicalSystem& sys, std::span<const long> times) {
  if (f.support.empty()) return f.support;
  long max_t = *std::max_element(times.begin(), times.end());
  if (!sys.invertible()) return sys.backward_inflate(f.support, max_t);
  std::vector<bool> wanted(static_cast<std::size_t>(max_t) + 1, false);
  for (long t : times) wanted[static_cast<std::size_t>(t)] = true;
  Window out;
  Window level = f.support;
  for (long k = 1; k <= max_t; ++k) {
    level = sys.pullback(level);
    if (wanted[static_cast<std::size_t>(k)]) out = out.united(level);
  }
  return out;
}

}  // namespace

TestFunction compose(const TestFunction& f, const SystemPtr& sys, long k) {
  if (k < 0) fail(ErrorCode::invalid_argument, "compose: k must be nonnegative");
  if (k == 0) return f;
  const long times[] = {k};
  TestFunction g;
  g.eval = [e = f.eval, sys, k](double x) {
    double y = sys->forward_n(x, k);
    return std::isnan(y) ? 0.0 : e(y);
  };
  g.support = pulled_support(f, *sys, times);
  g.sup_bound = f.sup_bound;
  // Composition preserves Lebesgue measure, hence the tail norms.
  g.l1_tail_bound = f.l1_tail_bound;
  g.l2_tail_bound = f.l2_tail_bound;
  g.breaks = pulled_breaks(f.breaks, *sys, times);
  return g;
}

TestFunction birkhoff_along(const TestFunction& f, const SystemPtr& sys, std::span<const long> times) {
  if (times.empty()) fail(ErrorCode::invalid_argument, "birkhoff average needs at least one time");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 1) fail(ErrorCode::invalid_argument, "birkhoff times must be >= 1");
    if (i > 0 && times[i] <= times[i - 1]) fail(ErrorCode::invalid_argument, "birkhoff times must increase strictly");
  }
  std::vector<long> ts(times.begin(), times.end());
  double inv_n = 1.0 / static_cast<double>(ts.size());
  bool consecutive = ts.front() == 1 && ts.back() == static_cast<long>(ts.size());
  TestFunction g;
  g.eval = [e = f.eval, sys, ts, inv_n, consecutive](double x) {
    double acc = 0.0;
    if (consecutive && sys->kind() != SystemKind::translation) {
      double y = x;
      for (std::size_t k = 0; k < ts.size(); ++k) {
        y = sys->forward(y);
        if (std::isnan(y)) break;
        acc += e(y);
      }
    } else if (sys->kind() == SystemKind::translation) {
      for (long t : ts) acc += e(sys->forward_n(x, t));
    } else {
      double y = x;
      long at = 0;
      for (long t : ts) {
        y = sys->forward_n(y, t - at);
        at = t;
        if (std::isnan(y)) break;
        acc += e(y);
      }
    }
    return acc * inv_n;
  };
  g.support = pulled_support(f, *sys, ts);
  g.sup_bound = f.sup_bound;
  g.l1_tail_bound = f.l1_tail_bound;
  g.l2_tail_bound = f.l2_tail_bound;
  g.breaks = pulled_breaks(f.breaks, *sys, ts);
  return g;
}

TestFunction birkhoff(const TestFunction& f, const SystemPtr& sys, long n) {
  if (n < 1) fail(ErrorCode::invalid_argument, "birkhoff depth must be >= 1");
  std::vector<long> ts(static_cast<std::size_t>(n));
  for (long k = 0; k < n; ++k) ts[static_cast<std::size_t>(k)] = k + 1;
  return birkhoff_along(f, sys, ts);
}

namespace {

// Supports S_r of T-hat^r f for r = 0..n as closed intervals with possibly infinite
// ends; nullopt once the image covers the line.
std::vector<std::optional<Interval>> boole_support_chain(const TestFunction& f, long n) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  auto image_end = [](double x, bool upper) {
    if (std::isinf(x)) return x;
    if (x == 0.0) return upper ? inf : -inf;
    return x - 1.0 / x;
  };
  std::vector<std::optional<Interval>> chain;
  std::optional<Interval> s;
  if (!f.support.empty() && f.exact_support()) s = Interval{f.support.lo(), f.support.hi()};
  chain.push_back(s);
  for (long r = 1; r <= n; ++r) {
    if (s && s->lo >= 0.0) {
      // x - 1/x increases on (0, inf); a closed end at 0 opens to -inf.
      s = Interval{s->lo == 0.0 ? -inf : image_end(s->lo, false), image_end(s->hi, true)};
    } else if (s && s->hi <= 0.0) {
      s = Interval{image_end(s->lo, false), s->hi == 0.0 ? inf : image_end(s->hi, true)};
    } else {
      s.reset();
    }
    if (s && std::isinf(s->lo) && std::isinf(s->hi)) s.reset();
    chain.push_back(s);
  }
  return chain;
}

struct BooleTransfer {
  RealMap base;
  std::vector<std::optional<Interval>> chain;

  bool outside(double x, long r) const {
    const auto& s = chain[static_cast<std::size_t>(r)];
    return s && (x < s->lo || x > s->hi);
  }

  double eval_pruned(double x, long r) const {
    if (outside(x, r)) return 0.0;
    if (r == 0) return base(x);
    auto b = boole_branches(x);
    return boole_weight(b.plus) * eval_pruned(b.plus, r - 1) + boole_weight(b.minus) * eval_pruned(b.minus, r - 1);
  }

  // Levels whose support is the whole line are expanded breadth-first without
  // branching: with r the root of larger magnitude, the other root is -1/r and
  // the two weights are r^2/(1+r^2) and 1/(1+r^2).
  double eval(double x, long n) const {
    long open = 0;
    while (open < n && !chain[static_cast<std::size_t>(n - open)]) ++open;
    if (open == 0) return eval_pruned(x, n);
    thread_local std::vector<double> ys, ws, ny, nw;
    ys.assign(1, x);
    ws.assign(1, 1.0);
    for (long level = 0; level < open; ++level) {
      std::size_t m = ys.size();
      ny.resize(2 * m);
      nw.resize(2 * m);
      for (std::size_t i = 0; i < m; ++i) {
        double y = ys[i];
        double big = std::copysign(0.5 * (std::abs(y) + std::sqrt(y * y + 4.0)), y);
        double inv = 1.0 / (1.0 + big * big);
        ny[2 * i] = big;
        ny[2 * i + 1] = -1.0 / big;
        nw[2 * i] = ws[i] * (1.0 - inv);
        nw[2 * i + 1] = ws[i] * inv;
      }
      std::swap(ys, ny);
      std::swap(ws, nw);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) acc += ws[i] * eval_pruned(ys[i], n - open);
    return acc;
  }
};

}  // namespace

TestFunction transfer_apply(const TestFunction& f, const SystemPtr& sys, long n, const TransferOptions& opts) {
  if (n < 0) fail(ErrorCode::invalid_argument, "transfer depth must be nonnegative");
  if (n == 0) return f;
  if (sys->invertible()) {
    // T-hat f = f o T^{-1} for invertible measure-preserving T.
    TestFunction g;
    g.eval = [e = f.eval, sys, n](double x) {
      double y = x;
      for (long k = 0; k < n; ++k) y = sys->preimages(y).items[0].y;
      return e(y);
    };
    if (sys->kind() == SystemKind::translation) {
      double shift = sys->forward_n(0.0, n);
      g.eval = [e = f.eval, shift](double x) { return e(x - shift); };
    }
    Window w = f.support;
    std::vector<double> br = f.breaks;
    for (long k = 0; k < n; ++k) {
      w = *sys->forward_image(w);
      for (double& b : br) b = sys->forward(b);
    }
    std::sort(br.begin(), br.end());
    g.support = w;
    g.sup_bound = f.sup_bound;
    g.l1_tail_bound = f.l1_tail_bound;
    g.l2_tail_bound = f.l2_tail_bound;
    g.breaks = std::move(br);
    return g;
  }
  if (n > kBooleMaxTransferDepth)
    fail(ErrorCode::limit_exceeded, "transfer depth " + std::to_string(n) + " exceeds the branch-enumeration limit " +
                                        std::to_string(kBooleMaxTransferDepth));
  auto chain = boole_support_chain(f, n);
  auto op = std::make_shared<BooleTransfer>(BooleTransfer{f.eval, chain});
  auto abs_op = std::make_shared<BooleTransfer>(BooleTransfer{[e = f.eval](double x) { return std::abs(e(x)); }, chain});

  TestFunction g;
  g.eval = [op, n](double x) { return op->eval(x, n); };
  g.sup_bound = f.sup_bound;  // T-hat is an L-infinity contraction.
  for (double b : f.breaks) {
    double y = sys->forward_n(b, n);
    if (std::isfinite(y)) g.breaks.push_back(y);
  }
  std::sort(g.breaks.begin(), g.breaks.end());

  if (chain.back() && std::isfinite(chain.back()->lo) && std::isfinite(chain.back()->hi)) {
    g.support = Window::interval(chain.back()->lo, chain.back()->hi);
    g.l1_tail_bound = f.l1_tail_bound;
    g.l2_tail_bound = f.l2_tail_bound;
    return g;
  }

  // Unbounded image: grow a symmetric window until the missing |f| mass is small.
  TestFunction abs_f = absolute(f);
  double total = f.support.empty() ? 0.0 : integrate_window(abs_f.eval, f.support, opts.quad_tol, f.breaks).value;
  RealMap abs_t = [abs_op, n](double x) { return abs_op->eval(x, n); };
  double half = std::max({4.0, std::abs(f.support.lo()), std::abs(f.support.hi())});
  double deficit = total;
  double quad_err = 0.0;
  for (int it = 0; it < 40; ++it) {
    auto r = integrate_interval(abs_t, -half, half, opts.quad_tol, g.breaks);
    deficit = std::max(0.0, total - r.value);
    quad_err = r.err_bound;
    if (deficit <= opts.window_tol) break;
    half *= 1.5;
  }
  if (deficit > opts.window_tol)
    fail(ErrorCode::non_convergence, "transfer window did not capture the requested mass");
  g.support = Window::interval(-half, half);
  g.l1_tail_bound = deficit + quad_err + f.l1_tail_bound;
  // L2 tail by quadrature of the squared image outside the window, through x = tan(theta).
  RealMap sq = [op, n](double x) {
    double v = op->eval(x, n);
    return v * v;
  };
  const double edge = std::atan(half);
  RealMap mapped = [&sq](double t) {
    double c = std::cos(t);
    return c == 0.0 ? 0.0 : sq(std::tan(t)) / (c * c);
  };
  constexpr double half_pi = std::numbers::pi / 2.0;
  auto right = integrate_interval(mapped, edge, half_pi, opts.quad_tol);
  auto left = integrate_interval(mapped, -half_pi, -edge, opts.quad_tol);
  double l2sq = right.value + left.value + right.err_bound + left.err_bound;
  g.l2_tail_bound = std::sqrt(std::max(0.0, l2sq)) + f.l2_tail_bound;
  return g;
}

}  // namespace pol
