#include "measure_fn.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "error.hpp"

namespace pol {

Window::Window(std::vector<Interval> intervals) {
  for (const auto& iv : intervals) {
    if (!(iv.lo < iv.hi) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi))
      fail(ErrorCode::invalid_argument, "window interval requires finite lo < hi");
  }
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi); });
  for (const auto& iv : intervals) {
    if (!intervals_.empty() && iv.lo <= intervals_.back().hi) {
      intervals_.back().hi = std::max(intervals_.back().hi, iv.hi);
    } else {
      intervals_.push_back(iv);
    }
  }
  for (const auto& iv : intervals_) measure_ += iv.length();
}

Window Window::interval(double lo, double hi) { return Window({Interval{lo, hi}}); }

double Window::lo() const { return intervals_.empty() ? 0.0 : intervals_.front().lo; }
double Window::hi() const { return intervals_.empty() ? 0.0 : intervals_.back().hi; }

bool Window::contains(double x) const {
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), x,
                             [](double v, const Interval& iv) { return v < iv.lo; });
  if (it == intervals_.begin()) return false;
  --it;
  return x <= it->hi;
}

bool Window::contains(const Window& other) const {
  for (const auto& iv : other.intervals_) {
    auto it = std::upper_bound(intervals_.begin(), intervals_.end(), iv.lo,
                               [](double v, const Interval& w) { return v < w.lo; });
    if (it == intervals_.begin()) return false;
    --it;
    if (iv.hi > it->hi) return false;
  }
  return true;
}

Window Window::united(const Window& other) const {
  std::vector<Interval> all(intervals_.begin(), intervals_.end());
  all.insert(all.end(), other.intervals_.begin(), other.intervals_.end());
  return Window(std::move(all));
}

Window Window::shifted(double delta) const {
  std::vector<Interval> out;
  out.reserve(intervals_.size());
  for (const auto& iv : intervals_) out.push_back({iv.lo + delta, iv.hi + delta});
  return Window(std::move(out));
}

Window Window::intersected(const Interval& cut) const {
  std::vector<Interval> out;
  for (const auto& iv : intervals_) {
    double lo = std::max(iv.lo, cut.lo);
    double hi = std::min(iv.hi, cut.hi);
    if (lo < hi) out.push_back({lo, hi});
  }
  return Window(std::move(out));
}

double Window::locate(double u) const {
  if (intervals_.empty()) fail(ErrorCode::precondition, "locate on empty window");
  double target = u * measure_;
  for (const auto& iv : intervals_) {
    double len = iv.length();
    if (target < len) return iv.lo + target;
    target -= len;
  }
  return std::nextafter(intervals_.back().hi, intervals_.back().lo);
}

Window window_union(const Window& a, const Window& b) { return a.united(b); }

TestFunction zero_function() {
  TestFunction f;
  f.eval = [](double) { return 0.0; };
  f.sup_bound = 0.0;
  return f;
}

TestFunction indicator(const Window& w, double value) {
  TestFunction f;
  f.eval = [w, value](double x) { return w.contains(x) ? value : 0.0; };
  f.support = w;
  f.sup_bound = std::abs(value);
  for (const auto& iv : w.intervals()) {
    f.breaks.push_back(iv.lo);
    f.breaks.push_back(iv.hi);
  }
  return f;
}

TestFunction triangular_bump(double lo, double hi, double height) {
  if (!(lo < hi)) fail(ErrorCode::invalid_argument, "bump requires lo < hi");
  TestFunction f;
  double mid = 0.5 * (lo + hi);
  double half = 0.5 * (hi - lo);
  f.eval = [=](double x) {
    double d = std::abs(x - mid);
    return d < half ? height * (1.0 - d / half) : 0.0;
  };
  f.support = Window::interval(lo, hi);
  f.sup_bound = std::abs(height);
  f.breaks = {lo, mid, hi};
  return f;
}

TestFunction piecewise_constant(std::span<const Interval> pieces, std::span<const double> values) {
  if (pieces.size() != values.size()) fail(ErrorCode::invalid_argument, "piecewise_constant: size mismatch");
  std::vector<Interval> ivs(pieces.begin(), pieces.end());
  std::vector<double> vals(values.begin(), values.end());
  Window support(ivs);
  double measured = 0.0;
  for (const auto& iv : ivs) measured += iv.length();
  if (std::abs(measured - support.measure()) > 1e-12 * std::max(1.0, measured))
    fail(ErrorCode::invalid_argument, "piecewise_constant: pieces overlap");
  std::vector<std::size_t> order(ivs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return ivs[a].lo < ivs[b].lo; });
  std::vector<Interval> sorted_iv;
  std::vector<double> sorted_val;
  for (auto i : order) {
    sorted_iv.push_back(ivs[i]);
    sorted_val.push_back(vals[i]);
  }
  TestFunction f;
  f.eval = [sorted_iv, sorted_val](double x) {
    auto it = std::upper_bound(sorted_iv.begin(), sorted_iv.end(), x,
                               [](double v, const Interval& iv) { return v < iv.lo; });
    if (it == sorted_iv.begin()) return 0.0;
    --it;
    return x <= it->hi ? sorted_val[static_cast<std::size_t>(it - sorted_iv.begin())] : 0.0;
  };
  f.support = support;
  double sup = 0.0;
  for (double v : vals) sup = std::max(sup, std::abs(v));
  f.sup_bound = sup;
  for (const auto& iv : sorted_iv) {
    f.breaks.push_back(iv.lo);
    f.breaks.push_back(iv.hi);
  }
  return f;
}

namespace {

std::vector<double> merged_breaks(const TestFunction& a, const TestFunction& b) {
  std::vector<double> out = a.breaks;
  out.insert(out.end(), b.breaks.begin(), b.breaks.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<double> sum_bounds(const std::optional<double>& a, const std::optional<double>& b) {
  if (a && b) return *a + *b;
  return std::nullopt;
}

}  // namespace

TestFunction operator+(const TestFunction& a, const TestFunction& b) {
  TestFunction f;
  f.eval = [ea = a.eval, eb = b.eval](double x) { return ea(x) + eb(x); };
  f.support = a.support.united(b.support);
  f.sup_bound = sum_bounds(a.sup_bound, b.sup_bound);
  f.l1_tail_bound = a.l1_tail_bound + b.l1_tail_bound;
  f.l2_tail_bound = a.l2_tail_bound + b.l2_tail_bound;
  f.breaks = merged_breaks(a, b);
  return f;
}

TestFunction operator-(const TestFunction& a, const TestFunction& b) { return a + scaled(b, -1.0); }

TestFunction scaled(const TestFunction& f, double c) {
  if (c == 0.0) return zero_function();
  TestFunction g;
  g.eval = [e = f.eval, c](double x) { return c * e(x); };
  g.support = f.support;
  if (f.sup_bound) g.sup_bound = std::abs(c) * *f.sup_bound;
  g.l1_tail_bound = std::abs(c) * f.l1_tail_bound;
  g.l2_tail_bound = std::abs(c) * f.l2_tail_bound;
  g.breaks = f.breaks;
  return g;
}

namespace {

TestFunction pointwise(const TestFunction& f, double (*op)(double)) {
  TestFunction g = f;
  g.eval = [e = f.eval, op](double x) { return op(e(x)); };
  return g;
}

}  // namespace

TestFunction absolute(const TestFunction& f) {
  return pointwise(f, [](double v) { return std::abs(v); });
}
TestFunction positive_part(const TestFunction& f) {
  return pointwise(f, [](double v) { return v > 0.0 ? v : 0.0; });
}
TestFunction negative_part(const TestFunction& f) {
  return pointwise(f, [](double v) { return v < 0.0 ? -v : 0.0; });
}

SimpleFunction::SimpleFunction(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  for (const auto& a : atoms_) {
    if (!(a.value != 0.0) || !std::isfinite(a.value))
      fail(ErrorCode::invalid_argument, "simple function atoms need finite nonzero values");
    if (!(a.mass > 0.0) || !std::isfinite(a.mass))
      fail(ErrorCode::invalid_argument, "simple function atoms need finite positive masses");
  }
}

double SimpleFunction::total_mass() const {
  double m = 0.0;
  for (const auto& a : atoms_) m += a.mass;
  return m;
}

double SimpleFunction::sup_abs() const {
  double s = 0.0;
  for (const auto& a : atoms_) s = std::max(s, std::abs(a.value));
  return s;
}

SimpleFunction SimpleFunction::scaled(double c) const {
  if (c == 0.0) return {};
  std::vector<Atom> out(atoms_.begin(), atoms_.end());
  for (auto& a : out) a.value *= c;
  return SimpleFunction(std::move(out));
}

SimpleFunction SimpleFunction::absolute() const {
  std::vector<Atom> out(atoms_.begin(), atoms_.end());
  for (auto& a : out) a.value = std::abs(a.value);
  return SimpleFunction(std::move(out));
}

SimpleFunction SimpleFunction::positive_part() const {
  std::vector<Atom> out;
  for (const auto& a : atoms_)
    if (a.value > 0.0) out.push_back(a);
  return SimpleFunction(std::move(out));
}

SimpleFunction SimpleFunction::negative_part() const {
  std::vector<Atom> out;
  for (const auto& a : atoms_)
    if (a.value < 0.0) out.push_back({-a.value, a.mass});
  return SimpleFunction(std::move(out));
}

TestFunction SimpleFunction::realize(double origin) const {
  if (atoms_.empty()) return zero_function();
  std::vector<Interval> pieces;
  std::vector<double> values;
  double at = origin;
  for (const auto& a : atoms_) {
    pieces.push_back({at, at + a.mass});
    values.push_back(a.value);
    at += a.mass;
  }
  // Adjacent closed pieces share endpoints; evaluate half-open to keep them disjoint.
  TestFunction f;
  std::vector<double> edges{origin};
  for (const auto& p : pieces) edges.push_back(p.hi);
  f.eval = [edges, values](double x) {
    if (x < edges.front() || x >= edges.back()) return 0.0;
    auto it = std::upper_bound(edges.begin(), edges.end(), x);
    return values[static_cast<std::size_t>(it - edges.begin()) - 1];
  };
  f.support = Window::interval(origin, at);
  f.sup_bound = sup_abs();
  f.breaks = edges;
  return f;
}

Moments simple_moments(const SimpleFunction& f) {
  Moments m;
  for (const auto& a : f.atoms()) {
    m.l1 += std::abs(a.value) * a.mass;
    m.l2sq += a.value * a.value * a.mass;
    m.integral += a.value * a.mass;
  }
  return m;
}

}  // namespace pol
