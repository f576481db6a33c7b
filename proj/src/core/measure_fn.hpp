#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace pol {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

// Finite union of disjoint closed intervals carrying Lebesgue measure.
// Always held in canonical form: sorted, pairwise disjoint, touching pieces merged.
class Window {
 public:
  Window() = default;
  explicit Window(std::vector<Interval> intervals);

  static Window interval(double lo, double hi);

  std::span<const Interval> intervals() const { return intervals_; }
  bool empty() const { return intervals_.empty(); }
  double measure() const { return measure_; }
  double lo() const;
  double hi() const;

  bool contains(double x) const;
  bool contains(const Window& other) const;

  Window united(const Window& other) const;
  Window shifted(double delta) const;
  Window intersected(const Interval& iv) const;

  // Inverse CDF of the normalized restricted Lebesgue measure: u in [0,1).
  double locate(double u) const;

  friend bool operator==(const Window&, const Window&) = default;

 private:
  std::vector<Interval> intervals_;
  double measure_ = 0.0;
};

Window window_union(const Window& a, const Window& b);

using RealMap = std::function<double(double)>;

// Pointwise-evaluable real function with declared support window.
// Outside the support eval is taken as zero up to the declared tail bounds.
struct TestFunction {
  RealMap eval;
  Window support;
  std::optional<double> sup_bound;
  double l1_tail_bound = 0.0;
  double l2_tail_bound = 0.0;
  // Declared discontinuities / kinks, used as forced quadrature subdivisions.
  std::vector<double> breaks;

  double operator()(double x) const { return eval(x); }
  bool exact_support() const { return l1_tail_bound == 0.0 && l2_tail_bound == 0.0; }
};

TestFunction zero_function();
TestFunction indicator(const Window& w, double value = 1.0);
// Tent of height `height` centred on (lo+hi)/2, vanishing at lo and hi.
TestFunction triangular_bump(double lo, double hi, double height = 1.0);
// Sum of value_i * 1_{[lo_i, hi_i]}; pieces must be pairwise disjoint.
TestFunction piecewise_constant(std::span<const Interval> pieces, std::span<const double> values);

TestFunction operator+(const TestFunction& a, const TestFunction& b);
TestFunction operator-(const TestFunction& a, const TestFunction& b);
TestFunction scaled(const TestFunction& f, double c);
TestFunction absolute(const TestFunction& f);
TestFunction positive_part(const TestFunction& f);
TestFunction negative_part(const TestFunction& f);

struct Atom {
  double value = 0.0;
  double mass = 0.0;
};

// Sum of value_i * 1_{A_i} over disjoint sets with mu(A_i) = mass_i.
class SimpleFunction {
 public:
  SimpleFunction() = default;
  explicit SimpleFunction(std::vector<Atom> atoms);

  std::span<const Atom> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  double total_mass() const;
  double sup_abs() const;

  SimpleFunction scaled(double c) const;
  SimpleFunction absolute() const;
  SimpleFunction positive_part() const;
  SimpleFunction negative_part() const;

  // Lays the atoms out on consecutive intervals [origin, origin + m_1), ...
  TestFunction realize(double origin = 0.0) const;

 private:
  std::vector<Atom> atoms_;
};

struct Moments {
  double l1 = 0.0;
  double l2sq = 0.0;
  double integral = 0.0;
};

Moments simple_moments(const SimpleFunction& f);

}  // namespace pol
