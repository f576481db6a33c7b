#pragma once

#include <array>
#include <limits>
#include <optional>

#include "measure_fn.hpp"
#include "quadrature.hpp"

namespace pol {

// The fixed Young pair: Phi(x) = x^2 on [0,1], 2x - 1 beyond; Psi(y) = y^2 on [0,2], +inf beyond.
double young_phi(double x);
double young_psi(double y);

inline constexpr double kPhiKink = 1.0;
inline constexpr double kPsiKink = 2.0;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Value with an attached absolute error estimate; `discretized` marks values
// obtained from a quadrature discretization rather than an exact formula.
struct NormValue {
  double value = 0.0;
  double err = 0.0;
  bool discretized = false;
};

double modular(const SimpleFunction& f);
NormValue modular(const TestFunction& f, double tol);

inline constexpr double kDefaultRelTol = 1e-10;

double gauge_norm(const SimpleFunction& f, double rel_tol = kDefaultRelTol);
NormValue gauge_norm(const TestFunction& f, double tol);

// sup { int |f g| : max(||g||_2, ||g||_inf / 2) <= 1 }, solved through its KKT form.
double orlicz_norm_paper(const SimpleFunction& f, double rel_tol = kDefaultRelTol);
NormValue orlicz_norm_paper(const TestFunction& f, double tol);

// inf_{k > 0} (1 + modular(k f)) / k.
double orlicz_norm_amemiya(const SimpleFunction& f, double rel_tol = kDefaultRelTol);
NormValue orlicz_norm_amemiya(const TestFunction& f, double tol);

// Kronrod (fine) and Gauss (coarse) node discretizations of f over its support,
// on a partition adapted to Phi(|f|). Atoms with value 0 are dropped.
struct Discretization {
  SimpleFunction fine;
  SimpleFunction coarse;
  double quad_err = 0.0;
};

Discretization discretize(const TestFunction& f, double tol);

struct NormReport {
  double gauge = 0.0;
  double orlicz_paper = 0.0;
  double orlicz_amemiya = 0.0;
  std::optional<double> star;
  std::optional<double> l1;
  std::optional<double> l2;
};

// Diagnostic for the N <= ||.|| <= 2N bracket; `holds` is false for a finding, never an exception.
struct BracketCheck {
  bool holds = true;
  double lower_slack = 0.0;  // orlicz - gauge
  double upper_slack = 0.0;  // 2 gauge - orlicz
};

BracketCheck check_gauge_orlicz_bracket(double gauge, double orlicz, double tol);

}  // namespace pol
