#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "measure_fn.hpp"

namespace pol {

struct QuadResult {
  double value = 0.0;
  double err_bound = 0.0;
  bool converged = true;
  std::size_t evaluations = 0;
};

struct QuadCell {
  double lo = 0.0;
  double hi = 0.0;
  double value = 0.0;
  double err = 0.0;
};

inline constexpr std::size_t kDefaultMaxCells = 20000;

// Globally adaptive Gauss-Kronrod (7/15) integration of h over [a, b].
// `breaks` inside (a, b) are used as forced subdivision points.
// err_bound is the sum of per-cell |K15 - G7| estimates; converged is false
// when the cell budget ran out before err_bound <= tol.
QuadResult integrate_interval(const RealMap& h, double a, double b, double tol,
                              std::span<const double> breaks = {}, std::size_t max_cells = kDefaultMaxCells,
                              std::vector<QuadCell>* cells = nullptr);

QuadResult integrate_window(const RealMap& h, const Window& w, double tol, std::span<const double> breaks = {},
                            std::size_t max_cells = kDefaultMaxCells, std::vector<QuadCell>* cells = nullptr);

// Integral over the whole real line through x = tan(theta).
QuadResult integrate_line(const RealMap& h, double tol, std::span<const double> breaks = {},
                          std::size_t max_cells = kDefaultMaxCells);

// Locates points of w where |f| crosses one of `levels` by scanning and bisection.
std::vector<double> level_crossings(const TestFunction& f, const Window& w, std::span<const double> levels,
                                    std::span<const double> breaks);

// Integral of g(f(x)) over w. Crossings of |f| through `g_kinks` are added as
// forced subdivisions alongside the declared breaks of f.
QuadResult integrate(const TestFunction& f, const Window& w, const RealMap& g, double tol,
                     std::span<const double> g_kinks = {}, std::vector<QuadCell>* cells = nullptr);

// Kronrod nodes and weights mapped onto [lo, hi].
void kronrod_nodes(double lo, double hi, std::vector<double>& x, std::vector<double>& w);
void gauss_nodes(double lo, double hi, std::vector<double>& x, std::vector<double>& w);

}  // namespace pol
