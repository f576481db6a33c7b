#include "quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>

#include "error.hpp"

namespace pol {
namespace {

// G7/K15 abscissae and weights (QUADPACK qk15).
constexpr std::array<double, 8> kXgk = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                        0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
                                        0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                       0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

QuadCell gk15(const RealMap& h, double lo, double hi) {
  double c = 0.5 * (lo + hi);
  double half = 0.5 * (hi - lo);
  double fc = h(c);
  double resk = fc * kWgk[7];
  double resg = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    double dx = half * kXgk[j];
    double f1 = h(c - dx);
    double f2 = h(c + dx);
    resk += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  QuadCell cell{lo, hi, resk * half, std::abs((resk - resg) * half)};
  if (!std::isfinite(cell.value)) cell.err = std::numeric_limits<double>::infinity();
  return cell;
}

struct ByErr {
  bool operator()(const QuadCell& a, const QuadCell& b) const { return a.err < b.err; }
};

std::vector<double> segment_points(double a, double b, std::span<const double> breaks) {
  std::vector<double> pts{a};
  for (double x : breaks)
    if (x > a && x < b) pts.push_back(x);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

QuadResult adapt(const RealMap& h, const std::vector<double>& pts, double tol, std::size_t max_cells,
                 std::vector<QuadCell>* cells_out) {
  std::priority_queue<QuadCell, std::vector<QuadCell>, ByErr> queue;
  std::vector<QuadCell> done;
  QuadResult r;
  double err = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    auto cell = gk15(h, pts[i], pts[i + 1]);
    r.evaluations += 15;
    err += cell.err;
    queue.push(cell);
  }
  std::size_t count = queue.size();
  while (err > tol && !queue.empty()) {
    if (count >= max_cells) break;
    QuadCell worst = queue.top();
    double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi) ||
        worst.hi - worst.lo <= 64 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(mid))) {
      // Cell cannot be refined further in double precision.
      queue.pop();
      done.push_back(worst);
      if (queue.empty()) break;
      continue;
    }
    queue.pop();
    auto left = gk15(h, worst.lo, mid);
    auto right = gk15(h, mid, worst.hi);
    r.evaluations += 30;
    err += left.err + right.err - worst.err;
    queue.push(left);
    queue.push(right);
    ++count;
  }
  while (!queue.empty()) {
    done.push_back(queue.top());
    queue.pop();
  }
  std::sort(done.begin(), done.end(), [](const QuadCell& a, const QuadCell& b) { return a.lo < b.lo; });
  // Recompute sums in positional order so the result does not depend on heap layout.
  r.value = 0.0;
  r.err_bound = 0.0;
  for (const auto& c : done) {
    r.value += c.value;
    r.err_bound += c.err;
  }
  r.converged = r.err_bound <= tol;
  if (cells_out) *cells_out = std::move(done);
  return r;
}

}  // namespace

QuadResult integrate_interval(const RealMap& h, double a, double b, double tol, std::span<const double> breaks,
                              std::size_t max_cells, std::vector<QuadCell>* cells) {
  if (!(tol > 0.0)) fail(ErrorCode::invalid_argument, "quadrature tolerance must be positive");
  if (!(a < b)) {
    if (cells) cells->clear();
    return {};
  }
  return adapt(h, segment_points(a, b, breaks), tol, max_cells, cells);
}

QuadResult integrate_window(const RealMap& h, const Window& w, double tol, std::span<const double> breaks,
                            std::size_t max_cells, std::vector<QuadCell>* cells) {
  if (!(tol > 0.0)) fail(ErrorCode::invalid_argument, "quadrature tolerance must be positive");
  std::vector<double> pts;
  std::vector<QuadCell> all;
  QuadResult total;
  if (w.empty()) {
    if (cells) cells->clear();
    return total;
  }
  // Tolerance is shared out in proportion to interval length.
  for (const auto& iv : w.intervals()) {
    double share = tol * iv.length() / w.measure();
    std::vector<QuadCell> local;
    auto r = adapt(h, segment_points(iv.lo, iv.hi, breaks), share, max_cells, cells ? &local : nullptr);
    total.value += r.value;
    total.err_bound += r.err_bound;
    total.evaluations += r.evaluations;
    if (cells) all.insert(all.end(), local.begin(), local.end());
  }
  total.converged = total.err_bound <= tol;
  if (cells) *cells = std::move(all);
  return total;
}

QuadResult integrate_line(const RealMap& h, double tol, std::span<const double> breaks, std::size_t max_cells) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  std::vector<double> theta_breaks;
  for (double x : breaks) theta_breaks.push_back(std::atan(x));
  RealMap mapped = [&h](double t) {
    double c = std::cos(t);
    if (c == 0.0) return 0.0;
    return h(std::tan(t)) / (c * c);
  };
  return integrate_interval(mapped, -half_pi, half_pi, tol, theta_breaks, max_cells);
}

std::vector<double> level_crossings(const TestFunction& f, const Window& w, std::span<const double> levels,
                                    std::span<const double> breaks) {
  std::vector<double> out;
  if (levels.empty()) return out;
  constexpr int kProbes = 32;
  for (const auto& iv : w.intervals()) {
    auto pts = segment_points(iv.lo, iv.hi, breaks);
    for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
      double lo = pts[s];
      double hi = pts[s + 1];
      // Probe strictly inside so jump values at the breaks are not sampled.
      auto at = [&](int k) { return lo + (hi - lo) * (k + 0.5) / kProbes; };
      for (double level : levels) {
        double xa = at(0);
        double da = std::abs(f(xa)) - level;
        for (int k = 1; k < kProbes; ++k) {
          double xb = at(k);
          double db = std::abs(f(xb)) - level;
          if ((da < 0.0) != (db < 0.0)) {
            double l = xa, r = xb, dl = da;
            for (int it = 0; it < 80 && r - l > 0.0; ++it) {
              double m = 0.5 * (l + r);
              if (m <= l || m >= r) break;
              double dm = std::abs(f(m)) - level;
              if ((dm < 0.0) == (dl < 0.0)) {
                l = m;
                dl = dm;
              } else {
                r = m;
              }
            }
            out.push_back(0.5 * (l + r));
          }
          xa = xb;
          da = db;
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

QuadResult integrate(const TestFunction& f, const Window& w, const RealMap& g, double tol,
                     std::span<const double> g_kinks, std::vector<QuadCell>* cells) {
  if (w.empty()) fail(ErrorCode::precondition, "integrate requires a nonempty window");
  std::vector<double> breaks = f.breaks;
  auto crossings = level_crossings(f, w, g_kinks, f.breaks);
  breaks.insert(breaks.end(), crossings.begin(), crossings.end());
  std::sort(breaks.begin(), breaks.end());
  RealMap h = [&f, &g](double x) { return g(f(x)); };
  return integrate_window(h, w, tol, breaks, kDefaultMaxCells, cells);
}

void kronrod_nodes(double lo, double hi, std::vector<double>& x, std::vector<double>& w) {
  double c = 0.5 * (lo + hi);
  double half = 0.5 * (hi - lo);
  for (int j = 0; j < 7; ++j) {
    x.push_back(c - half * kXgk[j]);
    w.push_back(half * kWgk[j]);
    x.push_back(c + half * kXgk[j]);
    w.push_back(half * kWgk[j]);
  }
  x.push_back(c);
  w.push_back(half * kWgk[7]);
}

void gauss_nodes(double lo, double hi, std::vector<double>& x, std::vector<double>& w) {
  double c = 0.5 * (lo + hi);
  double half = 0.5 * (hi - lo);
  for (int j = 1; j < 7; j += 2) {
    x.push_back(c - half * kXgk[j]);
    w.push_back(half * kWg[j / 2]);
    x.push_back(c + half * kXgk[j]);
    w.push_back(half * kWg[j / 2]);
  }
  x.push_back(c);
  w.push_back(half * kWg[3]);
}

}  // namespace pol
