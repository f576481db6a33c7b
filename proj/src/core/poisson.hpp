#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "exact_sum.hpp"
#include "measure_fn.hpp"
#include "orlicz.hpp"
#include "rng.hpp"

namespace pol {

class DynamicalSystem;

// One realization of the Poisson process restricted to a finite-measure window.
struct PoissonSample {
  Window window;
  std::vector<double> points;
};

struct MCEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t replicates = 0;
  std::uint64_t seed = 0;
  double truncation_bound = 0.0;
};

inline constexpr std::uint64_t kMinReplicates = 1000;
inline constexpr double kCompensatorTol = 1e-11;

std::uint64_t sample_poisson_count(double mean, StreamRng& rng);
PoissonSample sample_process(const Window& w, StreamRng& rng);
// Replicate r of a seeded run draws from stream (seed, r).
PoissonSample sample_process(const Window& w, std::uint64_t seed, std::uint64_t replicate = 0);

// int_w f dmu by quadrature.
double compensator(const TestFunction& f, const Window& w, double tol = kCompensatorTol);

// N(f)(omega) = sum of f over the points, exactly accumulated.
ExactSum point_sum(const TestFunction& f, std::span<const double> points);
// I_1(f 1_w)(omega) = N(f)(omega) - compensator, correctly rounded from the exact sum.
double integral_centered(const TestFunction& f, const PoissonSample& s, double compensator);

// Mass of f outside w (declared tails plus the part of the support w misses).
struct TailBounds {
  double l1 = 0.0;
  double l2 = 0.0;
  // ||f 1_{w^c}||_* <= min(2 ||.||_1, ||.||_2).
  double star_truncation() const { return l1 < 0.5 * l2 ? 2.0 * l1 : l2; }
};

TailBounds tail_bounds(const TestFunction& f, const Window& w, double tol = kCompensatorTol);

// Mean and standard error of replicate values, reduced in index order.
MCEstimate summarize(std::span<const double> values, std::uint64_t seed, double truncation_bound = 0.0);

MCEstimate estimate_star_norm(const TestFunction& f, const Window& w, std::uint64_t replicates, std::uint64_t seed);
MCEstimate estimate_starstar_norm(const TestFunction& f, const Window& w, std::uint64_t replicates,
                                  std::uint64_t seed);

inline constexpr double kDefaultTailEps = 1e-12;
inline constexpr std::size_t kExactMaxAtoms = 6;
inline constexpr double kExactMaxMass = 30.0;

// E|sum v_i (N_i - m_i)| for independent N_i ~ Poisson(m_i), by direct summation
// of the truncated joint pmf; the error is at most tail_eps.
double star_norm_exact(const SimpleFunction& f, double tail_eps = kDefaultTailEps);
// E|sum v_i N_i|, the uncentered counterpart, by the same summation.
double starstar_norm_exact(const SimpleFunction& f, double tail_eps = kDefaultTailEps);

// Hsu's L1-moment integral (2/pi) int_0^inf (1 - Re E e^{itZ}) / t^2 dt for Z = I_1(f).
NormValue star_norm_hsu(const SimpleFunction& f, double tol);
NormValue star_norm_hsu(const TestFunction& f, double tol);

struct PairedEstimate {
  MCEstimate lhs;
  MCEstimate rhs;
  MCEstimate diff;  // replicate-wise lhs - rhs
};

// phi(x, points) for the Mecke identity E sum_{x in omega} phi(x, omega) = E int phi(x, omega + delta_x) dx.
struct MeckeFunctional {
  std::function<double(double, std::span<const double>)> phi;
  std::vector<double> breaks;
};

PairedEstimate mecke_check(const MeckeFunctional& phi, const Window& w, std::uint64_t replicates, std::uint64_t seed,
                           double quad_tol = 1e-10);

struct DifferenceResult {
  double observed = 0.0;
  double expected = 0.0;
};

// I_1(f)(omega + delta_x) - I_1(f)(omega), evaluated without rounding before the difference.
DifferenceResult difference_check(const TestFunction& f, const PoissonSample& s, double x, double compensator);

struct SecondMomentResult {
  MCEstimate sample_var;
  double l2sq = 0.0;
};

SecondMomentResult second_moment_check(const TestFunction& f, const Window& w, std::uint64_t replicates,
                                       std::uint64_t seed);

struct ReducedMomentResult {
  MCEstimate lhs;
  double rhs = 0.0;
};

// E[N(g) N(h) - N(gh)] against (int g)(int h).
ReducedMomentResult reduced_moment_check(const TestFunction& g, const TestFunction& h, const Window& w,
                                         std::uint64_t replicates, std::uint64_t seed);

struct IdentityPair {
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;  // combined compensator quadrature error
};

// Windows: `w` carries the sample; it must contain T^{-1}(supp f) (and supp f for the coboundary form).
IdentityPair equivariance_check(const TestFunction& f, const DynamicalSystem& sys, const PoissonSample& s,
                                double quad_tol = 1e-11);
IdentityPair coboundary_check(const TestFunction& f, const DynamicalSystem& sys, const PoissonSample& s,
                              double quad_tol = 1e-11);

}  // namespace pol
