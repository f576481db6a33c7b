#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "measure_fn.hpp"

namespace pol {

enum class SystemKind { translation, boole, composite };

struct Preimage {
  double y = 0.0;
  double inv_jacobian = 0.0;
};

struct Preimages {
  std::array<Preimage, 2> items{};
  int count = 0;
  std::span<const Preimage> view() const { return {items.data(), static_cast<std::size_t>(count)}; }
};

// Lebesgue-measure-preserving map of the real line with explicit preimage branches.
class DynamicalSystem {
 public:
  virtual ~DynamicalSystem() = default;

  virtual SystemKind kind() const = 0;
  virtual std::string name() const = 0;
  virtual double forward(double x) const = 0;
  virtual double forward_n(double x, long n) const;
  virtual Preimages preimages(double x) const = 0;
  // Exact T^{-1}(w).
  virtual Window pullback(const Window& w) const = 0;
  // Window containing T^{-k}(w) for every 0 <= k <= n.
  virtual Window backward_inflate(const Window& w, long n) const;
  // T(w) when bounded, nullopt when the image is unbounded.
  virtual std::optional<Window> forward_image(const Window& w) const = 0;
  virtual bool invertible() const { return false; }
};

using SystemPtr = std::shared_ptr<const DynamicalSystem>;

inline constexpr double kGoldenAngle = 0.6180339887498949;  // (sqrt(5) - 1) / 2

SystemPtr make_translation(double step);
SystemPtr make_boole();
// Rotation by `angle` on the unit circle, encoded as the segment [0, 1), next to a
// translation by `step` on the line, encoded as R \ [0, 1).
SystemPtr make_composite(double angle = kGoldenAngle, double step = 1.0);

// Support window containing the circle part of the composite encoding.
Window composite_circle();

// f o T^k, with support T^{-k}(supp f) (hull for non-invertible systems).
TestFunction compose(const TestFunction& f, const SystemPtr& sys, long k = 1);

// (1/n) sum_{k=1}^{n} f o T^k.
TestFunction birkhoff(const TestFunction& f, const SystemPtr& sys, long n);
// (1/|times|) sum_k f o T^{times[k]}.
TestFunction birkhoff_along(const TestFunction& f, const SystemPtr& sys, std::span<const long> times);

struct TransferOptions {
  // Mass-deficit tolerance deciding the declared window of unbounded images.
  double window_tol = 0.05;
  double quad_tol = 1e-7;
};

inline constexpr long kBooleMaxTransferDepth = 14;

// T-hat^n f by explicit preimage-branch enumeration.
TestFunction transfer_apply(const TestFunction& f, const SystemPtr& sys, long n, const TransferOptions& opts = {});

}  // namespace pol
