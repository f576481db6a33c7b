#pragma once

#include <cmath>
#include <vector>

namespace pol {

// Exact floating-point accumulator (Shewchuk partials) with a correctly rounded
// result, following the msum/fsum construction.
class ExactSum {
 public:
  void add(double x) {
    std::size_t i = 0;
    for (double y : partials_) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      double hi = x + y;
      double lo = y - (hi - x);
      if (lo != 0.0) partials_[i++] = lo;
      x = hi;
    }
    partials_.resize(i);
    partials_.push_back(x);
  }

  ExactSum& operator+=(double x) {
    add(x);
    return *this;
  }

  ExactSum& operator+=(const ExactSum& other) {
    for (double p : other.partials_) add(p);
    return *this;
  }

  ExactSum& operator-=(const ExactSum& other) {
    for (double p : other.partials_) add(-p);
    return *this;
  }

  friend ExactSum operator-(ExactSum a, const ExactSum& b) {
    a -= b;
    return a;
  }

  double value() const {
    if (partials_.empty()) return 0.0;
    std::size_t n = partials_.size();
    double hi = partials_[n - 1];
    double lo = 0.0;
    std::size_t k = n - 1;
    while (k > 0) {
      double x = hi;
      double y = partials_[--k];
      hi = x + y;
      double yr = hi - x;
      lo = y - yr;
      if (lo != 0.0) break;
    }
    // Half-way case: look at the sign of the next partial to round correctly.
    if (k > 0 && ((lo < 0.0 && partials_[k - 1] < 0.0) || (lo > 0.0 && partials_[k - 1] > 0.0))) {
      double y = lo * 2.0;
      double x = hi + y;
      double yr = x - hi;
      if (y == yr) hi = x;
    }
    return hi;
  }

 private:
  std::vector<double> partials_;
};

}  // namespace pol
