#pragma once

#include <cmath>

namespace levelcross::detail {

// Neumaier's variant of Kahan summation. Accurate for sums whose terms
// vary in sign as long as the total is not itself a massive cancellation.
class CompensatedSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double v) noexcept {
    add(v);
    return *this;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// a*d - b*c with one rounding error (Kahan's fma trick).
inline double det2(double a, double b, double c, double d) noexcept {
  const double w = b * c;
  const double e = std::fma(-b, c, w);
  const double f = std::fma(a, d, -w);
  return f + e;
}

}  // namespace levelcross::detail
