#pragma once

// Closed-form large-n predictions for the expected crossing counts, the
// arctan-form edge approximations of A, B, C, and a log-slope fit used to
// compare computed counts against the predicted (1/pi) log n growth.

#include <cstddef>
#include <optional>
#include <span>

#include "levelcross/moments.hpp"
#include "levelcross/spectrum.hpp"

namespace levelcross {

enum class Regime { kBoundedC0, kGrowingC1 };
enum class IntervalClass { kInner, kOuter };
// kLittleO: value ~ prediction (error o(log n)); kBigOLogLog: error O(log log n).
enum class ErrorOrder { kLittleO, kBigOLogLog };

struct AsymptoticPrediction {
  Regime regime;
  IntervalClass interval_class;
  double value;
  ErrorOrder error_order;
};

// Bounded K: (1/pi) log n for (-1,1) and for |x| > 1 alike.
// Growing K:  (1/pi) log(n/K^2) inside, (1/pi) log n outside.
// Requires n >= 3; the growing regime requires 0 < K^2 < n.
AsymptoticPrediction theorem_prediction(std::size_t n, double K, Regime regime,
                                        IntervalClass interval_class);

// Prediction for an arbitrary interval when it is a union of the classes
// above or one of their symmetric halves: (-1,1), (0,1), (-1,0), (1,inf),
// (-inf,-1), (-inf,inf). Uses the growing regime when the density is C1
// and 0 < K^2 < n, the bounded regime otherwise.
std::optional<double> interval_prediction(std::size_t n, double K, Smoothness smoothness,
                                          double lo, double hi);

// Distance y from x = +-1 inside the zone (log log n / n, 1 / log n).
struct EdgeZoom {
  double y;
  std::size_t n;
  int side;  // +1 near x = 1 (uses f(0)), -1 near x = -1 (uses f(pi))

  // Throws kZone when y is outside the zone, kDomain for a bad side or n < 16.
  static EdgeZoom make(double y, std::size_t n, int side);
  // y log n / log log n
  double g() const;
};

struct EdgeMomentApprox {
  MomentTriple moments;
  // For C1 densities the neglected terms are O(1/g) in A; NaN for C0,
  // where only the asymptotic equivalence is available.
  double a_error_scale;
};

EdgeMomentApprox edge_moment_approx(const EdgeZoom& zoom, const SpectralDensity& f,
                                    Smoothness smoothness);

struct LogSlopeSample {
  double n;
  double value;
};

struct LogSlopeFit {
  double slope;
  double intercept;
  double max_residual;
};

// Least squares of value against ln n. Requires >= 4 samples with strictly
// ascending n (kInsufficientData / kDomain).
LogSlopeFit fit_log_slope(std::span<const LogSlopeSample> samples);

}  // namespace levelcross
