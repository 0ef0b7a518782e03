#pragma once

// Expected number of K-level crossings over an interval by adaptive
// Gauss-Kronrod quadrature of the Kac-Rice integrand F1 + F2.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "levelcross/asymptotics.hpp"
#include "levelcross/moments.hpp"

namespace levelcross {

// (lo, hi) on the extended real line; lo < hi.
struct IntervalSpec {
  double lo = -1.0;
  double hi = 1.0;

  void validate() const;
  // "a..b" with "-inf"/"inf" tokens.
  static IntervalSpec parse(std::string_view text);
  std::string to_string() const;

  bool operator==(const IntervalSpec&) const = default;
};

// The positive members of the symmetric partition points
// +-(1 - 1/log n) and +-(1 - log log n / n).
struct Breakpoints {
  double inner;
  double near_edge;
};

// Requires n >= 16; throws kOrdering otherwise.
Breakpoints breakpoints(std::size_t n);

// Forced panel edge next to +-1 (and z = +-1 on the reciprocal side).
inline constexpr double kEdgeGap = 1e-12;

enum class Method { kKacRice, kMonteCarlo };

const char* to_string(Method m) noexcept;

// Contribution of one mandatory subinterval. lo/hi are in x; reciprocal
// pieces were integrated in z = 1/x.
struct Piece {
  double lo = 0.0;
  double hi = 0.0;
  bool reciprocal = false;
  double f1 = 0.0;
  double f2 = 0.0;
  double abs_err = 0.0;
  std::size_t panels = 0;

  double value() const noexcept { return f1 + f2; }
};

struct CrossingEstimate {
  double value = 0.0;
  double abs_err = 0.0;
  std::vector<Piece> pieces;
  Method method = Method::kKacRice;
  // Refinement limit hit before abs_err <= tol.
  bool flagged = false;
  // Quadrature nodes that fell in the removable-singularity band.
  std::size_t regularized_points = 0;

  double f1_part() const noexcept;
  double f2_part() const noexcept;
};

struct QuadratureOptions {
  double tol = 1e-6;
  std::size_t max_panels = 200000;
};

// Requires a model with a spectral density (kUnsupportedModel otherwise).
CrossingEstimate expected_crossings(const PolynomialEnsemble& e, const IntervalSpec& spec,
                                    const QuadratureOptions& opts = {});

// K as a function of n: a fixed level, or c sqrt(n / log log n) / log n,
// which stays inside K = o(sqrt(n / log log n)).
struct KRule {
  enum class Kind { kFixed, kGrowing };
  Kind kind = Kind::kFixed;
  double value = 0.0;

  double level(std::size_t n) const;
  // "1.5" / "fixed:1.5" / "growing:2".
  static KRule parse(std::string_view text);
  std::string to_string() const;
};

struct TableRow {
  std::size_t n = 0;
  double level = 0.0;
  IntervalSpec interval;
  CrossingEstimate estimate;
  // NaN when the interval has no asymptotic prediction.
  double prediction = 0.0;
  double ratio = 0.0;
};

// One row per (n, interval), n ascending.
std::vector<TableRow> crossing_table(const CovarianceModel& model,
                                     std::span<const std::size_t> ns, const KRule& rule,
                                     std::span<const IntervalSpec> intervals,
                                     const QuadratureOptions& opts = {});

// (n, value) pairs of the rows for one interval, ready for fit_log_slope.
std::vector<LogSlopeSample> log_slope_samples(std::span<const TableRow> rows,
                                              const IntervalSpec& interval);

}  // namespace levelcross
