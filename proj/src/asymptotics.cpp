#include "levelcross/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "levelcross/errors.hpp"

namespace levelcross {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

AsymptoticPrediction theorem_prediction(std::size_t n, double K, Regime regime,
                                        IntervalClass interval_class) {
  if (n < 3) throw Error(ErrorCode::kDomain, "predictions need n >= 3");
  const double nd = static_cast<double>(n);
  const double log_n = std::log(nd);
  if (regime == Regime::kBoundedC0) {
    return {regime, interval_class, log_n / kPi, ErrorOrder::kLittleO};
  }
  const double k2 = K * K;
  if (!(k2 > 0.0) || !(k2 < nd)) {
    throw Error(ErrorCode::kOutOfRegime, "growing regime needs 0 < K^2 < n");
  }
  const double value = interval_class == IntervalClass::kInner ? std::log(nd / k2) / kPi
                                                               : log_n / kPi;
  return {regime, interval_class, value, ErrorOrder::kBigOLogLog};
}

std::optional<double> interval_prediction(std::size_t n, double K, Smoothness smoothness,
                                          double lo, double hi) {
  if (n < 3) return std::nullopt;
  const double nd = static_cast<double>(n);
  const bool growing = smoothness == Smoothness::kC1 && K != 0.0 && K * K < nd;
  const Regime regime = growing ? Regime::kGrowingC1 : Regime::kBoundedC0;
  const double inner = theorem_prediction(n, K, regime, IntervalClass::kInner).value;
  const double outer = theorem_prediction(n, K, regime, IntervalClass::kOuter).value;
  const double inf = std::numeric_limits<double>::infinity();
  // Each edge of (-1,1) and each tail carries half of its class total.
  if (lo == -1.0 && hi == 1.0) return inner;
  if ((lo == 0.0 && hi == 1.0) || (lo == -1.0 && hi == 0.0)) return 0.5 * inner;
  if ((lo == 1.0 && hi == inf) || (lo == -inf && hi == -1.0)) return 0.5 * outer;
  if (lo == -inf && hi == inf) return inner + outer;
  return std::nullopt;
}

EdgeZoom EdgeZoom::make(double y, std::size_t n, int side) {
  if (side != 1 && side != -1) throw Error(ErrorCode::kDomain, "side must be +1 or -1");
  if (n < 16) throw Error(ErrorCode::kDomain, "edge zone needs n >= 16");
  const double nd = static_cast<double>(n);
  const double lo = std::log(std::log(nd)) / nd;
  const double hi = 1.0 / std::log(nd);
  if (!(y > lo && y < hi)) {
    throw Error(ErrorCode::kZone, "y must lie in (log log n / n, 1 / log n)");
  }
  return EdgeZoom{y, n, side};
}

double EdgeZoom::g() const {
  const double nd = static_cast<double>(n);
  return y * std::log(nd) / std::log(std::log(nd));
}

EdgeMomentApprox edge_moment_approx(const EdgeZoom& zoom, const SpectralDensity& f,
                                    Smoothness smoothness) {
  const EdgeZoom z = EdgeZoom::make(zoom.y, zoom.n, zoom.side);  // revalidate
  const double fs = z.side > 0 ? f(0.0) : f(kPi);
  const double y = z.y;
  // g(y)/y does not depend on y.
  const double at = std::atan(z.g() / y);
  MomentTriple m;
  m.A = 2.0 * fs / y * at;
  m.B = static_cast<double>(z.side) * fs / (y * y) * at;
  m.C = fs / (y * y * y) * at;
  m.gram = m.A * m.C - m.B * m.B;
  m.gram_scale = m.A * m.C;
  m.scale_exponent = 0;
  const double err = smoothness == Smoothness::kC1 ? 1.0 / z.g()
                                                   : std::numeric_limits<double>::quiet_NaN();
  return {m, err};
}

LogSlopeFit fit_log_slope(std::span<const LogSlopeSample> samples) {
  if (samples.size() < 4) throw Error(ErrorCode::kInsufficientData, "need at least 4 rows");
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].n > samples[i - 1].n)) {
      throw Error(ErrorCode::kDomain, "n must be strictly ascending");
    }
  }
  const double count = static_cast<double>(samples.size());
  double sx = 0.0;
  double sy = 0.0;
  for (const auto& s : samples) {
    sx += std::log(s.n);
    sy += s.value;
  }
  const double mx = sx / count;
  const double my = sy / count;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& s : samples) {
    const double dx = std::log(s.n) - mx;
    sxx += dx * dx;
    sxy += dx * (s.value - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double max_res = 0.0;
  for (const auto& s : samples) {
    max_res = std::max(max_res, std::abs(s.value - (intercept + slope * std::log(s.n))));
  }
  return {slope, intercept, max_res};
}

}  // namespace levelcross
