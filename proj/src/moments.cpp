#include "levelcross/moments.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <vector>

#include "levelcross/detail/compensated.hpp"
#include "levelcross/errors.hpp"

namespace levelcross {

namespace {

using cplx = std::complex<double>;
using detail::CompensatedSum;

constexpr double kPi = std::numbers::pi;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::size_t next_pow2(std::size_t v) {
  std::size_t p = 1;
  while (p < v) p <<= 1;
  return p;
}

// Kernel values at u = x e^{-i phi}:
//   g  = sum_{k=0}^n u^k
//   gd = sum_{k=1}^n k u^{k-1}        (d g / du)
//   h  = sum_{k=0}^n (k - n) u^k
struct KernelValues {
  cplx g;
  cplx gd;
  cplx h;
};

KernelValues kernels(std::size_t n, double x, double phi) {
  const cplx u = std::polar(1.0, -phi) * x;
  const cplx one_minus_u = 1.0 - u;
  const double nd = static_cast<double>(n);
  // The closed forms lose accuracy as u -> 1; fall back to Horner there.
  const double tau = std::min(0.01, 10.0 / (nd + 1.0));
  KernelValues kv;
  if (std::abs(one_minus_u) < tau) {
    cplx g = 0.0;
    cplx gd = 0.0;
    cplx ku = 0.0;  // sum k u^k
    for (std::size_t k = n + 1; k-- > 0;) {
      g = g * u + 1.0;
      if (k >= 1) gd = gd * u + static_cast<double>(k);
      ku = ku * u + static_cast<double>(k);
    }
    kv.g = g;
    kv.gd = gd;
    kv.h = ku - nd * g;
    return kv;
  }
  const cplx un = std::pow(x, nd) * std::polar(1.0, -nd * phi);               // u^n
  const cplx un1 = std::pow(x, nd + 1.0) * std::polar(1.0, -(nd + 1.0) * phi);  // u^{n+1}
  const cplx num = 1.0 - un1;
  kv.g = num / one_minus_u;
  const cplx d2 = one_minus_u * one_minus_u;
  kv.gd = (num - (nd + 1.0) * un * one_minus_u) / d2;
  kv.h = (num - (nd + 1.0) * one_minus_u) / d2;
  return kv;
}

// Integrands (per unit phi, before the factor f(phi)) that the spectral
// routes need. Index: 0 A, 1 B, 2 C, 3 Bt, 4 Ct.
struct SpectralValues {
  double v[5];
};

SpectralValues spectral_point(std::size_t n, double x, double phi, bool outer) {
  const KernelValues kv = kernels(n, x, phi);
  const cplx e = std::polar(1.0, -phi);
  const cplx gx = e * kv.gd;  // d/dx of sum x^k e^{-ik phi}
  SpectralValues s{};
  s.v[0] = std::norm(kv.g);
  s.v[1] = std::real(gx * std::conj(kv.g));
  s.v[2] = std::norm(gx);
  if (outer) {
    s.v[3] = std::real(kv.h * std::conj(kv.g));
    s.v[4] = std::norm(kv.h);
  }
  return s;
}

// 2 * trapezoid on [0, pi] of the even integrands, doubling until every
// component settles to rel_tol (B-type terms relative to sqrt(A C)).
SpectralValues spectral_integrals(std::size_t n, const SpectralDensity& f, double x, bool outer,
                                  const SpectralOptions& opts) {
  const int count = outer ? 5 : 3;
  auto eval = [&](double phi, double* acc) {
    const SpectralValues s = spectral_point(n, x, phi, outer);
    const double w = f(phi);
    for (int i = 0; i < count; ++i) acc[i] += s.v[i] * w;
  };

  std::size_t intervals = std::max(next_pow2(opts.min_nodes), next_pow2(n + 1));
  // Running sums of interior nodes and the two endpoints.
  double ends[5] = {0, 0, 0, 0, 0};
  double interior[5] = {0, 0, 0, 0, 0};
  eval(0.0, ends);
  eval(kPi, ends);
  for (std::size_t j = 1; j < intervals; ++j) {
    eval(kPi * static_cast<double>(j) / static_cast<double>(intervals), interior);
  }
  auto estimate = [&](std::size_t m, SpectralValues& out) {
    const double h = kPi / static_cast<double>(m);
    for (int i = 0; i < count; ++i) out.v[i] = 2.0 * h * (interior[i] + 0.5 * ends[i]);
  };
  SpectralValues prev{};
  estimate(intervals, prev);
  for (;;) {
    if (2 * intervals > opts.max_nodes) {
      throw Error(ErrorCode::kRefinementLimit,
                  "spectral moments did not converge at x=" + fmt(x) + ", n=" +
                      std::to_string(n) + "; use the lag-sum route");
    }
    intervals *= 2;
    for (std::size_t j = 1; j < intervals; j += 2) {
      eval(kPi * static_cast<double>(j) / static_cast<double>(intervals), interior);
    }
    SpectralValues next{};
    estimate(intervals, next);
    const double cross_scale = std::sqrt(std::abs(next.v[0] * next.v[2]));
    bool done = std::abs(next.v[0] - prev.v[0]) <= opts.rel_tol * std::abs(next.v[0]) &&
                std::abs(next.v[2] - prev.v[2]) <= opts.rel_tol * std::abs(next.v[2]) &&
                std::abs(next.v[1] - prev.v[1]) <= opts.rel_tol * cross_scale;
    if (outer) {
      const double outer_scale = std::sqrt(std::abs(next.v[0] * next.v[4]));
      done = done && std::abs(next.v[4] - prev.v[4]) <= opts.rel_tol * std::abs(next.v[4]) &&
             std::abs(next.v[3] - prev.v[3]) <= opts.rel_tol * outer_scale;
    }
    prev = next;
    if (done) break;
  }
  return prev;
}

MomentTriple inner_triple(double A, double B, double C) {
  MomentTriple m;
  m.A = A;
  m.B = B;
  m.C = C;
  m.gram = detail::det2(A, B, B, C);
  m.gram_scale = A * C;
  m.scale_exponent = 0;
  return m;
}

MomentTriple outer_triple(std::size_t n, double z, const MomentTriple& at_z, double Bt,
                          double Ct) {
  MomentTriple m;
  m.A = at_z.A;
  m.B = Bt;
  m.C = Ct;
  m.gram = at_z.gram;
  m.gram_scale = at_z.gram_scale;
  m.scale_exponent = static_cast<int>(2 * n);
  (void)z;
  return m;
}

void check_outer_z(double z) {
  if (!(z != 0.0) || !std::isfinite(z)) throw Error(ErrorCode::kDomain, "z must be nonzero");
}

}  // namespace

void PolynomialEnsemble::validate() const {
  if (n < 1) throw Error(ErrorCode::kDomain, "degree n must be >= 1");
  if (!std::isfinite(level)) throw Error(ErrorCode::kDomain, "level K must be finite");
}

MomentTriple moments_direct(const PolynomialEnsemble& e, const CovarianceSequence& gamma,
                            double x) {
  e.validate();
  const std::size_t n = e.n;
  if (gamma.max_lag() < n) {
    throw Error(ErrorCode::kMissingLags, "need lags 0.." + std::to_string(n) + ", have 0.." +
                                             std::to_string(gamma.max_lag()));
  }
  if (!std::isfinite(x)) throw Error(ErrorCode::kDomain, "x must be finite");
  const std::size_t m = std::min(n, gamma.effective_lag(0.0));
  const auto g = gamma.values();

  // Prefix sums over j = 0..M of t^j, j t^{j-1}, j^2 t^{j-1} with t = x^2,
  // kept for M = n-m .. n.
  const double t = x * x;
  std::vector<double> p0(m + 1), r1(m + 1), r2(m + 1);
  CompensatedSum s0, s1, s2;
  double pw_prev = 0.0;  // t^{j-1}
  double pw = 1.0;       // t^j
  for (std::size_t j = 0; j <= n; ++j) {
    s0 += pw;
    if (j >= 1) {
      const double jd = static_cast<double>(j);
      s1 += jd * pw_prev;
      s2 += jd * jd * pw_prev;
    }
    if (j + m >= n) {
      const std::size_t d = n - j;
      p0[d] = s0.value();
      r1[d] = s1.value();
      r2[d] = s2.value();
    }
    pw_prev = pw;
    pw *= t;
  }

  // Lag d couples (k, j) = (j + d, j) and its mirror:
  //   A: x^d P0,  B: (2 x^{d+1} R1 + d x^{d-1} P0) / 2,  C: x^d (R2 + d R1)
  // each weighted by Gamma(d) and doubled for d > 0.
  CompensatedSum a, b, c;
  double xd = 1.0;       // x^d
  double xd_m1 = 0.0;    // x^{d-1}
  for (std::size_t d = 0; d <= m; ++d) {
    const double w = (d == 0 ? 1.0 : 2.0) * g[d];
    if (w != 0.0) {
      const double dd = static_cast<double>(d);
      a += w * xd * p0[d];
      b += 0.5 * w * (2.0 * xd * x * r1[d] + (d > 0 ? dd * xd_m1 * p0[d] : 0.0));
      c += w * xd * (r2[d] + dd * r1[d]);
    }
    xd_m1 = xd;
    xd *= x;
  }
  const MomentTriple out = inner_triple(a.value(), b.value(), c.value());
  if (!std::isfinite(out.A) || !std::isfinite(out.C) || !std::isfinite(out.gram)) {
    throw Error(ErrorCode::kDomain, "moments overflow at x=" + fmt(x) + "; use the scaled form");
  }
  return out;
}

MomentTriple moments_spectral(const PolynomialEnsemble& e, const SpectralDensity& f, double x,
                              const SpectralOptions& opts) {
  e.validate();
  if (!(std::abs(x) < 1.0)) throw Error(ErrorCode::kDomain, "spectral route needs |x| < 1");
  const SpectralValues s = spectral_integrals(e.n, f, x, /*outer=*/false, opts);
  return inner_triple(s.v[0], s.v[1], s.v[2]);
}

MomentTriple moments_outer_scaled(const PolynomialEnsemble& e, const SpectralDensity& f,
                                  double z, const SpectralOptions& opts) {
  e.validate();
  check_outer_z(z);
  if (!(std::abs(z) < 1.0)) throw Error(ErrorCode::kDomain, "outer route needs 0 < |z| < 1");
  const SpectralValues s = spectral_integrals(e.n, f, z, /*outer=*/true, opts);
  const MomentTriple at_z = inner_triple(s.v[0], s.v[1], s.v[2]);
  return outer_triple(e.n, z, at_z, s.v[3], s.v[4]);
}

MomentTriple moments_outer_scaled_direct(const PolynomialEnsemble& e,
                                         const CovarianceSequence& gamma, double z) {
  check_outer_z(z);
  if (!(std::abs(z) <= 1.0)) throw Error(ErrorCode::kDomain, "outer route needs 0 < |z| <= 1");
  const MomentTriple at_z = moments_direct(e, gamma, z);
  const double nd = static_cast<double>(e.n);
  const double Bt = z * at_z.B - nd * at_z.A;
  CompensatedSum ct;
  ct += nd * nd * at_z.A;
  ct += -2.0 * nd * z * at_z.B;
  ct += z * z * at_z.C;
  return outer_triple(e.n, z, at_z, Bt, ct.value());
}

UnscaledMoments unscale(const MomentTriple& m, double z) {
  const double p = static_cast<double>(m.scale_exponent);
  if (m.scale_exponent == 0) return {m.A, m.B, m.C};
  return {std::pow(z, -p) * m.A, -std::pow(z, -p + 1.0) * m.B, std::pow(z, -p + 2.0) * m.C};
}

IntegrandValue integrand(const PolynomialEnsemble& e, const MomentTriple& m,
                         std::optional<double> reciprocal_z) {
  const double K = e.level;
  const double K2 = K * K;
  const double absK = std::abs(K);
  const double where = reciprocal_z ? *reciprocal_z : std::nan("");
  if (reciprocal_z.has_value() != (m.scale_exponent != 0)) {
    throw Error(ErrorCode::kDomain, "scaled triple and reciprocal flag disagree");
  }
  if (!(m.A > 0.0)) throw Error(ErrorCode::kDegeneratePoint, "A <= 0 (point " + fmt(where) + ")");
  if (m.gram < -kGramEpsilon * m.gram_scale) {
    throw Error(ErrorCode::kDegeneratePoint,
                "A C - B^2 = " + fmt(m.gram) + " < 0" +
                    (reciprocal_z ? " at z=" + fmt(*reciprocal_z) : std::string{}));
  }
  IntegrandValue out;
  out.regularized = m.gram <= kGramEpsilon * m.gram_scale;
  const double gram = std::max(m.gram, 0.0);
  const double f2_coeff = std::numbers::inv_sqrtpi / std::numbers::sqrt2;

  if (!reciprocal_z) {
    const double expo =
        out.regularized ? (K == 0.0 ? 1.0 : 0.0) : std::exp(-K2 * m.C / (2.0 * gram));
    out.F1 = std::sqrt(gram) / m.A * expo / kPi;
    if (K != 0.0 && m.B != 0.0) {
      const double bk = std::abs(m.B) * absK;
      const double erf_term = out.regularized ? 1.0 : std::erf(bk / std::sqrt(2.0 * m.A * gram));
      out.F2 = f2_coeff * bk / std::pow(m.A, 1.5) * std::exp(-K2 / (2.0 * m.A)) * erf_term;
    }
    return out;
  }

  const double az = std::abs(*reciprocal_z);
  const double n = static_cast<double>(e.n);
  const double zn1 = std::pow(az, n - 1.0);  // |z|^{n-1}
  const double expo =
      out.regularized ? (K == 0.0 ? 1.0 : 0.0)
                      : std::exp(-K2 * zn1 * zn1 * m.C / (2.0 * gram));
  out.F1 = std::sqrt(gram) / m.A * expo / kPi;
  if (K != 0.0 && m.B != 0.0 && zn1 > 0.0) {
    const double bk = zn1 * std::abs(m.B) * absK;
    const double erf_term = out.regularized ? 1.0 : std::erf(bk / std::sqrt(2.0 * m.A * gram));
    out.F2 = f2_coeff * bk / std::pow(m.A, 1.5) *
             std::exp(-K2 * zn1 * zn1 * az * az / (2.0 * m.A)) * erf_term;
  }
  return out;
}

}  // namespace levelcross
