#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <numbers>

#include "levelcross/errors.hpp"
#include "levelcross/moments.hpp"

using namespace levelcross;

namespace {

constexpr double kPi = std::numbers::pi;

PolynomialEnsemble ens(std::size_t n, CovarianceModel m = CovarianceModel::independent(),
                       double K = 0.0) {
  return {n, std::move(m), K};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Plain double sums in long double: A = sum_jk G(k-j) x^(k+j), and so on.
struct Oracle {
  long double A = 0, B = 0, C = 0;
};

Oracle double_sum(const CovarianceSequence& g, std::size_t n, long double x) {
  Oracle o;
  for (std::size_t k = 0; k <= n; ++k) {
    for (std::size_t j = 0; j <= n; ++j) {
      const long double gam = g(static_cast<std::ptrdiff_t>(k) - static_cast<std::ptrdiff_t>(j));
      o.A += gam * std::pow(x, static_cast<long double>(k + j));
      if (k >= 1) o.B += gam * k * std::pow(x, static_cast<long double>(k + j - 1));
      if (k >= 1 && j >= 1) o.C += gam * k * j * std::pow(x, static_cast<long double>(k + j - 2));
    }
  }
  return o;
}

std::vector<CovarianceModel> builtin_models() {
  return {CovarianceModel::independent(), CovarianceModel::geometric(0.5),
          CovarianceModel::raised_cosine(0.5)};
}

}  // namespace

TEST(MomentsDirect, LinearIndependent) {
  const auto g = CovarianceModel::independent().covariance(1);
  for (double x : {-3.0, -0.4, 0.0, 0.7, 2.0}) {
    const auto m = moments_direct(ens(1), g, x);
    EXPECT_DOUBLE_EQ(m.A, 1 + x * x);
    EXPECT_DOUBLE_EQ(m.B, x);
    EXPECT_DOUBLE_EQ(m.C, 1.0);
    EXPECT_EQ(m.scale_exponent, 0);
  }
}

TEST(MomentsDirect, LinearCorrelated) {
  const double rho = 0.3;
  const CovarianceSequence g({1.0, rho});
  for (double x : {-0.8, 0.1, 0.9}) {
    const auto m = moments_direct(ens(1), g, x);
    EXPECT_NEAR(m.A, 1 + 2 * rho * x + x * x, 1e-15);
    EXPECT_NEAR(m.B, rho + x, 1e-15);
    EXPECT_NEAR(m.C, 1.0, 1e-15);
  }
}

TEST(MomentsDirect, QuadraticIndependent) {
  const auto m = moments_direct(ens(2), CovarianceModel::independent().covariance(2), 0.5);
  EXPECT_DOUBLE_EQ(m.A, 1.3125);
  EXPECT_DOUBLE_EQ(m.B, 0.75);
  EXPECT_DOUBLE_EQ(m.C, 2.0);
}

TEST(MomentsDirect, MissingLags) {
  try {
    moments_direct(ens(5), CovarianceSequence({1.0, 0.2}), 0.3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingLags);
  }
}

TEST(MomentsDirect, MatchesDoubleSum) {
  for (const auto& model : builtin_models()) {
    const std::size_t n = 40;
    const auto g = model.covariance(n);
    for (double x : {-0.97, -0.5, 0.0, 0.33, 0.99, 1.0, -1.0}) {
      const auto m = moments_direct(ens(n, model), g, x);
      const auto o = double_sum(g, n, x);
      EXPECT_LT(rel(m.A, static_cast<double>(o.A)), 1e-13) << model.label() << x;
      EXPECT_LT(std::abs(m.B - static_cast<double>(o.B)), 1e-13 * static_cast<double>(o.C))
          << model.label() << x;
      EXPECT_LT(rel(m.C, static_cast<double>(o.C)), 1e-13) << model.label() << x;
    }
  }
}

TEST(MomentsSpectral, IndependentGeometricSum) {
  const auto m = moments_spectral(ens(10), uniform_density(), 0.5);
  EXPECT_NEAR(m.A, (1 - std::pow(0.5, 22)) / 0.75, 1e-13);
}

TEST(MomentsSpectral, LinearPoisson) {
  const auto m = moments_spectral(ens(1, CovarianceModel::geometric(0.5)),
                                  poisson_kernel_density(0.5), 0.25);
  EXPECT_NEAR(m.A, 1.3125, 1e-13);
  EXPECT_NEAR(m.B, 0.75, 1e-13);
  EXPECT_NEAR(m.C, 1.0, 1e-13);
}

TEST(MomentsSpectral, AgreesWithDirectNearEdge) {
  const auto model = CovarianceModel::geometric(0.5);
  const auto d = moments_direct(ens(50, model), model.covariance(50), 0.9);
  const auto s = moments_spectral(ens(50, model), model.density(), 0.9);
  EXPECT_LT(rel(s.A, d.A), 1e-8);
  EXPECT_LT(rel(s.B, d.B), 1e-8);
  EXPECT_LT(rel(s.C, d.C), 1e-8);
}

TEST(MomentsSpectral, RejectsEdge) {
  EXPECT_THROW(moments_spectral(ens(3), uniform_density(), 1.0), Error);
}

TEST(MomentsProperties, DerivativeIdentity) {
  for (const auto& model : builtin_models()) {
    for (std::size_t n : {10u, 50u, 200u}) {
      const auto g = model.covariance(n);
      for (int i = 0; i <= 40; ++i) {
        const double x = -0.95 + 1.9 * i / 40;
        const double h = 1e-5;
        const double dA = (moments_direct(ens(n, model), g, x + h).A -
                           moments_direct(ens(n, model), g, x - h).A) /
                          (2 * h);
        if (std::abs(dA) <= 1e-6) continue;
        const double B = moments_direct(ens(n, model), g, x).B;
        EXPECT_LT(rel(B, dA / 2), 1e-4) << model.label() << " n=" << n << " x=" << x;
      }
    }
  }
}

TEST(MomentsProperties, SandwichInnerAndOuter) {
  const std::vector<std::pair<CovarianceModel, std::pair<double, double>>> cases = {
      {CovarianceModel::independent(), {1.0, 1.0}},
      {CovarianceModel::geometric(0.5), {1.0 / 3.0, 3.0}},
      {CovarianceModel::raised_cosine(0.25), {0.5, 1.5}},
  };
  for (const auto& [model, c] : cases) {
    const std::size_t n = 30;
    const auto g = model.covariance(n);
    for (double x : {-0.99, -0.6, 0.0, 0.4, 0.99}) {
      double s = 0;
      for (std::size_t k = 0; k <= n; ++k) s += std::pow(x, 2.0 * k);
      const double A = moments_direct(ens(n, model), g, x).A;
      EXPECT_GE(A, c.first * s * (1 - 1e-12)) << model.label() << x;
      EXPECT_LE(A, c.second * s * (1 + 1e-12)) << model.label() << x;
    }
    // |x| > 1 through the scaled form: At = A(z), S(1/z) z^{2n} = S(z).
    for (double x : {-2.0, -1.1, 1.1, 2.0}) {
      const double z = 1 / x;
      double s = 0;
      for (std::size_t k = 0; k <= n; ++k) s += std::pow(z, 2.0 * k);
      const double At = moments_outer_scaled_direct(ens(n, model), g, z).A;
      EXPECT_GE(At, c.first * s * (1 - 1e-12));
      EXPECT_LE(At, c.second * s * (1 + 1e-12));
    }
  }
}

TEST(MomentsProperties, GramNonNegative) {
  for (const auto& model : builtin_models()) {
    const std::size_t n = 120;
    const auto g = model.covariance(n);
    for (int i = 1; i < 100; ++i) {
      const double t = -1 + 2.0 * i / 100;
      const auto inner = moments_direct(ens(n, model), g, t);
      EXPECT_GE(inner.gram, -kGramEpsilon * inner.gram_scale);
      const auto spec = moments_spectral(ens(n, model), model.density(), t);
      EXPECT_GE(spec.gram, -kGramEpsilon * spec.gram_scale);
      if (t != 0.0) {
        const auto outer = moments_outer_scaled_direct(ens(n, model), g, t);
        EXPECT_GE(outer.gram, -kGramEpsilon * outer.gram_scale);
      }
    }
  }
}

TEST(MomentsOuter, LinearIndependent) {
  const auto m = moments_outer_scaled(ens(1), uniform_density(), 0.5);
  EXPECT_NEAR(m.A, 1.25, 1e-13);
  EXPECT_EQ(m.scale_exponent, 2);
  const auto u = unscale(m, 0.5);
  EXPECT_NEAR(u.A, 5.0, 1e-12);
  EXPECT_NEAR(u.B, 2.0, 1e-12);
  EXPECT_NEAR(u.C, 1.0, 1e-12);
}

TEST(MomentsOuter, DegreeTenGeometricSum) {
  const double z = 0.5;
  const double want = std::pow(z, 20) * (std::pow(4.0, 11) - 1) / 3;
  EXPECT_LT(rel(moments_outer_scaled(ens(10), uniform_density(), z).A, want), 1e-12);
  EXPECT_LT(rel(moments_outer_scaled_direct(ens(10), CovarianceModel::independent().covariance(10),
                                            z)
                    .A,
                want),
            1e-13);
}

TEST(MomentsOuter, HighDegreeNearEdgeAgainstDoubleSum) {
  const auto model = CovarianceModel::geometric(0.5);
  const std::size_t n = 200;
  const double z = 0.99;
  const auto g = model.covariance(n);
  const auto s = moments_outer_scaled(ens(n, model), model.density(), z);
  const auto d = moments_outer_scaled_direct(ens(n, model), g, z);
  const Oracle o = double_sum(g, n, z);
  const long double nn = n;
  const long double At = o.A;
  const long double Bt = z * o.B - nn * o.A;
  const long double Ct = nn * nn * o.A - 2 * nn * z * o.B + z * z * o.C;
  for (const auto& m : {s, d}) {
    EXPECT_GT(m.A, 0);
    EXPECT_GT(m.C, 0);
    EXPECT_GE(m.gram, 0);
    EXPECT_LT(rel(m.A, static_cast<double>(At)), 1e-9);
    EXPECT_LT(std::abs(m.B - static_cast<double>(Bt)), 1e-9 * std::abs(static_cast<double>(Ct)));
    EXPECT_LT(rel(m.C, static_cast<double>(Ct)), 1e-9);
  }
}

TEST(MomentsOuter, ScaleConsistency) {
  for (const auto& model : builtin_models()) {
    for (std::size_t n = 1; n <= 15; ++n) {
      const auto g = model.covariance(n);
      for (double z : {0.3, 0.5, 0.9, -0.5}) {
        const auto u = unscale(moments_outer_scaled(ens(n, model), model.density(), z), z);
        const auto d = moments_direct(ens(n, model), g, 1 / z);
        EXPECT_LT(rel(u.A, d.A), 1e-8) << model.label() << n << z;
        EXPECT_LT(rel(u.B, d.B), 1e-8) << model.label() << n << z;
        EXPECT_LT(rel(u.C, d.C), 1e-8) << model.label() << n << z;
      }
    }
  }
}

TEST(MomentsOuter, RejectsZeroZ) {
  try {
    moments_outer_scaled(ens(3), uniform_density(), 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDomain);
  }
}

TEST(Integrand, OriginIndependent) {
  const auto g = CovarianceModel::independent().covariance(3);
  const auto m = moments_direct(ens(3), g, 0.0);
  const auto v0 = integrand(ens(3), m);
  EXPECT_DOUBLE_EQ(v0.F1, 1 / kPi);
  EXPECT_EQ(v0.F2, 0.0);
  const auto v2 = integrand(ens(3, CovarianceModel::independent(), 2.0), m);
  EXPECT_NEAR(v2.F1, std::exp(-2.0) / kPi, 1e-16);
  EXPECT_EQ(v2.F2, 0.0);
}

TEST(Integrand, OriginCorrelatedAgainstHighPrecision) {
  using Big = boost::multiprecision::cpp_bin_float_50;
  const CovarianceSequence g({1.0, 0.5});
  const auto e = ens(1, CovarianceModel::geometric(0.5), 1.0);
  const auto m = moments_direct(e, g, 0.0);
  EXPECT_DOUBLE_EQ(m.A, 1.0);
  EXPECT_DOUBLE_EQ(m.B, 0.5);
  EXPECT_DOUBLE_EQ(m.C, 1.0);
  const auto v = integrand(e, m);
  const Big pi = boost::math::constants::pi<Big>();
  const Big gram = Big(3) / 4;
  const Big f1 = sqrt(gram) / pi * exp(-Big(1) / (2 * gram));
  const Big f2 = Big(1) / sqrt(2 * pi) * Big(1) / 2 * exp(-Big(1) / 2) *
                 erf(Big(1) / 2 / sqrt(2 * gram));
  EXPECT_NEAR(v.F1, static_cast<double>(f1), 1e-15);
  EXPECT_NEAR(v.F2, static_cast<double>(f2), 1e-15);
}

TEST(Integrand, StandardErfIsDoubleAccurate) {
  using Big = boost::multiprecision::cpp_bin_float_50;
  for (int i = 0; i <= 600; ++i) {
    const double x = i / 100.0;
    EXPECT_NEAR(std::erf(x), static_cast<double>(erf(Big(x))), 1e-15) << x;
  }
}

TEST(Integrand, LevelZeroKillsF2AndValuesNonNegative) {
  const auto model = CovarianceModel::geometric(0.5);
  const std::size_t n = 25;
  const auto g = model.covariance(n);
  for (int i = -20; i <= 20; ++i) {
    const double x = 0.049 * i;
    const auto m = moments_direct(ens(n, model), g, x);
    EXPECT_EQ(integrand(ens(n, model, 0.0), m).F2, 0.0);
    const auto v = integrand(ens(n, model, 1.5), m);
    EXPECT_GE(v.F1, 0.0);
    EXPECT_GE(v.F2, 0.0);
    EXPECT_TRUE(std::isfinite(v.F1) && std::isfinite(v.F2));
  }
}

TEST(Integrand, ReciprocalLinearIsCauchy) {
  const auto g = CovarianceModel::independent().covariance(1);
  for (double z : {-1.0, -0.3, 1e-9, 0.5, 1.0}) {
    const auto v = integrand(ens(1), moments_outer_scaled_direct(ens(1), g, z), z);
    EXPECT_NEAR(v.F1, 1 / (kPi * (1 + z * z)), 1e-15) << z;
  }
}

TEST(Integrand, RemovableSingularityAndDegenerate) {
  MomentTriple m;
  m.A = 2.0;
  m.B = 1.0;
  m.C = 0.5;
  m.gram = 0.0;
  m.gram_scale = 1.0;
  const auto v = integrand(ens(4, CovarianceModel::independent(), 1.0), m);
  EXPECT_TRUE(v.regularized);
  EXPECT_EQ(v.F1, 0.0);
  m.gram = -1e-3;
  try {
    integrand(ens(4), m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegeneratePoint);
  }
}
