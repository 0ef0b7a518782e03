#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "levelcross/errors.hpp"
#include "levelcross/montecarlo.hpp"

using namespace levelcross;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct LagStat {
  double mean;
  double se;
};

// Mean over the batch of X_j X_{j+k}, averaged along j, with the standard
// error of the per-sample averages.
LagStat lag_covariance(const SampleBatch& b, std::size_t k) {
  double s1 = 0, s2 = 0;
  for (std::size_t i = 0; i < b.count; ++i) {
    const auto x = b.sample(i);
    double v = 0;
    for (std::size_t j = 0; j + k <= b.n; ++j) v += x[j] * x[j + k];
    v /= static_cast<double>(b.n + 1 - k);
    s1 += v;
    s2 += v * v;
  }
  const double c = static_cast<double>(b.count);
  const double mean = s1 / c;
  const double var = (s2 - s1 * mean) / (c - 1);
  return {mean, std::sqrt(var / c)};
}

}  // namespace

TEST(SampleCoefficients, IndependentLinear) {
  const auto b = sample_coefficients(CovarianceModel::independent(), 1, 100000, 3);
  const auto g1 = lag_covariance(b, 1);
  EXPECT_LE(std::abs(g1.mean), 5 / std::sqrt(100000.0));
  EXPECT_NEAR(lag_covariance(b, 0).mean, 1.0, 5 * lag_covariance(b, 0).se);
}

TEST(SampleCoefficients, GeometricCirculant) {
  const auto model = CovarianceModel::geometric(0.5);
  const CoefficientSampler sampler(model, 32);
  EXPECT_TRUE(sampler.circulant());
  EXPECT_GE(sampler.embedding_size(), 4u * 33u);
  const auto b = sample_coefficients(model, 32, 100000, 4);
  for (std::size_t k : {0u, 1u, 2u}) {
    const auto s = lag_covariance(b, k);
    EXPECT_NEAR(s.mean, std::pow(0.5, k), 5 * s.se) << k;
  }
}

TEST(SampleCoefficients, RaisedCosineCirculant) {
  const auto b = sample_coefficients(CovarianceModel::raised_cosine(0.5), 20, 50000, 8);
  const double want[] = {1.0, 0.5, 0.0};
  for (std::size_t k : {0u, 1u, 2u}) {
    const auto s = lag_covariance(b, k);
    EXPECT_NEAR(s.mean, want[k], 5 * s.se) << k;
  }
}

TEST(SampleCoefficients, ConstantRho) {
  const auto b = sample_coefficients(CovarianceModel::constant(0.5), 8, 100000, 5);
  double s1 = 0, s2 = 0;
  for (std::size_t i = 0; i < b.count; ++i) {
    const double v = b.sample(i)[0] * b.sample(i)[5];
    s1 += v;
    s2 += v * v;
  }
  const double mean = s1 / b.count;
  const double se = std::sqrt((s2 / b.count - mean * mean) / b.count);
  EXPECT_NEAR(mean, 0.5, 5 * se);
}

TEST(SampleCoefficients, Deterministic) {
  const auto a = sample_coefficients(CovarianceModel::geometric(0.3), 40, 50, 77);
  const auto b = sample_coefficients(CovarianceModel::geometric(0.3), 40, 50, 77);
  const auto c = sample_coefficients(CovarianceModel::geometric(0.3), 40, 50, 78);
  EXPECT_EQ(a.coeffs, b.coeffs);
  EXPECT_NE(a.coeffs, c.coeffs);
  EXPECT_NE(sample_stream_seed(1, 0), sample_stream_seed(1, 1));
  EXPECT_NE(sample_stream_seed(1, 0), sample_stream_seed(2, 0));
}

TEST(EstimateCrossings, LinearHasOneRoot) {
  const auto est =
      estimate_crossings({1, CovarianceModel::independent(), 0.0}, {-kInf, kInf}, 100000, 1);
  EXPECT_EQ(est.mean, 1.0);
  EXPECT_EQ(est.std_error, 0.0);
  EXPECT_EQ(est.count, 100000u);
  EXPECT_EQ(est.rejected, 0u);
  EXPECT_FALSE(est.unreliable);
}

TEST(EstimateCrossings, AgreesWithQuadrature) {
  const PolynomialEnsemble e{50, CovarianceModel::geometric(0.5), 1.0};
  const auto mc = estimate_crossings(e, {-1, 1}, 10000, 11);
  const double kr = expected_crossings(e, {-1, 1}).value;
  EXPECT_LE(std::abs(mc.mean - kr), 3 * mc.std_error);
}

TEST(EstimateCrossings, ConvergesAtRootCountRate) {
  const PolynomialEnsemble e{5, CovarianceModel::geometric(0.4), 0.5};
  const double kr = expected_crossings(e, {-kInf, kInf}).value;
  for (std::size_t count : {1000u, 10000u, 100000u}) {
    const auto mc = estimate_crossings(e, {-kInf, kInf}, count, 21);
    EXPECT_LE(std::abs(mc.mean - kr), 4 * mc.std_error) << count;
    EXPECT_LT(mc.std_error, 1.5 / std::sqrt(static_cast<double>(count)));
  }
}

TEST(EstimateCrossings, ThreadIndependentAndPerSampleCounts) {
  const PolynomialEnsemble e{30, CovarianceModel::geometric(0.5), 0.3};
  const std::vector<IntervalSpec> ivs{{-1, 1}, {1, kInf}};
  MCOptions o;
  o.count = 2000;
  o.seed = 9;
  o.threads = 1;
  SampleCounts per;
  const auto one = estimate_crossings(e, ivs, o, &per);
  o.threads = 4;
  const auto four = estimate_crossings(e, ivs, o);
  for (std::size_t j = 0; j < ivs.size(); ++j) {
    EXPECT_EQ(one[j].mean, four[j].mean);
    EXPECT_EQ(one[j].std_error, four[j].std_error);
    long total = 0;
    for (const auto& row : per) total += row[j];
    EXPECT_DOUBLE_EQ(one[j].mean, static_cast<double>(total) / 2000.0);
  }
}

TEST(EstimateCrossings, Errors) {
  EXPECT_THROW(estimate_crossings({5, CovarianceModel::independent(), 0.0}, {-1, 1}, 50, 1),
               Error);
  EXPECT_THROW(estimate_crossings({5, CovarianceModel::independent(), 0.0}, {1, -1}, 500, 1),
               Error);
}
