#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "levelcross/errors.hpp"
#include "levelcross/montecarlo.hpp"
#include "levelcross/roots.hpp"
#include "sturm_oracle.hpp"

using namespace levelcross;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> expand(const std::vector<double>& roots) {
  std::vector<double> p{1.0};
  for (double r : roots) {
    std::vector<double> q(p.size() + 1, 0.0);
    for (std::size_t k = 0; k < p.size(); ++k) {
      q[k + 1] += p[k];
      q[k] -= r * p[k];
    }
    p = q;
  }
  return p;
}

}  // namespace

TEST(CountLevelCrossings, SmallExamples) {
  const std::vector<double> a{-1, 0, 1};
  EXPECT_EQ(count_level_crossings(a, 0.0, {-2, 2}), 2u);
  const std::vector<double> b{1, 0, 1};
  EXPECT_EQ(count_level_crossings(b, 0.0, {-kInf, kInf}), 0u);
  const std::vector<double> c{0, -1, 0, 1};
  EXPECT_EQ(count_level_crossings(c, 0.0, {-0.5, 2}), 2u);
}

TEST(CountLevelCrossings, HalfOpenEndpoints) {
  const std::vector<double> c{0, -1, 0, 1};  // roots -1, 0, 1
  EXPECT_EQ(count_level_crossings(c, 0.0, {-1, 1}), 2u);
  EXPECT_EQ(count_level_crossings(c, 0.0, {1, 2}), 1u);
  EXPECT_EQ(count_level_crossings(c, 0.0, {-kInf, -1}), 0u);
  const std::vector<double> ivs_coeffs{-2, 0, 1};  // x^2 = 2 + K with K = 2: roots +-2
  EXPECT_EQ(count_level_crossings(ivs_coeffs, 2.0, {-2, 2}), 1u);
}

TEST(RealRoots, MultipleRoots) {
  EXPECT_EQ(real_roots(expand({1, 1, -2})), (std::vector<double>{-2, 1}));
  const auto triple = real_roots(expand({1, 1, 1}));
  ASSERT_EQ(triple.size(), 1u);
  EXPECT_NEAR(triple[0], 1.0, 1e-5);
  EXPECT_EQ(real_roots(std::vector<double>{0, 0, 0, 1}), (std::vector<double>{0}));
  EXPECT_EQ(real_roots(expand({0.5, 0.5, -1.5, -1.5})).size(), 2u);
}

TEST(RealRoots, NearTangency) {
  // (x-1)^2 + 1e-10 has no real roots; (x-1)(x-1-1e-7) has two.
  EXPECT_TRUE(real_roots(std::vector<double>{1 + 1e-10, -2, 1}).empty());
  const auto r = real_roots(expand({1.0, 1.0 + 1e-7}));
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(r[0], 1.0, 1e-8);
  EXPECT_NEAR(r[1], 1.0 + 1e-7, 1e-8);
}

TEST(RealRoots, TrailingZerosAndErrors) {
  EXPECT_EQ(real_roots(std::vector<double>{-2, 1, 0, 0}), (std::vector<double>{2}));
  EXPECT_TRUE(real_roots(std::vector<double>{3}).empty());
  EXPECT_THROW(real_roots(std::vector<double>{0, 0}), Error);
}

TEST(RealRoots, WideSpread) {
  const auto r = real_roots(expand({-1e4, -1, 1e-3, 2, 300}));
  ASSERT_EQ(r.size(), 5u);
  const double want[] = {-1e4, -1, 1e-3, 2, 300};
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(r[i], want[i], 1e-9 * std::max(1.0, std::abs(want[i])));
}

TEST(RealRoots, SturmOracleOnRandomIntegerPolynomials) {
  std::mt19937_64 gen(12345);
  std::uniform_int_distribution<int> coef(-4, 4);
  std::uniform_int_distribution<int> degree(1, 6);
  std::uniform_int_distribution<int> endpoint(-8, 9);  // 9: infinity, else halves
  int checked = 0;
  int mismatches = 0;
  while (checked < 1000) {
    const int d = degree(gen);
    std::vector<double> q(d + 1);
    sturm::Poly p(d + 1);
    bool nonzero = false;
    for (int k = 0; k <= d; ++k) {
      const int c = coef(gen);
      q[k] = c;
      p[k] = c;
      nonzero = nonzero || c != 0;
    }
    if (!nonzero) continue;
    auto pick = [&](int sign) {
      const int e = endpoint(gen);
      if (e == 9) return sturm::Point{true, sign, 0};
      return sturm::Point{false, 0, sturm::Rational(e, 2)};
    };
    sturm::Point lo = pick(-1);
    sturm::Point hi = pick(1);
    const double dlo = lo.infinite ? -kInf : static_cast<double>(lo.x);
    const double dhi = hi.infinite ? kInf : static_cast<double>(hi.x);
    if (!(dlo < dhi)) continue;
    const int want = sturm::count(p, lo, hi);
    const auto got = static_cast<int>(count_level_crossings(q, 0.0, {dlo, dhi}));
    if (got != want) {
      ++mismatches;
      ADD_FAILURE() << "degree " << d << " [" << dlo << ", " << dhi << ") got " << got
                    << " want " << want;
    }
    ++checked;
  }
  EXPECT_EQ(mismatches, 0);
}

TEST(RealRoots, BracketingAgreesWithCompanion) {
  for (std::size_t n : {150u, 260u}) {
    for (const auto& model : {CovarianceModel::independent(), CovarianceModel::geometric(0.5)}) {
      const auto batch = sample_coefficients(model, n, 40, 99);
      for (std::size_t i = 0; i < batch.count; ++i) {
        const auto s = batch.sample(i);
        const auto a = real_roots_companion(s);
        const auto b = real_roots_bracketing(s);
        ASSERT_EQ(a.size(), b.size()) << model.label() << " n=" << n << " sample " << i;
        for (std::size_t j = 0; j < a.size(); ++j) {
          EXPECT_NEAR(a[j], b[j], 1e-6 * std::max(1.0, std::abs(a[j])));
        }
      }
    }
  }
}

TEST(RealRoots, BracketingHandlesLowDegree) {
  const auto r = real_roots_bracketing(expand({-3, -0.5, 0.25, 0.9, 7}));
  const double want[] = {-3, -0.5, 0.25, 0.9, 7};
  ASSERT_EQ(r.size(), 5u);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(r[i], want[i], 1e-12 * std::max(1.0, std::abs(want[i])));
}
