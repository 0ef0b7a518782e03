#pragma once

// Monte Carlo counterpart of the Kac-Rice integral: sample stationary
// Gaussian coefficient vectors, count the real solutions of P_n(x) = K,
// and average.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "levelcross/moments.hpp"
#include "levelcross/quadrature.hpp"

namespace levelcross {

// Draws X_0..X_n with covariance Toeplitz(Gamma). Density models use a
// circulant embedding of size >= 4(n+1); if the embedding has an eigenvalue
// below -1e-9 a jittered dense Cholesky factor is used instead. The
// constant model is X_k = sqrt(rho) Z + sqrt(1 - rho) Y_k.
class CoefficientSampler {
 public:
  CoefficientSampler(const CovarianceModel& model, std::size_t n);
  ~CoefficientSampler();
  CoefficientSampler(const CoefficientSampler&) = delete;
  CoefficientSampler& operator=(const CoefficientSampler&) = delete;

  // Fills out[0..n] with the sample of the given index. Thread-safe.
  void draw(std::uint64_t seed, std::uint64_t index, std::span<double> out) const;

  std::size_t degree() const noexcept { return n_; }
  bool circulant() const noexcept { return plan_ != nullptr; }
  std::size_t embedding_size() const noexcept { return m_; }

 private:
  std::size_t n_;
  bool constant_ = false;
  double rho_ = 0.0;
  bool independent_ = false;
  std::size_t m_ = 0;
  std::vector<double> sqrt_eig_;        // sqrt(lambda_j / M)
  std::vector<double> chol_;            // dense lower factor, row major
  void* plan_ = nullptr;
};

// Independent stream for sample `index` under master `seed`.
std::uint64_t sample_stream_seed(std::uint64_t seed, std::uint64_t index) noexcept;

struct SampleBatch {
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::size_t count = 0;
  std::vector<double> coeffs;  // count rows of n + 1

  std::span<const double> sample(std::size_t i) const {
    return {coeffs.data() + i * (n + 1), n + 1};
  }
};

SampleBatch sample_coefficients(const CovarianceModel& model, std::size_t n, std::size_t count,
                                std::uint64_t seed);

// Distinct real roots of P(x) - K in [lo, hi).
std::size_t count_level_crossings(std::span<const double> coeffs, double K,
                                  const IntervalSpec& spec);
std::vector<std::size_t> count_level_crossings(std::span<const double> coeffs, double K,
                                               std::span<const IntervalSpec> specs);

struct MCEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;     // samples used
  std::size_t rejected = 0;  // root finding failed
  IntervalSpec interval;
  // rejected >= 0.1% of the samples drawn
  bool unreliable = false;
};

struct MCOptions {
  std::size_t count = 10000;
  std::uint64_t seed = 0;
  // 0 picks LEVELCROSS_THREADS or 1.
  unsigned threads = 0;
};

// Per-sample counts, one row per sample and one column per interval; -1 marks
// a rejected sample.
using SampleCounts = std::vector<std::vector<int>>;

std::vector<MCEstimate> estimate_crossings(const PolynomialEnsemble& e,
                                           std::span<const IntervalSpec> specs,
                                           const MCOptions& opts,
                                           SampleCounts* per_sample = nullptr);

MCEstimate estimate_crossings(const PolynomialEnsemble& e, const IntervalSpec& spec,
                              std::size_t count, std::uint64_t seed);

// LEVELCROSS_THREADS if set to a positive integer, else 1.
unsigned default_threads();

}  // namespace levelcross
