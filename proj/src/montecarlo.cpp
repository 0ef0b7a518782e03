#include "levelcross/montecarlo.hpp"

#include <fftw3.h>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <random>
#include <string>
#include <thread>

#include "levelcross/errors.hpp"
#include "levelcross/roots.hpp"

namespace levelcross {

namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::size_t next_pow2(std::size_t v) {
  std::size_t p = 1;
  while (p < v) p <<= 1;
  return p;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t m)
      : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * m))) {
    if (data == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
};

}  // namespace

std::uint64_t sample_stream_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(seed ^ splitmix64(index));
}

CoefficientSampler::CoefficientSampler(const CovarianceModel& model, std::size_t n) : n_(n) {
  if (n < 1) throw Error(ErrorCode::kDomain, "sampling needs n >= 1");
  if (model.kind() == ModelKind::kConstantRho) {
    constant_ = true;
    rho_ = model.rho();
    return;
  }
  if (model.kind() == ModelKind::kIndependent) {
    independent_ = true;
    return;
  }
  m_ = next_pow2(4 * (n + 1));
  const CovarianceSequence gamma = model.covariance(m_ / 2);
  std::vector<double> ring(m_);
  for (std::size_t j = 0; j < m_; ++j) {
    ring[j] = gamma(static_cast<std::ptrdiff_t>(std::min(j, m_ - j)));
  }
  // The ring is real and symmetric, so its DFT is real.
  std::vector<double> eig(m_);
  {
    FftwBuffer in(m_), out(m_);
    fftw_plan p;
    {
      std::lock_guard<std::mutex> lock(fftw_planner_mutex());
      p = fftw_plan_dft_1d(static_cast<int>(m_), in.data, out.data, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    for (std::size_t j = 0; j < m_; ++j) {
      in.data[j][0] = ring[j];
      in.data[j][1] = 0.0;
    }
    fftw_execute(p);
    for (std::size_t j = 0; j < m_; ++j) eig[j] = out.data[j][0];
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(p);
  }
  const double min_eig = *std::min_element(eig.begin(), eig.end());
  if (min_eig >= -1e-9) {
    sqrt_eig_.resize(m_);
    for (std::size_t j = 0; j < m_; ++j) {
      sqrt_eig_[j] = std::sqrt(std::max(eig[j], 0.0) / static_cast<double>(m_));
    }
    FftwBuffer in(m_), out(m_);
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(m_), in.data, out.data, FFTW_FORWARD,
                             FFTW_ESTIMATE);
    return;
  }
  const std::size_t d = n + 1;
  Eigen::MatrixXd t(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      t(i, j) = gamma(static_cast<std::ptrdiff_t>(i > j ? i - j : j - i));
    }
    t(i, i) += 1e-12;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(t);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kFactorization, "covariance matrix is not positive definite");
  }
  const Eigen::MatrixXd l = llt.matrixL();
  chol_.resize(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) chol_[i * d + j] = l(i, j);
  }
}

CoefficientSampler::~CoefficientSampler() {
  if (plan_ != nullptr) {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
  }
}

void CoefficientSampler::draw(std::uint64_t seed, std::uint64_t index,
                              std::span<double> out) const {
  if (out.size() != n_ + 1) throw Error(ErrorCode::kDomain, "output span must hold n + 1 values");
  std::mt19937_64 gen(sample_stream_seed(seed, index));
  std::normal_distribution<double> normal(0.0, 1.0);
  if (independent_) {
    for (double& x : out) x = normal(gen);
    return;
  }
  if (constant_) {
    const double shared = std::sqrt(rho_) * normal(gen);
    const double own = std::sqrt(1.0 - rho_);
    for (double& x : out) x = shared + own * normal(gen);
    return;
  }
  if (plan_ != nullptr) {
    FftwBuffer in(m_), res(m_);
    for (std::size_t j = 0; j < m_; ++j) {
      in.data[j][0] = sqrt_eig_[j] * normal(gen);
      in.data[j][1] = sqrt_eig_[j] * normal(gen);
    }
    fftw_execute_dft(static_cast<fftw_plan>(plan_), in.data, res.data);
    for (std::size_t k = 0; k <= n_; ++k) out[k] = res.data[k][0];
    return;
  }
  const std::size_t d = n_ + 1;
  std::vector<double> z(d);
  for (double& v : z) v = normal(gen);
  for (std::size_t i = 0; i < d; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j <= i; ++j) s += chol_[i * d + j] * z[j];
    out[i] = s;
  }
}

SampleBatch sample_coefficients(const CovarianceModel& model, std::size_t n, std::size_t count,
                                std::uint64_t seed) {
  const CoefficientSampler sampler(model, n);
  SampleBatch b;
  b.seed = seed;
  b.n = n;
  b.count = count;
  b.coeffs.resize(count * (n + 1));
  for (std::size_t i = 0; i < count; ++i) {
    sampler.draw(seed, i, {b.coeffs.data() + i * (n + 1), n + 1});
  }
  return b;
}

std::vector<std::size_t> count_level_crossings(std::span<const double> coeffs, double K,
                                               std::span<const IntervalSpec> specs) {
  if (coeffs.empty()) throw Error(ErrorCode::kDomain, "empty coefficient vector");
  std::vector<double> q(coeffs.begin(), coeffs.end());
  q[0] -= K;
  std::vector<double> roots = real_roots(q);
  std::vector<double> ends;
  for (const auto& s : specs) {
    ends.push_back(s.lo);
    ends.push_back(s.hi);
  }
  snap_roots(q, roots, ends);
  std::vector<std::size_t> out;
  for (const auto& s : specs) {
    s.validate();
    out.push_back(static_cast<std::size_t>(std::count_if(
        roots.begin(), roots.end(), [&s](double r) { return r >= s.lo && r < s.hi; })));
  }
  return out;
}

std::size_t count_level_crossings(std::span<const double> coeffs, double K,
                                  const IntervalSpec& spec) {
  return count_level_crossings(coeffs, K, std::span<const IntervalSpec>(&spec, 1))[0];
}

unsigned default_threads() {
  if (const char* env = std::getenv("LEVELCROSS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return 1;
}

std::vector<MCEstimate> estimate_crossings(const PolynomialEnsemble& e,
                                           std::span<const IntervalSpec> specs,
                                           const MCOptions& opts, SampleCounts* per_sample) {
  e.validate();
  if (opts.count < 100) throw Error(ErrorCode::kDomain, "count must be >= 100");
  if (specs.empty()) throw Error(ErrorCode::kDomain, "no intervals given");
  for (const auto& s : specs) s.validate();
  const CoefficientSampler sampler(e.model, e.n);
  const std::size_t k = specs.size();
  std::vector<int> counts(opts.count * k, 0);
  std::vector<char> rejected(opts.count, 0);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    std::vector<double> c(e.n + 1);
    constexpr std::size_t kChunk = 16;
    for (;;) {
      const std::size_t start = next.fetch_add(kChunk);
      if (start >= opts.count) break;
      const std::size_t stop = std::min(opts.count, start + kChunk);
      for (std::size_t i = start; i < stop; ++i) {
        sampler.draw(opts.seed, i, c);
        try {
          const auto r = count_level_crossings(c, e.level, specs);
          for (std::size_t j = 0; j < k; ++j) counts[i * k + j] = static_cast<int>(r[j]);
        } catch (const Error& err) {
          if (err.code() != ErrorCode::kRootFinding && err.code() != ErrorCode::kDomain) throw;
          rejected[i] = 1;
        }
      }
    }
  };
  const unsigned threads = opts.threads > 0 ? opts.threads : default_threads();
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          worker();
        } catch (...) {
          errors[t] = std::current_exception();
          next.store(opts.count);
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& ep : errors) {
      if (ep) std::rethrow_exception(ep);
    }
  }

  std::size_t bad = 0;
  for (char r : rejected) bad += r != 0;
  const std::size_t used = opts.count - bad;
  std::vector<MCEstimate> out(k);
  for (std::size_t j = 0; j < k; ++j) {
    std::uint64_t s1 = 0;
    std::uint64_t s2 = 0;
    for (std::size_t i = 0; i < opts.count; ++i) {
      if (rejected[i]) continue;
      const auto v = static_cast<std::uint64_t>(counts[i * k + j]);
      s1 += v;
      s2 += v * v;
    }
    MCEstimate& m = out[j];
    m.count = used;
    m.rejected = bad;
    m.interval = specs[j];
    m.unreliable = static_cast<double>(bad) >= 1e-3 * static_cast<double>(opts.count);
    if (used > 0) {
      const long double u = static_cast<long double>(used);
      const long double mean = static_cast<long double>(s1) / u;
      m.mean = static_cast<double>(mean);
      if (used > 1) {
        const long double var =
            (static_cast<long double>(s2) - static_cast<long double>(s1) * mean) / (u - 1);
        m.std_error = static_cast<double>(std::sqrt(std::max<long double>(var, 0) / u));
      }
    }
  }
  if (per_sample != nullptr) {
    per_sample->assign(opts.count, std::vector<int>(k, -1));
    for (std::size_t i = 0; i < opts.count; ++i) {
      if (rejected[i]) continue;
      for (std::size_t j = 0; j < k; ++j) (*per_sample)[i][j] = counts[i * k + j];
    }
  }
  return out;
}

MCEstimate estimate_crossings(const PolynomialEnsemble& e, const IntervalSpec& spec,
                              std::size_t count, std::uint64_t seed) {
  MCOptions opts;
  opts.count = count;
  opts.seed = seed;
  return estimate_crossings(e, std::span<const IntervalSpec>(&spec, 1), opts)[0];
}

}  // namespace levelcross
