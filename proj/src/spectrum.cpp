#include "levelcross/spectrum.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include "levelcross/errors.hpp"

namespace levelcross {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// FFTW planning is not thread safe; execution with a fixed plan is.
std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

std::size_t next_pow2(std::size_t v) {
  std::size_t p = 1;
  while (p < v) p <<= 1;
  return p;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

struct GridScan {
  double min;
  double max;
};

GridScan scan_grid(const SpectralDensity::Fn& f, std::size_t grid, bool check_even) {
  GridScan s{std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity()};
  for (std::size_t j = 0; j <= grid; ++j) {
    const double phi = -kPi + kTwoPi * static_cast<double>(j) / static_cast<double>(grid);
    const double v = f(phi);
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kDomain, "density is not finite at phi=" + fmt(phi));
    }
    if (check_even) {
      const double mirror = f(-phi);
      if (std::abs(v - mirror) > 1e-12 * std::max(1.0, std::abs(v))) {
        throw Error(ErrorCode::kNotEven, "f(phi) != f(-phi) at phi=" + fmt(phi));
      }
    }
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  return s;
}

// Real parts of (2pi/N) sum_j f(phi_j) e^{-ik phi_j}, phi_j = -pi + 2pi j/N,
// for k = 0..m. The imaginary parts vanish for even f up to rounding; the
// largest one is returned through max_imag.
std::vector<double> trapezoid_coefficients(const SpectralDensity& f, std::size_t nodes,
                                           std::size_t m, double& max_imag) {
  double* in = fftw_alloc_real(nodes);
  fftw_complex* out = fftw_alloc_complex(nodes / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_plan_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(nodes), in, out, FFTW_ESTIMATE);
  }
  for (std::size_t j = 0; j < nodes; ++j) {
    in[j] = f(-kPi + kTwoPi * static_cast<double>(j) / static_cast<double>(nodes));
  }
  fftw_execute(plan);
  std::vector<double> gamma(m + 1);
  const double h = kTwoPi / static_cast<double>(nodes);
  max_imag = 0.0;
  for (std::size_t k = 0; k <= m; ++k) {
    // e^{-ik(-pi)} = (-1)^k
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    gamma[k] = sign * h * out[k][0];
    max_imag = std::max(max_imag, std::abs(h * out[k][1]));
  }
  {
    std::lock_guard lock(fftw_plan_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  return gamma;
}

}  // namespace

const char* to_string(Smoothness s) noexcept { return s == Smoothness::kC0 ? "C0" : "C1"; }

SpectralDensity::SpectralDensity(Fn f, Smoothness smoothness, double lower, double upper,
                                 std::string name)
    : f_(std::move(f)), smoothness_(smoothness), lower_(lower), upper_(upper),
      name_(std::move(name)) {
  if (!f_) throw Error(ErrorCode::kDomain, "empty density function");
  if (!(lower_ <= upper_)) throw Error(ErrorCode::kDomain, "lower bound exceeds upper bound");
}

SpectralDensity SpectralDensity::from_function(Fn f, Smoothness smoothness, std::string name,
                                               std::size_t grid) {
  if (grid < 64) throw Error(ErrorCode::kDomain, "grid must be >= 64");
  const GridScan s = scan_grid(f, grid, /*check_even=*/true);
  if (s.min < 0.0) {
    throw Error(ErrorCode::kNotStrictlyPositive, "density negative, min=" + fmt(s.min));
  }
  return SpectralDensity(std::move(f), smoothness, s.min, s.max, std::move(name));
}

SpectralDensity uniform_density() {
  const double c = 1.0 / kTwoPi;
  return SpectralDensity([c](double) { return c; }, Smoothness::kC1, c, c, "uniform");
}

SpectralDensity poisson_kernel_density(double rho) {
  if (!(std::abs(rho) < 1.0)) throw Error(ErrorCode::kDomain, "poisson kernel needs |rho| < 1");
  const double a = std::abs(rho);
  const double lo = (1.0 - a) / (1.0 + a) / kTwoPi;
  const double hi = (1.0 + a) / (1.0 - a) / kTwoPi;
  return SpectralDensity(
      [rho](double phi) {
        return (1.0 - rho * rho) / (kTwoPi * (1.0 - 2.0 * rho * std::cos(phi) + rho * rho));
      },
      Smoothness::kC1, lo, hi, "poisson");
}

SpectralDensity raised_cosine_density(double rho) {
  if (!(std::abs(rho) <= 0.5)) throw Error(ErrorCode::kDomain, "raised cosine needs |rho| <= 1/2");
  const double a = std::abs(rho);
  return SpectralDensity(
      [rho](double phi) { return (1.0 + 2.0 * rho * std::cos(phi)) / kTwoPi; },
      Smoothness::kC1, (1.0 - 2.0 * a) / kTwoPi, (1.0 + 2.0 * a) / kTwoPi, "raised_cosine");
}

CovarianceSequence::CovarianceSequence(std::vector<double> gamma) : gamma_(std::move(gamma)) {
  if (gamma_.empty()) throw Error(ErrorCode::kNormalization, "empty covariance sequence");
  if (gamma_[0] != 1.0) {
    throw Error(ErrorCode::kNormalization, "Gamma(0) must be 1, got " + fmt(gamma_[0]));
  }
  for (std::size_t k = 1; k < gamma_.size(); ++k) {
    if (!std::isfinite(gamma_[k]) || std::abs(gamma_[k]) > 1.0 + 1e-12) {
      throw Error(ErrorCode::kNormalization,
                  "|Gamma(" + std::to_string(k) + ")| > 1: " + fmt(gamma_[k]));
    }
  }
}

double CovarianceSequence::operator()(std::ptrdiff_t k) const {
  const auto a = static_cast<std::size_t>(k < 0 ? -k : k);
  if (a >= gamma_.size()) {
    throw Error(ErrorCode::kMissingLags, "lag " + std::to_string(a) + " beyond max lag " +
                                             std::to_string(max_lag()));
  }
  return gamma_[a];
}

std::size_t CovarianceSequence::effective_lag(double threshold) const noexcept {
  for (std::size_t k = gamma_.size() - 1; k > 0; --k) {
    if (std::abs(gamma_[k]) > threshold) return k;
  }
  return 0;
}

CovarianceSequence covariance_from_density(const SpectralDensity& f, std::size_t m,
                                           const CovarianceQuadrature& opts) {
  std::size_t nodes = std::max(next_pow2(opts.min_points), next_pow2(4 * (m + 1)));
  double max_imag = 0.0;
  std::vector<double> prev = trapezoid_coefficients(f, nodes, m, max_imag);
  for (;;) {
    if (2 * nodes > opts.max_points) {
      throw Error(ErrorCode::kDensityTooRough,
                  "trapezoid sums did not settle below " + fmt(opts.abs_tol) + " with " +
                      std::to_string(nodes) + " nodes");
    }
    nodes *= 2;
    std::vector<double> next = trapezoid_coefficients(f, nodes, m, max_imag);
    double diff = 0.0;
    for (std::size_t k = 0; k <= m; ++k) diff = std::max(diff, std::abs(next[k] - prev[k]));
    prev = std::move(next);
    if (diff <= opts.abs_tol) break;
  }
  if (max_imag > 1e-12) {
    throw Error(ErrorCode::kNotEven, "imaginary covariance residue " + fmt(max_imag));
  }
  const double g0 = prev[0];
  if (std::abs(g0 - 1.0) > 1e-8) {
    throw Error(ErrorCode::kNormalization, "integral of density is " + fmt(g0));
  }
  for (double& g : prev) g /= g0;
  prev[0] = 1.0;
  return CovarianceSequence(std::move(prev));
}

SpectralDensity density_from_covariance(const CovarianceSequence& gamma, PositivityPolicy policy,
                                        std::size_t grid) {
  if (grid < 64) throw Error(ErrorCode::kDomain, "grid must be >= 64");
  std::vector<double> g(gamma.values().begin(), gamma.values().end());
  SpectralDensity::Fn fn = [g = std::move(g)](double phi) {
    // Clenshaw recurrence for sum_k c_k cos(k phi).
    const double two_cos = 2.0 * std::cos(phi);
    double b1 = 0.0;
    double b2 = 0.0;
    for (std::size_t k = g.size() - 1; k >= 1; --k) {
      const double b0 = 2.0 * g[k] + two_cos * b1 - b2;
      b2 = b1;
      b1 = b0;
    }
    // sum_{k>=1} 2 g_k cos(k phi) = b1 cos(phi) - b2
    return (g[0] + b1 * std::cos(phi) - b2) / kTwoPi;
  };
  const GridScan s = scan_grid(fn, grid, /*check_even=*/false);
  if (policy == PositivityPolicy::kStrict && s.min <= 0.0) {
    throw Error(ErrorCode::kNotStrictlyPositive, "partial Fourier sum has min " + fmt(s.min));
  }
  if (policy == PositivityPolicy::kNonNegative && s.min < -1e-12) {
    throw Error(ErrorCode::kNotStrictlyPositive, "partial Fourier sum is negative, min " +
                                                     fmt(s.min));
  }
  return SpectralDensity(std::move(fn), Smoothness::kC1, std::max(s.min, 0.0), s.max, "fourier");
}

std::pair<double, double> positivity_bounds(const SpectralDensity& f, std::size_t grid) {
  if (grid < 64) throw Error(ErrorCode::kDomain, "grid must be >= 64");
  const GridScan s = scan_grid([&f](double phi) { return f(phi); }, grid, false);
  if (s.min <= 0.0) {
    throw Error(ErrorCode::kNotStrictlyPositive, "min over grid is " + fmt(s.min));
  }
  return {s.min, s.max};
}

double min_toeplitz_eigenvalue(const CovarianceSequence& gamma, std::size_t order) {
  const auto dim = static_cast<Eigen::Index>(order + 1);
  Eigen::MatrixXd t(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) t(i, j) = gamma(i - j);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// ---- CovarianceModel ----

CovarianceModel::CovarianceModel(Variant v, double rho, std::string label)
    : variant_(std::move(v)), rho_(rho), label_(std::move(label)) {}

CovarianceModel CovarianceModel::independent() {
  return CovarianceModel(Independent{uniform_density()}, 0.0, "independent");
}

CovarianceModel CovarianceModel::geometric(double rho) {
  auto f = poisson_kernel_density(rho);
  return CovarianceModel(Density{std::move(f), [rho](std::size_t k) {
                                   return std::pow(rho, static_cast<double>(k));
                                 }},
                         rho, "geometric:" + fmt(rho));
}

CovarianceModel CovarianceModel::raised_cosine(double rho) {
  auto f = raised_cosine_density(rho);
  return CovarianceModel(Density{std::move(f), [rho](std::size_t k) {
                                   return k == 0 ? 1.0 : (k == 1 ? rho : 0.0);
                                 }},
                         rho, "raised_cosine:" + fmt(rho));
}

CovarianceModel CovarianceModel::constant(double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorCode::kDomain, "constant model needs rho in (0,1)");
  return CovarianceModel(Constant{}, rho, "constant:" + fmt(rho));
}

CovarianceModel CovarianceModel::custom_fourier(std::vector<double> gamma) {
  CovarianceSequence seq(gamma);
  auto f = density_from_covariance(seq, PositivityPolicy::kNonNegative);
  return CovarianceModel(Density{std::move(f), [g = std::move(gamma)](std::size_t k) {
                                   return k < g.size() ? g[k] : 0.0;
                                 }},
                         0.0, "custom_fourier");
}

CovarianceModel CovarianceModel::from_density(SpectralDensity f) {
  std::string label = f.name();
  return CovarianceModel(Density{std::move(f), {}}, 0.0, std::move(label));
}

ModelKind CovarianceModel::kind() const noexcept {
  switch (variant_.index()) {
    case 0: return ModelKind::kIndependent;
    case 1: return ModelKind::kConstantRho;
    default: return ModelKind::kDensity;
  }
}

const SpectralDensity& CovarianceModel::density() const {
  if (const auto* ind = std::get_if<Independent>(&variant_)) return ind->f;
  if (const auto* d = std::get_if<Density>(&variant_)) return d->f;
  throw Error(ErrorCode::kUnsupportedModel,
              "constant covariance has no spectral density (" + label_ + ")");
}

Smoothness CovarianceModel::smoothness() const { return density().smoothness(); }

CovarianceSequence CovarianceModel::covariance(std::size_t m) const {
  std::vector<double> g(m + 1, 0.0);
  g[0] = 1.0;
  if (std::holds_alternative<Independent>(variant_)) return CovarianceSequence(std::move(g));
  if (std::holds_alternative<Constant>(variant_)) {
    for (std::size_t k = 1; k <= m; ++k) g[k] = rho_;
    return CovarianceSequence(std::move(g));
  }
  const auto& d = std::get<Density>(variant_);
  if (!d.closed_form) return covariance_from_density(d.f, m);
  for (std::size_t k = 1; k <= m; ++k) g[k] = d.closed_form(k);
  return CovarianceSequence(std::move(g));
}

}  // namespace levelcross
