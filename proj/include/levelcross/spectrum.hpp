#pragma once

// Covariance structures of the stationary coefficient sequence: spectral
// densities on [-pi, pi], their Fourier coefficients Gamma(k), and the
// model families the rest of the library is parameterised by.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace levelcross {

// Declared by the caller; selects which asymptotic regime applies.
enum class Smoothness { kC0, kC1 };

const char* to_string(Smoothness s) noexcept;

// An even, nonnegative density f on [-pi, pi] with integral 1, together with
// the extrema of f observed on a uniform grid. The lower bound may be zero
// for densities that are only nonnegative (e.g. the raised cosine with
// Gamma(1) = 1/2); positivity_bounds() is the strict check.
class SpectralDensity {
 public:
  using Fn = std::function<double(double)>;

  SpectralDensity(Fn f, Smoothness smoothness, double lower, double upper,
                  std::string name);

  // Scans f on grid+1 uniform points, rejecting odd parts and negative
  // values. Bounds are the observed min and max.
  static SpectralDensity from_function(Fn f, Smoothness smoothness,
                                       std::string name = "custom",
                                       std::size_t grid = 4096);

  double operator()(double phi) const { return f_(phi); }
  Smoothness smoothness() const noexcept { return smoothness_; }
  double lower_bound() const noexcept { return lower_; }
  double upper_bound() const noexcept { return upper_; }
  const std::string& name() const noexcept { return name_; }

 private:
  Fn f_;
  Smoothness smoothness_;
  double lower_;
  double upper_;
  std::string name_;
};

SpectralDensity uniform_density();
// (1 - rho^2) / (2 pi (1 - 2 rho cos phi + rho^2)), Gamma(k) = rho^|k|.
SpectralDensity poisson_kernel_density(double rho);
// (1 + 2 rho cos phi) / (2 pi), Gamma(1) = rho, |rho| <= 1/2.
SpectralDensity raised_cosine_density(double rho);

// Gamma(0..m) with Gamma(0) = 1 exactly, extended evenly to negative lags.
class CovarianceSequence {
 public:
  explicit CovarianceSequence(std::vector<double> gamma);

  // Even extension; throws kMissingLags past max_lag().
  double operator()(std::ptrdiff_t k) const;
  std::size_t max_lag() const noexcept { return gamma_.size() - 1; }
  std::span<const double> values() const noexcept { return gamma_; }

  // Largest lag whose |Gamma| exceeds threshold (0 if none beyond lag 0).
  std::size_t effective_lag(double threshold) const noexcept;

 private:
  std::vector<double> gamma_;
};

struct CovarianceQuadrature {
  double abs_tol = 1e-12;
  std::size_t min_points = 4096;
  std::size_t max_points = std::size_t{1} << 22;
};

// Gamma(k) = int e^{-ik phi} f(phi) dphi for k = 0..m by periodic trapezoid
// sums, doubling the node count until successive sequences agree to abs_tol.
CovarianceSequence covariance_from_density(const SpectralDensity& f, std::size_t m,
                                           const CovarianceQuadrature& opts = {});

enum class PositivityPolicy { kStrict, kNonNegative };

// Partial Fourier sum (1/2pi) sum_k Gamma(k) e^{ik phi}. The observed grid
// minimum is reported as lower_bound().
SpectralDensity density_from_covariance(const CovarianceSequence& gamma,
                                        PositivityPolicy policy = PositivityPolicy::kStrict,
                                        std::size_t grid = 4096);

// (min f, max f) on grid+1 uniform nodes; these are c2/(2pi) and c1/(2pi).
std::pair<double, double> positivity_bounds(const SpectralDensity& f, std::size_t grid);

// Smallest eigenvalue of the (order+1)x(order+1) Toeplitz matrix of gamma.
double min_toeplitz_eigenvalue(const CovarianceSequence& gamma, std::size_t order);

enum class ModelKind { kIndependent, kConstantRho, kDensity };

class CovarianceModel {
 public:
  static CovarianceModel independent();
  static CovarianceModel geometric(double rho);
  static CovarianceModel raised_cosine(double rho = 0.5);
  static CovarianceModel constant(double rho);
  static CovarianceModel custom_fourier(std::vector<double> gamma);
  static CovarianceModel from_density(SpectralDensity f);

  ModelKind kind() const noexcept;
  bool admits_density() const noexcept { return kind() != ModelKind::kConstantRho; }

  // Throws kUnsupportedModel for the constant-covariance baseline, which has
  // a spectral atom and no density.
  const SpectralDensity& density() const;
  Smoothness smoothness() const;

  // Gamma(0..m): closed form where known, quadrature otherwise.
  CovarianceSequence covariance(std::size_t m) const;

  double rho() const noexcept { return rho_; }
  const std::string& label() const noexcept { return label_; }

 private:
  struct Independent {
    SpectralDensity f;
  };
  struct Constant {};
  struct Density {
    SpectralDensity f;
    std::function<double(std::size_t)> closed_form;
  };
  using Variant = std::variant<Independent, Constant, Density>;

  CovarianceModel(Variant v, double rho, std::string label);

  Variant variant_;
  double rho_ = 0.0;
  std::string label_;
};

}  // namespace levelcross
