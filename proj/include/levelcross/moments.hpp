#pragma once

// Second moments of P_n(x) = sum_k X_k x^k and its derivative, and the two
// Kac-Rice integrand terms built from them.
//
//   A(x) = E[P_n(x)^2]      B(x) = E[P_n(x) P_n'(x)]      C(x) = E[P_n'(x)^2]
//
// Two independent routes compute (A, B, C): lag sums over Gamma(k) and
// trapezoid quadrature of the geometric-series kernels against f(phi).
// For |x| > 1 everything is expressed through z = 1/x in scaled form,
//
//   A(1/z) = z^{-2n} At,   B(1/z) = -z^{-2n+1} Bt,   C(1/z) = z^{-2n+2} Ct,
//
// and since z^n P_n(1/z) is again a stationary polynomial in z,
// At = A(z), Bt = z B(z) - n A(z), Ct = n^2 A(z) - 2n z B(z) + z^2 C(z),
// with At Ct - Bt^2 = z^2 (A C - B^2)(z).

#include <cstddef>
#include <optional>

#include "levelcross/spectrum.hpp"

namespace levelcross {

struct PolynomialEnsemble {
  std::size_t n = 1;
  CovarianceModel model = CovarianceModel::independent();
  double level = 0.0;

  // Throws kDomain when n < 1 or the level is not finite.
  void validate() const;
};

struct MomentTriple {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  // Inner form: A C - B^2. Scaled outer form: (At Ct - Bt^2) / z^2, which
  // equals (A C - B^2) evaluated at z and stays well conditioned as z -> 0.
  double gram = 0.0;
  // Magnitude against which gram is judged degenerate (A C at the same point).
  double gram_scale = 0.0;
  // 0 for the inner form, 2n for the scaled outer form (see header comment).
  int scale_exponent = 0;
};

struct UnscaledMoments {
  double A;
  double B;
  double C;
};

struct IntegrandValue {
  double F1 = 0.0;
  double F2 = 0.0;
  // Set when gram fell inside the removable-singularity band.
  bool regularized = false;
};

struct SpectralOptions {
  double rel_tol = 1e-13;
  std::size_t min_nodes = 256;
  std::size_t max_nodes = std::size_t{1} << 22;
};

// Relative width of the band around A C - B^2 = 0 treated as a removable
// singularity, and the tolerated negative excursion.
inline constexpr double kGramEpsilon = 1e-10;

MomentTriple moments_direct(const PolynomialEnsemble& e, const CovarianceSequence& gamma,
                            double x);

// Requires |x| < 1 and a model with a density.
MomentTriple moments_spectral(const PolynomialEnsemble& e, const SpectralDensity& f, double x,
                              const SpectralOptions& opts = {});

// Scaled triple at x = 1/z via the kernel integrals; 0 < |z| < 1.
MomentTriple moments_outer_scaled(const PolynomialEnsemble& e, const SpectralDensity& f,
                                  double z, const SpectralOptions& opts = {});

// Same scaled triple via lag sums; 0 < |z| <= 1. This is the fast path the
// quadrature uses.
MomentTriple moments_outer_scaled_direct(const PolynomialEnsemble& e,
                                         const CovarianceSequence& gamma, double z);

// Undo the scaling of an outer triple (overflows for large n).
UnscaledMoments unscale(const MomentTriple& m, double z);

// F1 and F2 per unit x. With reciprocal_z set, m must be a scaled outer
// triple at that z and the result is per unit z (the 1/z^2 Jacobian is
// folded in), so that int_{1}^{inf} F dx = int_0^1 F dz.
IntegrandValue integrand(const PolynomialEnsemble& e, const MomentTriple& m,
                         std::optional<double> reciprocal_z = std::nullopt);

}  // namespace levelcross
