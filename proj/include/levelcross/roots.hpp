#pragma once

// Distinct real roots of a real polynomial given by ascending coefficients
// q[0] + q[1] x + ... + q[n] x^n.

#include <cstddef>
#include <span>
#include <vector>

namespace levelcross {

// Degrees up to this use companion eigenvalues; above it a derivative-guarded
// bracketing sweep over [-1,1] for p and for its reversal.
inline constexpr std::size_t kCompanionMaxDegree = 128;

// Ascending distinct real roots, without multiplicity. Trailing exact zeros
// are trimmed. Throws kDomain for the zero polynomial and kRootFinding when
// the eigenvalue iteration fails.
std::vector<double> real_roots(std::span<const double> coeffs);

std::vector<double> real_roots_companion(std::span<const double> coeffs);
std::vector<double> real_roots_bracketing(std::span<const double> coeffs);

// Moves roots within 1e-8 (relative) of a point where the polynomial
// vanishes exactly onto that point.
void snap_roots(std::span<const double> coeffs, std::vector<double>& roots,
                std::span<const double> points);

}  // namespace levelcross
