#include "levelcross/errors.hpp"

namespace levelcross {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kDensityTooRough: return "density too rough";
    case ErrorCode::kNormalization: return "normalization";
    case ErrorCode::kNotStrictlyPositive: return "density not strictly positive";
    case ErrorCode::kNotEven: return "density not even";
    case ErrorCode::kUnsupportedModel: return "unsupported model";
    case ErrorCode::kMissingLags: return "missing covariance lags";
    case ErrorCode::kRefinementLimit: return "refinement limit";
    case ErrorCode::kDegeneratePoint: return "degenerate point";
    case ErrorCode::kOrdering: return "ordering";
    case ErrorCode::kOutOfRegime: return "out of regime";
    case ErrorCode::kZone: return "outside edge zone";
    case ErrorCode::kInsufficientData: return "insufficient data";
    case ErrorCode::kFactorization: return "factorization";
    case ErrorCode::kRootFinding: return "root finding";
    case ErrorCode::kConfig: return "config";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace levelcross
