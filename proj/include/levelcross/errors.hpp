#pragma once

#include <stdexcept>
#include <string>

namespace levelcross {

enum class ErrorCode {
  kDomain,
  kDensityTooRough,
  kNormalization,
  kNotStrictlyPositive,
  kNotEven,
  kUnsupportedModel,
  kMissingLags,
  kRefinementLimit,
  kDegeneratePoint,
  kOrdering,
  kOutOfRegime,
  kZone,
  kInsufficientData,
  kFactorization,
  kRootFinding,
  kConfig,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so
// callers (the CLI in particular) can react without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace levelcross
