#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aoisched {

enum class ErrorCode {
  InvalidArgument,
  DegenerateSnr,
  InvalidGeometry,
  InvalidDuration,
  DivergentAoI,
  Infeasible,
  InfeasibleSaturated,
  RoundingOverflow,
  ConstraintBrokenByRounding,
  InvalidSchedule,
  GridTooLarge,
  NoFixedPoint,
  ConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above, so
/// callers (the CLI sweep runner in particular) can turn it into a status
/// column without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& what);

}  // namespace aoisched
