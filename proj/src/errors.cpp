#include "aoisched/errors.hpp"

namespace aoisched {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateSnr: return "DegenerateSnr";
    case ErrorCode::InvalidGeometry: return "InvalidGeometry";
    case ErrorCode::InvalidDuration: return "InvalidDuration";
    case ErrorCode::DivergentAoI: return "DivergentAoI";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::InfeasibleSaturated: return "InfeasibleSaturated";
    case ErrorCode::RoundingOverflow: return "RoundingOverflow";
    case ErrorCode::ConstraintBrokenByRounding: return "ConstraintBrokenByRounding";
    case ErrorCode::InvalidSchedule: return "InvalidSchedule";
    case ErrorCode::GridTooLarge: return "GridTooLarge";
    case ErrorCode::NoFixedPoint: return "NoFixedPoint";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void raise(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace aoisched
