#include "relmod/errors.hpp"

namespace relmod {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonHermitian: return "NonHermitian";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::SingularS: return "SingularS";
    case ErrorCode::NonUnitary: return "NonUnitary";
    case ErrorCode::TruncationBudgetExceeded: return "TruncationBudgetExceeded";
    case ErrorCode::QuadratureBudgetExceeded: return "QuadratureBudgetExceeded";
    case ErrorCode::MassNotZero: return "MassNotZero";
    case ErrorCode::GeometryViolation: return "GeometryViolation";
    case ErrorCode::ScheduleViolation: return "ScheduleViolation";
    case ErrorCode::FlowSingularity: return "FlowSingularity";
    case ErrorCode::ParameterViolation: return "ParameterViolation";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::DimensionTooSmall: return "DimensionTooSmall";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace relmod
