#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace relmod {

enum class ErrorCode {
  NonHermitian,
  NonConvergence,
  DomainViolation,
  DimensionMismatch,
  RankDeficient,
  SingularS,
  NonUnitary,
  TruncationBudgetExceeded,
  QuadratureBudgetExceeded,
  MassNotZero,
  GeometryViolation,
  ScheduleViolation,
  FlowSingularity,
  ParameterViolation,
  SingularSystem,
  DimensionTooSmall,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (tests, CLI) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace relmod
