#pragma once

#include <stdexcept>
#include <string>

namespace hjb {

enum class ErrorKind {
  SeriesTruncationOverflow,
  OutsideCertifiedRange,
  StartBeyondBoundary,
  QuotientSeriesBreakdown,
  InvalidInventoryState,
  PicardNotConverged,
  DirectIntegrationRange,
  BoundViolation,
  SimulationDiverged,
  NoExits,
};

/// Human-readable tag that prefixes every PlannerError message.
const char* to_string(ErrorKind kind) noexcept;

class PlannerError : public std::runtime_error {
 public:
  PlannerError(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hjb
