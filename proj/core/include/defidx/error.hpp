#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace defidx {

enum class ErrorCode {
  DimensionTooLarge,
  SeparationViolation,
  EmptyConfig,
  InvalidConfig,
  UnsupportedPotential,
  UnsupportedConfig,
  IntegrabilityViolation,
  IntegrationFailure,
  NonFiniteCoefficient,
  Indeterminate,
  TruncationTooSmall,
  ShellIndeterminate,
  UnboundedRemainder,
  RegionsTooClose,
  UnsupportedRegion,
  HardyViolation,
  DimensionTooSmall,
  InadmissibleExponent,
  ParseError,
  Usage,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure surfaced by the library carries one of the codes above so
/// that the command-line front end can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Two singular supports overlap or touch.
class SeparationViolation : public Error {
 public:
  SeparationViolation(std::size_t first, std::size_t second, double distance);

  std::size_t first() const noexcept { return first_; }
  std::size_t second() const noexcept { return second_; }
  double distance() const noexcept { return distance_; }

 private:
  std::size_t first_;
  std::size_t second_;
  double distance_;
};

}  // namespace defidx
