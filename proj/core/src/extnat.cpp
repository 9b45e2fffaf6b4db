#include "defidx/extnat.hpp"

#include <limits>
#include <stdexcept>

#include "defidx/error.hpp"

namespace defidx {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::SeparationViolation: return "SeparationViolation";
    case ErrorCode::EmptyConfig: return "EmptyConfig";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::UnsupportedPotential: return "UnsupportedPotential";
    case ErrorCode::UnsupportedConfig: return "UnsupportedConfig";
    case ErrorCode::IntegrabilityViolation: return "IntegrabilityViolation";
    case ErrorCode::IntegrationFailure: return "IntegrationFailure";
    case ErrorCode::NonFiniteCoefficient: return "NonFiniteCoefficient";
    case ErrorCode::Indeterminate: return "Indeterminate";
    case ErrorCode::TruncationTooSmall: return "TruncationTooSmall";
    case ErrorCode::ShellIndeterminate: return "ShellIndeterminate";
    case ErrorCode::UnboundedRemainder: return "UnboundedRemainder";
    case ErrorCode::RegionsTooClose: return "RegionsTooClose";
    case ErrorCode::UnsupportedRegion: return "UnsupportedRegion";
    case ErrorCode::HardyViolation: return "HardyViolation";
    case ErrorCode::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorCode::InadmissibleExponent: return "InadmissibleExponent";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::Usage: return "Usage";
  }
  return "Unknown";
}

SeparationViolation::SeparationViolation(std::size_t first, std::size_t second, double distance)
    : Error(ErrorCode::SeparationViolation,
            "singular supports " + std::to_string(first) + " and " + std::to_string(second) +
                " are not separated (gap " + std::to_string(distance) + ")"),
      first_(first),
      second_(second),
      distance_(distance) {}

std::uint64_t ExtNat::value() const {
  if (infinite_) throw std::logic_error("ExtNat::value() called on infinity");
  return value_;
}

std::string ExtNat::to_string() const { return infinite_ ? "inf" : std::to_string(value_); }

ExtNat scaled(ExtNat value, std::uint64_t count) noexcept {
  if (count == 0) return ExtNat(0);
  if (value.is_infinite()) return ExtNat::infinity();
  return ExtNat(value.value() * count);
}

double DefectValue::as_double() const noexcept {
  if (twice_.is_infinite()) return std::numeric_limits<double>::infinity();
  return static_cast<double>(twice_.value()) / 2.0;
}

std::string DefectValue::to_string() const {
  if (twice_.is_infinite()) return "inf";
  const auto t = twice_.value();
  return std::to_string(t / 2) + (t % 2 == 0 ? "" : ".5");
}

DefectRecord make_defect(ExtNat n_plus, ExtNat n_minus) noexcept { return {n_plus, n_minus}; }

DefectRecord restrict_extension(const DefectRecord& record, std::uint64_t m) {
  auto reduce = [m](ExtNat index, const char* which) -> ExtNat {
    if (index.is_infinite()) return index;
    if (index.value() < m)
      throw Error(ErrorCode::DimensionTooLarge,
                  std::string("isometry dimension ") + std::to_string(m) + " exceeds " + which +
                      " = " + index.to_string());
    return ExtNat(index.value() - m);
  };
  return {reduce(record.n_plus, "n+"), reduce(record.n_minus, "n-")};
}

}  // namespace defidx
