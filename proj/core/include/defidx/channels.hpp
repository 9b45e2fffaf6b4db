#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "defidx/config.hpp"
#include "defidx/extnat.hpp"
#include "defidx/weyl.hpp"

namespace defidx {

/// One angular-momentum channel of -Delta + c/|x|^2 after separation of variables.
struct ChannelEntry {
  std::uint64_t ell = 0;
  double q_eff = 0.0;
  std::uint64_t multiplicity = 0;
  /// Closed-form class at r = 0.
  EndpointClass cls;
  /// Numeric Weyl class of q_eff / r^2, when requested and outside the borderline band.
  std::optional<EndpointClass> numeric;
};

struct ChannelSpectrum {
  int dimension = 0;
  double coupling = 0.0;
  std::vector<ChannelEntry> entries;
  /// Degree of the first limit-point channel. q_eff increases with ell, so
  /// every later channel is limit point too.
  std::optional<std::uint64_t> first_limit_point;
};

/// q = c + (n-1)(n-3)/4 + ell(ell+n-2).
double effective_coupling(int n, double c, std::uint64_t ell);

/// Dimension of the degree-ell spherical harmonics on S^{n-1}.
std::uint64_t harmonic_multiplicity(int n, std::uint64_t ell);

/// Exact limit-point test for channel ell: q_eff >= 3/4.
bool channel_is_limit_point(int n, double c, std::uint64_t ell);

struct PointDefect {
  DefectRecord record;
  /// Channels up to and including the first limit-point one.
  ChannelSpectrum spectrum;
  std::vector<std::string> warnings;
};

/// Defect of -Delta + c/|x|^2 near an isolated point in R^n. Throws
/// Error(InvalidConfig) for n < 2 and Error(UnsupportedConfig) when the count
/// of limit-circle channels exceeds 10^7.
PointDefect point_defect_detailed(int n, double c);
DefectRecord point_defect(int n, double c);

/// Channel table for ell = 0..ell_max. Throws Error(TruncationTooSmall) when
/// ell_max is below the first limit-point channel. With `with_oracle` each
/// channel with |q_eff - 3/4| >= 1e-3 also carries its numeric class.
ChannelSpectrum channel_spectrum(int n, double c, std::uint64_t ell_max, bool with_oracle = false,
                                 const WeylOptions& options = {});

struct ShellDefect {
  DefectRecord record;
  std::optional<EndpointClass> inner;  // approach from r < r0
  std::optional<EndpointClass> outer;  // approach from r > r0
  std::vector<std::string> notes;
};

/// Defect of -Delta + beta |r - r0|^(-gamma) near the sphere r = r0. Throws
/// Error(ShellIndeterminate).
ShellDefect shell_defect_detailed(int n, const Shell& spec, const WeylOptions& options = {});
DefectRecord shell_defect(int n, const Shell& spec, const WeylOptions& options = {});

}  // namespace defidx
