#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "defidx/channels.hpp"
#include "defidx/config.hpp"
#include "defidx/extnat.hpp"
#include "defidx/weyl.hpp"

namespace defidx {

/// V_j split into a localized singular piece and a bounded remainder.
struct LocalizedPiece {
  /// Site index, or orbit index when `orbit` is set.
  std::size_t index = 0;
  bool orbit = false;
  /// Site position, or lattice origin for an orbit.
  Point position;
  PotentialSpec potential;
  /// Half-width of the localized piece around the singular set: a ball of
  /// this radius for points, an annulus of this half-width for shells.
  double split_radius = 0.0;
  /// sup |V_j| outside the localized piece, within the cutoff ball.
  double remainder_sup = 0.0;
};

struct LocalizedConfig {
  ValidatedConfig config;
  double epsilon = 0.0;
  /// Sites first, then orbits.
  std::vector<LocalizedPiece> pieces;
  /// sup_j of the per-piece remainders.
  double remainder_bound = 0.0;
  double background_sup_norm = 0.0;
};

/// Splits every potential at half-width min(eps/2, delta_j) around its
/// singular set, or at `half_width` when given (0 < half_width <= eps/2).
/// Throws Error(UnboundedRemainder) or Error(UnsupportedPotential).
LocalizedConfig localize(const ValidatedConfig& config, std::optional<double> half_width = std::nullopt);

/// Sampled sup of |f| on [a, b]: 2048 samples clustered toward a, then a
/// local refinement around the best sample.
double sampled_sup(const std::function<double(double)>& f, double a, double b);

enum class Verdict { EssentiallySelfAdjoint, PositiveDefect, InfiniteDefect, Indeterminate };
std::string to_string(Verdict v);

struct PieceDefect {
  std::size_t index = 0;
  bool orbit = false;
  Point position;
  std::string kind;
  /// Per-site defect; empty when indeterminate.
  std::optional<DefectRecord> record;
  /// What this piece adds to the total: the record itself, or, for an
  /// infinite orbit, 0 or infinity.
  std::optional<DefectRecord> contribution;
  std::optional<ChannelSpectrum> channels;
  std::optional<EndpointClass> shell_inner;
  std::optional<EndpointClass> shell_outer;
  double remainder_sup = 0.0;
  std::vector<std::string> notes;
};

struct DefectCertificate {
  int dimension = 0;
  Verdict verdict = Verdict::EssentiallySelfAdjoint;
  /// Extended sum of the contributions; empty when indeterminate.
  std::optional<DefectRecord> total;
  std::vector<PieceDefect> table;
  double epsilon = 0.0;
  double remainder_bound = 0.0;
  double background_sup_norm = 0.0;
  /// First table row with a non-zero or unknown contribution.
  std::optional<std::size_t> first_violation;
  std::vector<std::string> warnings;
  std::vector<std::string> notes;
};

struct AggregateOptions {
  unsigned threads = 1;
  WeylOptions weyl;
  /// Channel-table truncation for point pieces; by default the table stops at
  /// the first limit-point channel. Error(TruncationTooSmall) if set too low.
  std::optional<std::uint64_t> ell_max;
};

/// Def(H) as the extended sum of the per-piece defects.
DefectCertificate aggregate_defect(const LocalizedConfig& config, const AggregateOptions& options = {});

/// validate, localize, aggregate. A configuration without singularities is
/// essentially self-adjoint. Throws Error(UnsupportedPotential) for dipoles
/// and the errors of validate_config.
DefectCertificate essential_selfadjointness(const SingularityConfig& config, const AggregateOptions& options = {});

}  // namespace defidx
