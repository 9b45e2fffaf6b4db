#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string_view>
#include <utility>
#include <vector>

#include "defidx/grid_table.hpp"

namespace defidx {

enum class BoundKind { Form, Operator };

std::string_view to_string(BoundKind kind) noexcept;

/// ||B f||^2 <= a ||A f||^2 + b ||f||^2 (operator) or the quadratic-form analogue.
struct RelativeBound {
  double a = 0.0;
  double b = 0.0;
  BoundKind kind = BoundKind::Form;

  friend bool operator==(const RelativeBound&, const RelativeBound&) = default;
};

/// Constants of a localizing family: c from the lower bound on |W|, and
/// (d, e) from sum_j ||T^{1/2} Phi_j f||^2 <= d ||T^{1/2} f||^2 + e ||f||^2.
struct PartitionData {
  double c = 1.0;
  double d = 1.0;
  double e = 0.0;

  friend bool operator==(const PartitionData&, const PartitionData&) = default;
};

/// Error(InvalidConfig) unless a, b are finite and non-negative.
void validate(const RelativeBound& bound);
/// Error(InvalidConfig) unless c, d > 0 and e >= 0, all finite.
void validate(const PartitionData& data);

/// (a c d, a c e + b c). Error(InvalidConfig) if the kind is not Form.
RelativeBound morgan_form_bound(const RelativeBound& local, const PartitionData& p);
/// Same arithmetic for operator bounds. Error(InvalidConfig) if the kind is not Operator.
RelativeBound morgan_operator_bound(const RelativeBound& local, const PartitionData& p);

/// (d, e) = (1 + eps, (1 + eps) e_tilde / eps).
std::pair<double, double> commutator_to_iii(double e_tilde, double eps);

/// Commutator bound coefficients (eps^2 / (4 + 2 eps), eps e / (2 + eps))
/// sufficient for the summed-commutator condition with d = 1 + eps.
std::pair<double, double> operator_commutator_gate(double eps, double e);

/// True iff the leading coefficient is strictly below one.
bool defect_invariance_gate(const RelativeBound& global);

/// (n - 2)^2 / 4.
double hardy_constant(int n);

/// Form bound a = gamma / hardy_constant(n), b = 0.
/// Error(DimensionTooSmall) for n < 3, Error(HardyViolation) when gamma >= hardy_constant(n).
RelativeBound hardy_form_bound(int n, double gamma);

/// Largest observed ratio gamma * int f^2 r^{n-3} dr / int f'^2 r^{n-1} dr over
/// random radial profiles (1 - r/R)^2 p(r) with p a random cubic.
struct HardyEvidence {
  int dimension = 0;
  double gamma = 0.0;
  double bound = 0.0;
  double max_ratio = 0.0;
  std::size_t profiles = 0;
};

HardyEvidence hardy_quadrature_evidence(int n, double gamma, std::size_t profiles = 200, std::uint64_t seed = 1);

/// p = 2 for n <= 3 and p > n/2 for n >= 4.
bool admissible_exponent(int n, double p) noexcept;

struct LpCheckOptions {
  /// Ball centres are taken at every `stride`-th cell centre per axis; 0 picks a
  /// stride giving a centre spacing near 1/4.
  std::size_t stride = 0;
  /// Sub-cells per axis used on cells cut by a ball boundary.
  std::size_t subsamples = 4;
  std::size_t threads = 1;
};

struct LpCheckResult {
  double exponent = 2.0;
  double sup_norm = 0.0;
  std::vector<double> argmax;
  std::size_t balls = 0;
  double cap = std::numeric_limits<double>::infinity();
  bool pass = false;
};

/// Approximates sup_x ||V chi_{B(x;1)}||_{L^p} over a lattice of ball centres and
/// the declared singular sites. Masked cells and the exterior of the box count
/// as zero; singular-site balls are integrated analytically.
/// Error(InadmissibleExponent) when p fails admissible_exponent.
LpCheckResult loc_unif_Lp_check(const GridTable& potential, double p, double cap,
                                const LpCheckOptions& options = {});

}  // namespace defidx
