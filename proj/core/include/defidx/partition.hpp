#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "defidx/config.hpp"
#include "defidx/lattice.hpp"
#include "defidx/region.hpp"

namespace defidx {

/// Value, gradient and Hessian (row-major n x n) at a point.
struct Jet {
  double value = 0.0;
  std::vector<double> gradient;
  std::vector<double> hessian;

  double laplacian() const noexcept;
  double gradient_norm_squared() const noexcept;
};

/// Normalized bump C_n exp(-1/(1 - |z|^2)) on the unit ball of R^n.
class Mollifier {
 public:
  explicit Mollifier(int n);

  int dimension() const noexcept { return n_; }
  double normalization() const noexcept { return c_; }
  /// Radial profile G and its first two derivatives in sigma = |z|.
  double g(double sigma) const noexcept;
  double dg(double sigma) const noexcept;
  double d2g(double sigma) const noexcept;

 private:
  int n_;
  double c_;
};

/// Smooth cutoff: chi of the eps/4-neighbourhood of F1 mollified at scale eps/4.
/// Equal to 1 on F1 and 0 on F0 whenever dist(F0, F1) >= eps.
class CutoffFunction {
 public:
  struct Impl;

  CutoffFunction() = default;
  explicit CutoffFunction(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  double operator()(std::span<const double> x) const;
  Jet jet(std::span<const double> x) const;

  int dimension() const noexcept;
  double epsilon() const noexcept;
  const RegionSpec& f0() const noexcept;
  const RegionSpec& f1() const noexcept;
  /// True when derivatives come from the radial closed form rather than
  /// central differences.
  bool analytic_derivatives() const noexcept;

 private:
  std::shared_ptr<const Impl> impl_;
};

/// Throws Error(RegionsTooClose) when dist(F0, F1) < eps, Error(UnsupportedRegion)
/// for malformed regions or unions in dimension > 3.
CutoffFunction build_cutoff(const RegionSpec& f0, const RegionSpec& f1, double epsilon, int n);

struct CutoffConstants {
  double epsilon = 0.0;
  /// eps^k max |d^alpha phi| over |alpha| = k, k = 0, 1, 2.
  std::array<double, 3> c_hat{};
};

struct VerificationReport {
  bool pass = false;
  /// max of (-phi)_+ and (phi - 1)_+.
  double range_violation = 0.0;
  /// max |phi| on F0 samples and |1 - phi| on F1 samples.
  double boundary_violation = 0.0;
  /// Constants at eps * {0.1, 1, 10} / eps scaling of the same geometry.
  std::vector<CutoffConstants> constants;
  /// max over k of (max - min) / max of c_hat[k] across the scales.
  double scale_spread = 0.0;
  std::size_t samples = 0;
};

/// Samples phi and its derivatives up to order 2 on a grid of `resolution`
/// points per axis covering F1, the transition shell and part of F0, plus
/// dense rays across the transition. Repeats on the geometry rescaled to
/// eps in {0.1, 1, 10}.
VerificationReport verify_cutoff(const CutoffFunction& phi, int resolution = 21, double tolerance = 1e-8,
                                 double spread_tolerance = 0.05);

/// Phi_j and its companion for one singularity (or one infinite orbit).
struct FamilyMember {
  std::size_t index = 0;
  bool orbit = false;
  /// Site position, or lattice origin for an orbit.
  Point center;
  double delta = 0.0;
  /// 1 on the eps/4-neighbourhood of the support ball, 0 beyond radius delta + 3 eps / 8.
  CutoffFunction phi;
  /// 1 on supp(phi), 0 beyond radius delta + 7 eps / 16.
  CutoffFunction phi_tilde;
  double phi_radius = 0.0;
  double phi_tilde_radius = 0.0;
};

struct FamilyCheck {
  /// Pairwise disjointness of the phi and of the phi-tilde supports (geometric).
  bool phi_disjoint = true;
  bool phi_tilde_disjoint = true;
  /// Smallest gap between distinct phi-tilde supports (+inf for one member).
  double min_tilde_gap = 0.0;
  /// max |phi_tilde phi - phi| over the samples.
  double containment_error = 0.0;
  /// Largest number of simultaneously non-zero phi_j at a sample.
  std::size_t max_overlap = 0;
  std::size_t samples = 0;
};

class CutoffFamily {
 public:
  CutoffFamily(int n, double epsilon, std::vector<FamilyMember> members, std::vector<std::optional<Lattice>> lattices);

  int dimension() const noexcept { return n_; }
  double epsilon() const noexcept { return epsilon_; }
  const std::vector<FamilyMember>& members() const noexcept { return members_; }

  /// visit(member, translation) for every member copy whose phi-tilde may be
  /// non-zero at x; the copy is member.phi evaluated at x - translation.
  void for_each_near(std::span<const double> x,
                     const std::function<void(const FamilyMember&, const Point& shift)>& visit) const;

  /// Checks disjointness and phi_tilde phi = phi at `samples` random points
  /// near the members.
  FamilyCheck certify(std::size_t samples = 10000, std::uint64_t seed = 1) const;

 private:
  int n_;
  double epsilon_;
  std::vector<FamilyMember> members_;
  std::vector<std::optional<Lattice>> lattices_;  // per member; set for orbits
};

/// eps used by the family: the validated separation, or max delta_j when a
/// single singularity leaves it infinite.
CutoffFamily build_family(const ValidatedConfig& config);

struct PartitionConstants {
  /// sup sum |grad phi_j|^2
  double e = 0.0;
  /// 2 sup sum (Laplacian phi_j)^2
  double alpha = 0.0;
  /// 4 sup sum |grad phi_j|^2
  double beta = 0.0;
  std::size_t samples = 0;
};

/// Grid maxima over a box around the members (a fundamental cell for orbits)
/// with `resolution` points per axis, plus dense radial rays per member.
PartitionConstants partition_constants(const CutoffFamily& family, int resolution = 33);

/// Lattice bump family phi(x - x_k) normalized so that sum phi_k^2 = 1.
class LatticePartition {
 public:
  explicit LatticePartition(int n);

  int dimension() const noexcept { return n_; }
  /// Lattice spacing min(1, sqrt(2/n)).
  double spacing() const noexcept { return spacing_; }
  const CutoffFunction& prototype() const noexcept { return proto_; }

  struct Term {
    Point site;
    double value = 0.0;
    std::vector<double> gradient;
  };
  struct Evaluation {
    std::vector<Term> terms;  // normalized phi_k and gradients, non-zero ones only
    double unnormalized_sum = 0.0;
  };
  Evaluation evaluate(std::span<const double> x) const;

  struct Check {
    double max_sum_deviation = 0.0;  // max |sum phi_k^2 - 1|
    double max_cross_term = 0.0;     // max |sum phi_k grad phi_k|
    double min_unnormalized = 0.0;   // min of the unnormalized sum on the cell
    std::size_t max_terms = 0;
    std::size_t samples = 0;
  };
  /// Random samples in the fundamental cell plus a regular grid of it.
  Check verify(std::size_t samples = 1000, std::uint64_t seed = 1) const;

 private:
  int n_;
  double spacing_;
  CutoffFunction proto_;
  Lattice lattice_;
};

LatticePartition lattice_partition(int n);

}  // namespace defidx
