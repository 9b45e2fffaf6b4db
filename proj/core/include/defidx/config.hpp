#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "defidx/lattice.hpp"

namespace defidx {

/// a * r^p on (0, delta].
struct PowerLawProfile {
  double coefficient = 0.0;
  double exponent = 0.0;
  friend bool operator==(const PowerLawProfile&, const PowerLawProfile&) = default;
};

/// Piecewise-linear interpolation of (radius, value) samples, constant
/// beyond the first and last sample. Radii strictly increasing and positive.
struct SampledProfile {
  std::vector<double> radii;
  std::vector<double> values;
  friend bool operator==(const SampledProfile&, const SampledProfile&) = default;
};

using RadialProfile = std::variant<PowerLawProfile, SampledProfile>;

double evaluate(const RadialProfile& profile, double r);

/// V(r) = c / r^2 + perturbation(r) on B(x; delta).
struct InverseSquarePoint {
  double coupling = 0.0;
  double cutoff_radius = 1.0;
  std::optional<RadialProfile> perturbation;
  friend bool operator==(const InverseSquarePoint&, const InverseSquarePoint&) = default;
};

/// V(r) = beta |r - r0|^(-gamma) on B(x; delta), singular on the sphere |x| = r0.
struct Shell {
  double beta = 0.0;
  double gamma = 0.0;
  double shell_radius = 0.5;
  double cutoff_radius = 1.0;
  friend bool operator==(const Shell&, const Shell&) = default;
};

/// Sampled radial potential on (0, delta] whose behaviour at r -> 0 is declared
/// as leading_coupling / r^2; the samples minus that leading term form a
/// bounded remainder.
struct CustomRadial {
  double leading_coupling = 0.0;
  double cutoff_radius = 1.0;
  SampledProfile samples;
  friend bool operator==(const CustomRadial&, const CustomRadial&) = default;
};

/// Non-radial dipole coupling. Accepted by the parser so that configurations
/// carrying it fail with UnsupportedPotential rather than a parse error.
struct Dipole {
  std::vector<double> moment;
  double cutoff_radius = 1.0;
  friend bool operator==(const Dipole&, const Dipole&) = default;
};

using PotentialSpec = std::variant<InverseSquarePoint, Shell, CustomRadial, Dipole>;

/// delta: radius of the closed ball carrying supp(V_j) and the singular set.
double support_radius(const PotentialSpec& spec) noexcept;
std::string kind_name(const PotentialSpec& spec);

/// Full potential value at distance r from the centre (r > 0).
double potential_value(const PotentialSpec& spec, double r);

struct Singularity {
  Point position;
  PotentialSpec potential;
  friend bool operator==(const Singularity&, const Singularity&) = default;
};

/// Lattice of identical singularities. `region` empty means the infinite lattice.
struct LatticeSpec {
  std::vector<Point> basis;
  Point origin;
  std::optional<IndexBox> region;
  PotentialSpec potential;
  friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;
};

struct SingularityConfig {
  int dimension = 3;
  std::vector<Singularity> singularities;
  std::vector<LatticeSpec> lattices;
  double background_sup_norm = 0.0;
  std::optional<double> declared_epsilon;
  friend bool operator==(const SingularityConfig&, const SingularityConfig&) = default;
};

/// One materialized singularity.
struct Site {
  Point position;
  PotentialSpec potential;
  /// Index into SingularityConfig::singularities, or lattice index when from_lattice.
  std::size_t source = 0;
  bool from_lattice = false;
};

/// Infinite lattice kept symbolic: one orbit class, never enumerated.
struct Orbit {
  std::size_t lattice_index = 0;
  Lattice lattice;
  PotentialSpec potential;
};

struct ValidatedConfig {
  SingularityConfig config;
  std::vector<Site> sites;
  std::vector<Orbit> orbits;
  /// Infimum gap between the closed support balls. +inf for a single site.
  double epsilon = 0.0;
  std::vector<std::string> warnings;

  int dimension() const noexcept { return config.dimension; }
};

/// Checks r * V~(r) in L^1((0, delta)) by dyadic-window quadrature. Throws
/// Error(IntegrabilityViolation).
void check_perturbation_integrable(const RadialProfile& profile, double delta);

/// Validates shapes and parameters, materializes finite lattices, and computes
/// the uniform separation epsilon (never trusted from declared_epsilon).
/// Throws SeparationViolation, Error(EmptyConfig), Error(InvalidConfig) or
/// Error(UnsupportedConfig).
ValidatedConfig validate_config(const SingularityConfig& config);

}  // namespace defidx
