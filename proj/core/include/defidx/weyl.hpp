#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace defidx {

/// Weyl's alternative at a singular endpoint.
struct EndpointClass {
  enum class Kind { LimitPoint, LimitCircle, BoundaryIndeterminate };

  Kind kind = Kind::LimitPoint;
  /// Resolution band that captured the estimate; > 0 only when indeterminate.
  double band_width = 0.0;

  static EndpointClass limit_point() noexcept { return {Kind::LimitPoint, 0.0}; }
  static EndpointClass limit_circle() noexcept { return {Kind::LimitCircle, 0.0}; }
  static EndpointClass indeterminate(double band) noexcept { return {Kind::BoundaryIndeterminate, band}; }

  bool is_limit_point() const noexcept { return kind == Kind::LimitPoint; }
  bool is_limit_circle() const noexcept { return kind == Kind::LimitCircle; }
  bool is_indeterminate() const noexcept { return kind == Kind::BoundaryIndeterminate; }

  friend bool operator==(const EndpointClass&, const EndpointClass&) = default;
};

std::string to_string(EndpointClass c);
/// "LP", "LC" or "indeterminate".
std::string short_name(EndpointClass c);

/// Spectral parameter z = +i or z = -i.
enum class SpectralSign { Plus, Minus };

/// -u'' + q u = z u near a singular endpoint.
///
/// For a finite endpoint e, `q` is evaluated at the distance s = |r - e| > 0
/// (this keeps the singular behaviour resolvable to s ~ 1e-12 even when e is
/// far from the origin); the interval is (e, e + anchor] when `above` and
/// [e - anchor, e) otherwise. For an infinite endpoint (`endpoint` = +inf),
/// `q` is evaluated at r and the interval is [anchor, inf).
struct RadialProblem {
  std::function<double(double)> q;
  double endpoint = 0.0;
  bool above = true;
  double anchor = 1.0;

  bool infinite_endpoint() const noexcept { return endpoint == std::numeric_limits<double>::infinity(); }
};

RadialProblem inverse_square_problem(double q0, double anchor = 1.0);

struct WeylOptions {
  /// Dyadic windows toward a finite endpoint: s_k = anchor * 2^-k, k = 1..windows.
  int windows = 40;
  /// Dyadic windows toward infinity.
  int infinite_windows = 10;
  /// Windows used for the tail exponent fit.
  int fit_windows = 8;
  /// Minimum number of completed windows for a decision when the step budget runs out.
  int min_windows = 12;
  /// Half-width of the indeterminate band around the L2-borderline exponent 1.
  double band = 2.5e-4;
  double rtol = 1e-10;
  /// Total step budget, shared equally by the two basis solutions and the combination.
  std::size_t max_steps = 300'000;
};

/// Per-solution diagnostics.
struct TailEstimate {
  std::vector<double> log_window_integrals;  // ln of the integral of |u|^2 over each window
  double nu_hat = 0.0;                       // fitted local exponent; L2 iff nu_hat < 1
  bool converges = false;
};

struct WeylAnalysis {
  EndpointClass classification;
  TailEstimate first;   // (u, u') = (1, 0) at the anchor
  TailEstimate second;  // (u, u') = (0, 1) at the anchor
  /// Evidence for the L2 direction u + lambda v in the limit-point case.
  bool combination_tested = false;
  double combination_nu_hat = 0.0;
  std::size_t steps = 0;
};

/// Exact Frobenius rule for q0 / r^2 at r = 0: limit point iff q0 >= 3/4.
EndpointClass frobenius_classify_inverse_square(double q0) noexcept;

/// Numeric classification by square-integrability of two independent solutions.
/// Throws Error(IntegrationFailure) or Error(NonFiniteCoefficient).
WeylAnalysis weyl_analyze(const RadialProblem& problem, SpectralSign z, const WeylOptions& options = {});
EndpointClass weyl_classify_numeric(const RadialProblem& problem, SpectralSign z, const WeylOptions& options = {});

/// Deficiency index of a channel on a half-line from its two endpoint
/// classes: the number of limit-circle endpoints. Throws Error(Indeterminate).
std::uint64_t count_L2_solutions(EndpointClass inner, EndpointClass outer);
std::uint64_t count_L2_solutions(const RadialProblem& inner, const RadialProblem& outer, SpectralSign z,
                                 const WeylOptions& options = {});

/// True iff q and q + perturbation classify alike at the endpoint.
bool perturbation_stability_check(const RadialProblem& problem, const std::function<double(double)>& perturbation,
                                  SpectralSign z, const WeylOptions& options = {});

}  // namespace defidx
