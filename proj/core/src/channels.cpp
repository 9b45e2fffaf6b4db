#include "defidx/channels.hpp"

#include <cmath>
#include <sstream>

#include "defidx/error.hpp"
#include "defidx/numeric.hpp"

namespace defidx {
namespace {

constexpr std::uint64_t kMaxChannels = 10'000'000;
constexpr double kWarnBand = 1e-12;
constexpr double kOracleBand = 1e-3;

void require_dimension(int n) {
  if (n < 2) throw Error(ErrorCode::InvalidConfig, "dimension must be at least 2, got " + std::to_string(n));
}

// 4 q_eff - 4c = (n-1)(n-3) + 4 ell (ell + n - 2); an integer, exact in double
// for every ell this code ever visits.
double integer_part_times_four(int n, std::uint64_t ell) {
  const double l = static_cast<double>(ell);
  return static_cast<double>((n - 1) * (n - 3)) + 4.0 * l * (l + n - 2);
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

double effective_coupling(int n, double c, std::uint64_t ell) {
  require_dimension(n);
  return c + integer_part_times_four(n, ell) / 4.0;
}

std::uint64_t harmonic_multiplicity(int n, std::uint64_t ell) {
  require_dimension(n);
  const auto l = static_cast<std::int64_t>(ell);
  return binomial(l + n - 1, n - 1) - binomial(l + n - 3, n - 1);
}

bool channel_is_limit_point(int n, double c, std::uint64_t ell) {
  require_dimension(n);
  // q_eff >= 3/4  <=>  4c >= 3 - k; both sides are exact.
  return 4.0 * c >= 3.0 - integer_part_times_four(n, ell);
}

PointDefect point_defect_detailed(int n, double c) {
  require_dimension(n);
  if (!std::isfinite(c)) throw Error(ErrorCode::InvalidConfig, "coupling must be finite");
  PointDefect out;
  out.spectrum.dimension = n;
  out.spectrum.coupling = c;
  std::uint64_t total = 0;
  for (std::uint64_t ell = 0;; ++ell) {
    if (ell > kMaxChannels)
      throw Error(ErrorCode::UnsupportedConfig, "coupling " + fmt(c) + " yields more than 10^7 limit-circle channels");
    const double q = effective_coupling(n, c, ell);
    const bool lp = channel_is_limit_point(n, c, ell);
    const std::uint64_t mult = harmonic_multiplicity(n, ell);
    if (std::abs(q - 0.75) < kWarnBand)
      out.warnings.push_back("channel ell=" + std::to_string(ell) + " has q_eff within 1e-12 of 3/4; decided by the closed-form rule");
    if (ell < 64 || lp)
      out.spectrum.entries.push_back(
          {ell, q, mult, lp ? EndpointClass::limit_point() : EndpointClass::limit_circle(), std::nullopt});
    if (lp) {
      out.spectrum.first_limit_point = ell;
      break;
    }
    if (__builtin_add_overflow(total, mult, &total))
      throw Error(ErrorCode::UnsupportedConfig, "defect count overflows 64 bits");
  }
  out.record = make_defect(total, total);
  return out;
}

DefectRecord point_defect(int n, double c) { return point_defect_detailed(n, c).record; }

ChannelSpectrum channel_spectrum(int n, double c, std::uint64_t ell_max, bool with_oracle, const WeylOptions& options) {
  require_dimension(n);
  ChannelSpectrum s;
  s.dimension = n;
  s.coupling = c;
  for (std::uint64_t ell = 0; ell <= ell_max; ++ell) {
    const bool lp = channel_is_limit_point(n, c, ell);
    ChannelEntry e{ell, effective_coupling(n, c, ell), harmonic_multiplicity(n, ell),
                   lp ? EndpointClass::limit_point() : EndpointClass::limit_circle(), std::nullopt};
    if (with_oracle && std::abs(e.q_eff - 0.75) >= kOracleBand)
      e.numeric = weyl_classify_numeric(inverse_square_problem(e.q_eff), SpectralSign::Plus, options);
    if (lp && !s.first_limit_point) s.first_limit_point = ell;
    s.entries.push_back(e);
  }
  if (!s.first_limit_point)
    throw Error(ErrorCode::TruncationTooSmall,
                "ell_max = " + std::to_string(ell_max) + " is below the first limit-point channel");
  return s;
}

ShellDefect shell_defect_detailed(int n, const Shell& spec, const WeylOptions& options) {
  require_dimension(n);
  if (!(spec.shell_radius > 0.0) || !(spec.cutoff_radius > spec.shell_radius))
    throw Error(ErrorCode::InvalidConfig, "shell requires 0 < r0 < delta");
  if (!(spec.gamma >= 0.0)) throw Error(ErrorCode::InvalidConfig, "shell exponent must be non-negative");
  ShellDefect out;
  if (spec.beta == 0.0 || spec.gamma == 0.0) {
    out.record = make_defect(0, 0);
    out.notes.push_back("potential is bounded; no singular endpoint");
    return out;
  }
  const double r0 = spec.shell_radius;
  const double anchor = 0.5 * std::min(r0, spec.cutoff_radius - r0);
  // The l = 0 centrifugal term is regular at r0 and kept only for realism of
  // the two one-sided problems.
  const double centrifugal = (n - 1) * (n - 3) / 4.0;
  auto side = [&](bool above) {
    RadialProblem p;
    p.endpoint = r0;
    p.above = above;
    p.anchor = anchor;
    p.q = [=, beta = spec.beta, gamma = spec.gamma](double s) {
      const double r = above ? r0 + s : r0 - s;
      return beta * std::pow(s, -gamma) + centrifugal / (r * r);
    };
    EndpointClass cls = EndpointClass::indeterminate(options.band);
    try {
      cls = weyl_classify_numeric(p, SpectralSign::Plus, options);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::IntegrationFailure || !(spec.beta > 0.0 && spec.gamma > 2.0)) throw;
    }
    if (cls.is_indeterminate() && spec.beta > 0.0 && spec.gamma > 2.0) {
      // q >= 3 / (4 s^2) near the endpoint forces the limit-point case.
      cls = EndpointClass::limit_point();
      out.notes.push_back(std::string(above ? "outer" : "inner") +
                          " side unresolved numerically; repulsive exponent above 2 decided by the 3/(4 s^2) comparison");
    }
    if (cls.is_indeterminate() && spec.gamma == 2.0) {
      cls = frobenius_classify_inverse_square(spec.beta);
      out.notes.push_back(std::string(above ? "outer" : "inner") +
                          " side indeterminate numerically; inverse-square exponent decided by the Frobenius rule");
    }
    if (cls.is_indeterminate())
      throw Error(ErrorCode::ShellIndeterminate, std::string("shell endpoint classification is indeterminate from the ") +
                                                     (above ? "outer" : "inner") + " side");
    return cls;
  };
  out.inner = side(false);
  out.outer = side(true);
  if (out.inner->is_limit_circle() || out.outer->is_limit_circle())
    out.record = make_defect(ExtNat::infinity(), ExtNat::infinity());
  else
    out.record = make_defect(0, 0);
  return out;
}

DefectRecord shell_defect(int n, const Shell& spec, const WeylOptions& options) {
  return shell_defect_detailed(n, spec, options).record;
}

}  // namespace defidx
