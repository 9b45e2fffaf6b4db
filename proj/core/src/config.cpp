#include "defidx/config.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>

#include "defidx/error.hpp"
#include "defidx/numeric.hpp"

namespace defidx {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double interpolate(const SampledProfile& s, double r) {
  const auto& x = s.radii;
  const auto& y = s.values;
  if (r <= x.front()) return y.front();
  if (r >= x.back()) return y.back();
  const auto it = std::upper_bound(x.begin(), x.end(), r);
  const std::size_t i = static_cast<std::size_t>(it - x.begin());
  const double w = (r - x[i - 1]) / (x[i] - x[i - 1]);
  return (1.0 - w) * y[i - 1] + w * y[i];
}

void check_sampled(const SampledProfile& s, const char* what) {
  if (s.radii.empty() || s.radii.size() != s.values.size())
    throw Error(ErrorCode::InvalidConfig, std::string(what) + ": radii and values must be non-empty and equal length");
  for (std::size_t i = 0; i < s.radii.size(); ++i) {
    if (!std::isfinite(s.radii[i]) || !std::isfinite(s.values[i]) || s.radii[i] <= 0.0)
      throw Error(ErrorCode::InvalidConfig, std::string(what) + ": samples must be finite with positive radii");
    if (i > 0 && s.radii[i] <= s.radii[i - 1])
      throw Error(ErrorCode::InvalidConfig, std::string(what) + ": radii must be strictly increasing");
  }
}

void check_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::InvalidConfig, std::string(what) + " must be positive and finite");
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw Error(ErrorCode::InvalidConfig, std::string(what) + " must be finite");
}

void check_spec(const PotentialSpec& spec, int dimension) {
  std::visit(overloaded{
                 [](const InverseSquarePoint& p) {
                   check_finite(p.coupling, "coupling");
                   check_positive(p.cutoff_radius, "cutoff_radius");
                   if (p.perturbation) {
                     if (const auto* s = std::get_if<SampledProfile>(&*p.perturbation)) check_sampled(*s, "perturbation");
                     check_perturbation_integrable(*p.perturbation, p.cutoff_radius);
                   }
                 },
                 [](const Shell& s) {
                   check_finite(s.beta, "beta");
                   check_finite(s.gamma, "gamma");
                   if (s.gamma < 0.0) throw Error(ErrorCode::InvalidConfig, "shell gamma must be >= 0");
                   check_positive(s.cutoff_radius, "cutoff_radius");
                   check_positive(s.shell_radius, "shell_radius");
                   if (!(s.shell_radius < s.cutoff_radius))
                     throw Error(ErrorCode::InvalidConfig, "shell requires 0 < shell_radius < cutoff_radius");
                 },
                 [](const CustomRadial& c) {
                   check_finite(c.leading_coupling, "leading_coupling");
                   check_positive(c.cutoff_radius, "cutoff_radius");
                   check_sampled(c.samples, "custom_radial samples");
                 },
                 [dimension](const Dipole& d) {
                   check_positive(d.cutoff_radius, "cutoff_radius");
                   if (d.moment.size() != static_cast<std::size_t>(dimension))
                     throw Error(ErrorCode::InvalidConfig, "dipole moment has wrong dimension");
                 },
             },
             spec);
}

void check_point(const Point& p, int dimension, const char* what) {
  if (p.size() != static_cast<std::size_t>(dimension))
    throw Error(ErrorCode::InvalidConfig, std::string(what) + " has dimension " + std::to_string(p.size()) +
                                              ", expected " + std::to_string(dimension));
  for (double x : p) check_finite(x, what);
}

}  // namespace

double evaluate(const RadialProfile& profile, double r) {
  return std::visit(overloaded{
                        [r](const PowerLawProfile& p) { return p.coefficient * std::pow(r, p.exponent); },
                        [r](const SampledProfile& s) { return interpolate(s, r); },
                    },
                    profile);
}

double support_radius(const PotentialSpec& spec) noexcept {
  return std::visit([](const auto& s) { return s.cutoff_radius; }, spec);
}

std::string kind_name(const PotentialSpec& spec) {
  return std::visit(overloaded{
                        [](const InverseSquarePoint&) { return std::string("inverse_square"); },
                        [](const Shell&) { return std::string("shell"); },
                        [](const CustomRadial&) { return std::string("custom_radial"); },
                        [](const Dipole&) { return std::string("dipole"); },
                    },
                    spec);
}

double potential_value(const PotentialSpec& spec, double r) {
  return std::visit(overloaded{
                        [r](const InverseSquarePoint& p) {
                          double v = p.coupling / (r * r);
                          if (p.perturbation) v += evaluate(*p.perturbation, r);
                          return v;
                        },
                        [r](const Shell& s) {
                          if (s.beta == 0.0) return 0.0;
                          if (s.gamma == 0.0) return s.beta;
                          return s.beta * std::pow(std::abs(r - s.shell_radius), -s.gamma);
                        },
                        [r](const CustomRadial& c) {
                          // Remainder samples v_i - c / r_i^2, interpolated and held constant below r_min.
                          SampledProfile rem = c.samples;
                          for (std::size_t i = 0; i < rem.radii.size(); ++i)
                            rem.values[i] -= c.leading_coupling / (rem.radii[i] * rem.radii[i]);
                          return c.leading_coupling / (r * r) + interpolate(rem, r);
                        },
                        [](const Dipole&) -> double {
                          throw Error(ErrorCode::UnsupportedPotential, "dipole potentials are not radial");
                        },
                    },
                    spec);
}

void check_perturbation_integrable(const RadialProfile& profile, double delta) {
  // Window k covers [delta 2^{-k-1}, delta 2^{-k}]; r |V~(r)| integrable at 0
  // iff the window integrals decay geometrically.
  constexpr int windows = 60;
  constexpr int fit = 8;
  std::vector<double> logw;
  logw.reserve(windows);
  bool all_zero_tail = true;
  for (int k = 0; k < windows; ++k) {
    const double hi = std::ldexp(delta, -k);
    const double lo = 0.5 * hi;
    const double w = boost::math::quadrature::gauss<double, 20>::integrate(
        [&](double r) { return r * std::abs(evaluate(profile, r)); }, lo, hi);
    if (!std::isfinite(w))
      throw Error(ErrorCode::IntegrabilityViolation, "perturbation is not finite on (0, delta]");
    if (k >= windows - fit && w != 0.0) all_zero_tail = false;
    logw.push_back(w > 0.0 ? std::log2(w) : -std::numeric_limits<double>::infinity());
  }
  if (all_zero_tail) return;
  // Least-squares slope of log2 W_k over the innermost windows.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int k = windows - fit; k < windows; ++k) {
    const double y = std::isfinite(logw[k]) ? logw[k] : -1100.0;
    sx += k;
    sy += y;
    sxx += double(k) * k;
    sxy += k * y;
  }
  const double slope = (fit * sxy - sx * sy) / (fit * sxx - sx * sx);
  if (!(slope < -1e-3))
    throw Error(ErrorCode::IntegrabilityViolation,
                "r * V~(r) is not integrable at r = 0 (window decay exponent " + std::to_string(-slope) + ")");
}

ValidatedConfig validate_config(const SingularityConfig& config) {
  ValidatedConfig out;
  out.config = config;
  const int n = config.dimension;
  if (n < 2) throw Error(ErrorCode::InvalidConfig, "dimension must be >= 2");
  if (!std::isfinite(config.background_sup_norm) || config.background_sup_norm < 0.0)
    throw Error(ErrorCode::InvalidConfig, "background sup_norm must be finite and non-negative");

  for (std::size_t i = 0; i < config.singularities.size(); ++i) {
    const auto& s = config.singularities[i];
    check_point(s.position, n, "singularity position");
    check_spec(s.potential, n);
    out.sites.push_back({s.position, s.potential, i, false});
  }

  for (std::size_t li = 0; li < config.lattices.size(); ++li) {
    const auto& l = config.lattices[li];
    check_point(l.origin, n, "lattice origin");
    check_spec(l.potential, n);
    Lattice lattice(l.basis, l.origin);
    if (l.region) {
      if (l.region->lo.size() != lattice.rank() || l.region->hi.size() != lattice.rank())
        throw Error(ErrorCode::InvalidConfig, "lattice region rank does not match basis");
      for (auto& p : lattice.sites(*l.region)) out.sites.push_back({std::move(p), l.potential, li, true});
    } else {
      out.orbits.push_back({li, std::move(lattice), l.potential});
    }
  }

  if (out.sites.empty() && out.orbits.empty()) throw Error(ErrorCode::EmptyConfig, "configuration has no singularities");

  double eps = std::numeric_limits<double>::infinity();
  auto consider = [&eps](std::size_t a, std::size_t b, double gap) {
    if (!(gap > 0.0)) throw SeparationViolation(a, b, gap);
    eps = std::min(eps, gap);
  };

  const std::size_t m = out.sites.size();
  for (std::size_t i = 0; i < m; ++i) {
    const double di = support_radius(out.sites[i].potential);
    for (std::size_t j = i + 1; j < m; ++j) {
      const double dj = support_radius(out.sites[j].potential);
      consider(i, j, distance(out.sites[i].position, out.sites[j].position) - (di + dj));
    }
  }
  for (std::size_t a = 0; a < out.orbits.size(); ++a) {
    const auto& orb = out.orbits[a];
    const double da = support_radius(orb.potential);
    consider(m + a, m + a, orb.lattice.minimal_distance() - 2.0 * da);
    for (std::size_t i = 0; i < m; ++i)
      consider(i, m + a, orb.lattice.distance_to(out.sites[i].position) - da - support_radius(out.sites[i].potential));
    for (std::size_t b = a + 1; b < out.orbits.size(); ++b) {
      const auto& other = out.orbits[b];
      if (!orb.lattice.same_basis(other.lattice))
        throw Error(ErrorCode::UnsupportedConfig,
                    "infinite lattices with different bases: separation infimum is not computable");
      consider(m + a, m + b, orb.lattice.distance_to(other.lattice.origin()) - da - support_radius(other.potential));
    }
  }
  out.epsilon = eps;

  if (config.declared_epsilon && std::abs(*config.declared_epsilon - eps) > 1e-9) {
    out.warnings.push_back("declared_epsilon " + std::to_string(*config.declared_epsilon) +
                           " differs from computed separation " + std::to_string(eps) + "; using computed value");
  }
  return out;
}

}  // namespace defidx
