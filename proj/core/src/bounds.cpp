#include "defidx/bounds.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "defidx/error.hpp"
#include "defidx/numeric.hpp"

namespace defidx {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

RelativeBound morgan(const RelativeBound& local, const PartitionData& p, BoundKind kind) {
  validate(local);
  validate(p);
  if (local.kind != kind)
    throw Error(ErrorCode::InvalidConfig, std::string("expected a ") + std::string(to_string(kind)) + " bound");
  return {local.a * p.c * p.d, local.a * p.c * p.e + local.b * p.c, kind};
}

// Odometer over the index box [lo, hi] (inclusive) per axis.
template <class Visit>
void for_each_index(const std::vector<std::size_t>& lo, const std::vector<std::size_t>& hi, Visit&& visit) {
  const std::size_t n = lo.size();
  std::vector<std::size_t> idx = lo;
  while (true) {
    visit(idx);
    std::size_t a = n;
    while (a-- > 0) {
      if (idx[a] < hi[a]) {
        ++idx[a];
        break;
      }
      idx[a] = lo[a];
    }
    if (a == static_cast<std::size_t>(-1)) return;
  }
}

// Integral of |c|^p |y - site|^{-exponent p} over B(site, radius) intersected with B(x, 1).
double site_contribution(const SingularSite& s, std::span<const double> x, double p, int n) {
  const double D = distance(x, s.position);
  const double rho = s.radius;
  if (D >= 1.0 + rho || s.coefficient == 0.0) return 0.0;
  const double q = n - s.exponent * p;
  if (q <= 0.0 && D <= 1.0) return kInf;
  const double scale = std::pow(std::abs(s.coefficient), p);
  const double S = unit_sphere_area(n);
  double total = 0.0;
  if (D < 1.0) {
    const double m = std::min(rho, 1.0 - D);
    total += S * std::pow(m, q) / q;
  }
  const double lo = std::abs(1.0 - D);
  const double hi = std::min(rho, 1.0 + D);
  if (D > 0.0 && hi > lo) {
    auto f = [&](double r) {
      if (r <= 0.0) return 0.0;
      const double tau = (r * r + D * D - 1.0) / (2.0 * r * D);
      return sphere_cap_measure(n, -tau) * std::pow(r, q - 1.0);
    };
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 15, 1e-12);
  }
  return scale * total;
}

double box_min_distance(std::span<const double> x, std::span<const double> lo, std::span<const double> h) {
  double s = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) {
    const double d = std::max({lo[a] - x[a], 0.0, x[a] - (lo[a] + h[a])});
    s += d * d;
  }
  return std::sqrt(s);
}

double box_max_distance(std::span<const double> x, std::span<const double> lo, std::span<const double> h) {
  double s = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) {
    const double d = std::max(std::abs(x[a] - lo[a]), std::abs(x[a] - lo[a] - h[a]));
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

std::string_view to_string(BoundKind kind) noexcept { return kind == BoundKind::Form ? "form" : "operator"; }

void validate(const RelativeBound& bound) {
  if (!finite_nonneg(bound.a) || !finite_nonneg(bound.b))
    throw Error(ErrorCode::InvalidConfig, "relative bound coefficients must be finite and non-negative");
}

void validate(const PartitionData& data) {
  if (!(data.c > 0.0) || !std::isfinite(data.c) || !(data.d > 0.0) || !std::isfinite(data.d) ||
      !finite_nonneg(data.e))
    throw Error(ErrorCode::InvalidConfig, "partition data requires c > 0, d > 0, e >= 0");
}

RelativeBound morgan_form_bound(const RelativeBound& local, const PartitionData& p) {
  return morgan(local, p, BoundKind::Form);
}

RelativeBound morgan_operator_bound(const RelativeBound& local, const PartitionData& p) {
  return morgan(local, p, BoundKind::Operator);
}

std::pair<double, double> commutator_to_iii(double e_tilde, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidConfig, "eps must be positive");
  return {1.0 + eps, (1.0 + eps) * e_tilde / eps};
}

std::pair<double, double> operator_commutator_gate(double eps, double e) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidConfig, "eps must be positive");
  return {eps * eps / (4.0 + 2.0 * eps), eps * e / (2.0 + eps)};
}

bool defect_invariance_gate(const RelativeBound& global) { return global.a < 1.0; }

double hardy_constant(int n) { return 0.25 * (n - 2.0) * (n - 2.0); }

RelativeBound hardy_form_bound(int n, double gamma) {
  if (n < 3) throw Error(ErrorCode::DimensionTooSmall, "Hardy bound needs n >= 3, got " + std::to_string(n));
  if (!finite_nonneg(gamma)) throw Error(ErrorCode::InvalidConfig, "gamma must be finite and non-negative");
  const double h = hardy_constant(n);
  if (gamma >= h)
    throw Error(ErrorCode::HardyViolation,
                "gamma = " + std::to_string(gamma) + " is not below (n-2)^2/4 = " + std::to_string(h));
  return {gamma / h, 0.0, BoundKind::Form};
}

HardyEvidence hardy_quadrature_evidence(int n, double gamma, std::size_t profiles, std::uint64_t seed) {
  const RelativeBound bound = hardy_form_bound(n, gamma);
  HardyEvidence ev{n, gamma, bound.a, 0.0, profiles};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_real_distribution<double> log_radius(-2.0, 2.0);
  using Gauss = boost::math::quadrature::gauss<double, 30>;
  for (std::size_t k = 0; k < profiles; ++k) {
    double c[4];
    for (double& x : c) x = coef(rng);
    const double R = std::pow(10.0, log_radius(rng));
    auto poly = [&](double s) { return c[0] + s * (c[1] + s * (c[2] + s * c[3])); };
    auto dpoly = [&](double s) { return c[1] + s * (2.0 * c[2] + s * 3.0 * c[3]); };
    auto f = [&](double r) {
      const double u = 1.0 - r / R;
      return u * u * poly(r / R);
    };
    auto df = [&](double r) {
      const double s = r / R, u = 1.0 - s;
      return (-2.0 * u * poly(s) + u * u * dpoly(s)) / R;
    };
    const double singular = Gauss::integrate([&](double r) { return f(r) * f(r) * std::pow(r, n - 3); }, 0.0, R);
    const double gradient = Gauss::integrate([&](double r) { return df(r) * df(r) * std::pow(r, n - 1); }, 0.0, R);
    if (gradient > 0.0) ev.max_ratio = std::max(ev.max_ratio, gamma * singular / gradient);
  }
  return ev;
}

bool admissible_exponent(int n, double p) noexcept {
  if (n < 1 || !std::isfinite(p)) return false;
  if (n <= 3) return p == 2.0;
  return p > 0.5 * n;
}

LpCheckResult loc_unif_Lp_check(const GridTable& V, double p, double cap, const LpCheckOptions& options) {
  validate_grid_table(V);
  const int n = V.dimension;
  if (!admissible_exponent(n, p))
    throw Error(ErrorCode::InadmissibleExponent, "p = " + std::to_string(p) + " is not admissible in dimension " +
                                                     std::to_string(n) + " (need p = 2 for n <= 3, p > n/2 otherwise)");
  const auto N = static_cast<std::size_t>(n);
  const double hmin = *std::min_element(V.spacing.begin(), V.spacing.end());
  const std::size_t stride =
      options.stride ? options.stride : std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.25 / hmin)));
  const std::size_t sub = std::max<std::size_t>(1, options.subsamples);

  std::vector<double> weight(V.size());
  for (std::size_t i = 0; i < V.size(); ++i) weight[i] = V.values[i] ? std::pow(std::abs(*V.values[i]), p) : 0.0;
  const double vol = V.cell_volume();

  std::vector<std::vector<double>> centers;
  {
    std::vector<std::vector<std::size_t>> axis(N);
    for (std::size_t a = 0; a < N; ++a) {
      for (std::size_t k = 0; k < V.shape[a]; k += stride) axis[a].push_back(k);
      if (axis[a].back() != V.shape[a] - 1) axis[a].push_back(V.shape[a] - 1);
    }
    std::vector<std::size_t> lo(N, 0), hi(N);
    for (std::size_t a = 0; a < N; ++a) hi[a] = axis[a].size() - 1;
    for_each_index(lo, hi, [&](const std::vector<std::size_t>& j) {
      std::vector<double> x(N);
      for (std::size_t a = 0; a < N; ++a) x[a] = V.lo[a] + (static_cast<double>(axis[a][j[a]]) + 0.5) * V.spacing[a];
      centers.push_back(std::move(x));
    });
    for (const auto& s : V.singular_sites) centers.push_back(s.position);
  }

  auto in_site = [&](std::span<const double> y) {
    for (const auto& s : V.singular_sites)
      if (distance(y, s.position) < s.radius) return true;
    return false;
  };

  auto ball_integral = [&](const std::vector<double>& x) {
    CompensatedSum total;
    std::vector<std::size_t> lo(N), hi(N);
    for (std::size_t a = 0; a < N; ++a) {
      const double first = std::floor((x[a] - 1.0 - V.lo[a]) / V.spacing[a]);
      const double last = std::floor((x[a] + 1.0 - V.lo[a]) / V.spacing[a]);
      const double top = static_cast<double>(V.shape[a] - 1);
      if (last < 0.0 || first > top) return 0.0;
      lo[a] = static_cast<std::size_t>(std::max(first, 0.0));
      hi[a] = static_cast<std::size_t>(std::min(last, top));
    }
    std::vector<double> corner(N), y(N);
    std::vector<std::size_t> s_lo(N, 0), s_hi(N, sub - 1);
    for_each_index(lo, hi, [&](const std::vector<std::size_t>& k) {
      const double w = weight[V.flatten(k)];
      if (w == 0.0) return;
      for (std::size_t a = 0; a < N; ++a) corner[a] = V.lo[a] + static_cast<double>(k[a]) * V.spacing[a];
      if (box_min_distance(x, corner, V.spacing) >= 1.0) return;
      bool near_site = false;
      for (const auto& s : V.singular_sites)
        if (box_min_distance(s.position, corner, V.spacing) < s.radius) near_site = true;
      if (!near_site && box_max_distance(x, corner, V.spacing) <= 1.0) {
        total += w * vol;
        return;
      }
      std::size_t hits = 0;
      for_each_index(s_lo, s_hi, [&](const std::vector<std::size_t>& j) {
        for (std::size_t a = 0; a < N; ++a)
          y[a] = corner[a] + (static_cast<double>(j[a]) + 0.5) / static_cast<double>(sub) * V.spacing[a];
        if (distance(x, y) < 1.0 && !in_site(y)) ++hits;
      });
      total += w * vol * static_cast<double>(hits) / std::pow(static_cast<double>(sub), n);
    });
    double sum = total.value();
    for (const auto& s : V.singular_sites) sum += site_contribution(s, x, p, n);
    return sum;
  };

  std::vector<double> integrals(centers.size());
  {
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < centers.size();) integrals[i] = ball_integral(centers[i]);
    };
    const std::size_t threads = std::max<std::size_t>(1, options.threads);
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
  }

  LpCheckResult out;
  out.exponent = p;
  out.cap = cap;
  out.balls = centers.size();
  std::size_t best = 0;
  for (std::size_t i = 1; i < integrals.size(); ++i)
    if (integrals[i] > integrals[best]) best = i;
  out.argmax = centers[best];
  out.sup_norm = std::isfinite(integrals[best]) ? std::pow(integrals[best], 1.0 / p) : kInf;
  out.pass = std::isfinite(out.sup_norm) && out.sup_norm < cap;
  return out;
}

}  // namespace defidx
