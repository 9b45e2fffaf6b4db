#include "defidx/partition.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/interpolators/cubic_hermite.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "defidx/error.hpp"
#include "defidx/numeric.hpp"

namespace defidx {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kQuadTol = 1e-13;

template <class F>
double integrate(F&& f, double a, double b) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, kQuadTol);
}

// Integrates f over [0, 1] split at the given breakpoints.
template <class F>
double integrate_panels(F&& f, std::vector<double> breaks) {
  breaks.push_back(0.0);
  breaks.push_back(1.0);
  std::sort(breaks.begin(), breaks.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double lo = std::clamp(breaks[i], 0.0, 1.0);
    const double hi = std::clamp(breaks[i + 1], 0.0, 1.0);
    if (hi - lo <= 1e-15) continue;
    // sigma = lo + (hi - lo)(3u^2 - 2u^3) absorbs square-root kinks of the
    // cap measure at the panel ends.
    const double w = hi - lo;
    total += integrate(
        [&](double u) {
          const double v = 1.0 - u;
          return 6.0 * w * u * v * f(lo + w * u * u * (3.0 - 2.0 * u));
        },
        0.0, 1.0);
  }
  return total;
}

// phi and its derivatives for the indicator of {w.e < tau(sigma)}: the common
// shape of balls (e radial) and half-spaces (e normal).
struct Profile {
  double value = 0.0;
  double d1 = 0.0;   // derivative along e
  double lap = 0.0;  // Laplacian
};

template <class Tau>
Profile mollified_cap(const Mollifier& m, double a, Tau tau, const std::vector<double>& breaks, bool derivatives) {
  const int n = m.dimension();
  Profile p;
  p.value = integrate_panels([&](double s) { return m.g(s) * std::pow(s, n - 1) * sphere_cap_measure(n, tau(s)); }, breaks);
  if (!derivatives) return p;
  p.d1 = -integrate_panels([&](double s) { return m.dg(s) * std::pow(s, n - 1) * sphere_cap_moment(n, tau(s)); }, breaks) / a;
  p.lap = integrate_panels(
              [&](double s) {
                const double radial = m.d2g(s) * std::pow(s, n - 1) + (n - 1) * m.dg(s) * std::pow(s, n - 2);
                return radial * sphere_cap_measure(n, tau(s));
              },
              breaks) /
          (a * a);
  return p;
}

// Mollified indicator of the open ball of radius R at distance rho from its centre.
Profile ball_profile(const Mollifier& m, double a, double R, double rho, bool derivatives) {
  if (rho <= R - a) return {1.0, 0.0, 0.0};
  if (rho >= R + a) return {0.0, 0.0, 0.0};
  auto tau = [=](double sigma) {
    const double s = a * sigma;
    const double num = (R - rho) * (R + rho) - s * s;
    if (rho == 0.0) return num > 0 ? kInf : -kInf;
    return num / (2.0 * rho * s);
  };
  return mollified_cap(m, a, tau, {std::abs(R - rho) / a, (R + rho) / a}, derivatives);
}

// Mollified indicator of {y : y.e <= h + x.e} at signed depth h.
Profile half_profile(const Mollifier& m, double a, double h, bool derivatives) {
  if (h >= a) return {1.0, 0.0, 0.0};
  if (h <= -a) return {0.0, 0.0, 0.0};
  auto tau = [=](double sigma) { return h / (a * sigma); };
  return mollified_cap(m, a, tau, {std::abs(h) / a}, derivatives);
}

// Jet of a function of rho = |x - c| from its radial parts.
Jet radial_jet(std::span<const double> x, const Point& c, const Profile& p, double sign) {
  const std::size_t n = x.size();
  Jet j;
  j.value = sign < 0 ? 1.0 - p.value : p.value;
  j.gradient.assign(n, 0.0);
  j.hessian.assign(n * n, 0.0);
  if (p.d1 == 0.0 && p.lap == 0.0) return j;
  const double rho = distance(x, c);
  if (rho < 1e-300) {
    for (std::size_t i = 0; i < n; ++i) j.hessian[i * n + i] = sign * p.lap / static_cast<double>(n);
    return j;
  }
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = (x[i] - c[i]) / rho;
  const double d2 = p.lap - (static_cast<double>(n) - 1.0) * p.d1 / rho;
  const double tangential = p.d1 / rho;
  for (std::size_t i = 0; i < n; ++i) {
    j.gradient[i] = sign * p.d1 * e[i];
    for (std::size_t k = 0; k < n; ++k)
      j.hessian[i * n + k] = sign * ((d2 - tangential) * e[i] * e[k] + (i == k ? tangential : 0.0));
  }
  return j;
}

Jet constant_jet(std::size_t n, double v) { return Jet{v, std::vector<double>(n, 0.0), std::vector<double>(n * n, 0.0)}; }

// Sphere quadrature for the ray-cast evaluation of unions (n <= 3).
struct SphereRule {
  std::vector<Point> nodes;
  std::vector<double> weights;
};

SphereRule sphere_rule(int n) {
  SphereRule r;
  if (n == 1) {
    r.nodes = {{1.0}, {-1.0}};
    r.weights = {1.0, 1.0};
  } else if (n == 2) {
    constexpr int m = 1024;
    for (int k = 0; k < m; ++k) {
      const double t = 2.0 * std::numbers::pi * (k + 0.5) / m;
      r.nodes.push_back({std::cos(t), std::sin(t)});
      r.weights.push_back(2.0 * std::numbers::pi / m);
    }
  } else {
    constexpr int m = 128;
    using gl = boost::math::quadrature::gauss<double, 48>;
    const auto& abscissa = gl::abscissa();
    const auto& weight = gl::weights();
    auto add = [&](double t, double w) {
      const double s = std::sqrt(1.0 - t * t);
      for (int k = 0; k < m; ++k) {
        const double ph = 2.0 * std::numbers::pi * (k + 0.5) / m;
        r.nodes.push_back({s * std::cos(ph), s * std::sin(ph), t});
        r.weights.push_back(w * 2.0 * std::numbers::pi / m);
      }
    };
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
      add(abscissa[i], weight[i]);
      if (abscissa[i] != 0.0) add(-abscissa[i], weight[i]);
    }
  }
  return r;
}

// Tabulated profile on [lo, hi]: value and slope by cubic Hermite
// interpolation with their exact derivatives, the Laplacian by a cubic
// B-spline. `radial` selects d/drho (balls) over d/dh = -d/de (half-spaces).
class ProfileTable {
 public:
  static constexpr int kNodes = 513;

  ProfileTable(double lo, double hi, int n, bool radial, const std::function<Profile(double)>& exact)
      : lo_(lo), hi_(hi), radial_(radial) {
    std::vector<double> x(kNodes), v(kNodes), dv(kNodes), s(kNodes), ds(kNodes), lap(kNodes);
    const double step = (hi - lo) / (kNodes - 1);
    for (int i = 0; i < kNodes; ++i) {
      x[i] = i == kNodes - 1 ? hi : lo + step * i;
      const Profile p = exact(x[i]);
      v[i] = p.value;
      s[i] = p.d1;
      lap[i] = p.lap;
      if (radial) {
        dv[i] = p.d1;
        ds[i] = x[i] > 1e-12 * (hi - lo) ? p.lap - (n - 1) * p.d1 / x[i] : p.lap / n;
      } else {
        dv[i] = -p.d1;
        ds[i] = -p.lap;
      }
    }
    lap_.emplace(lap.data(), lap.size(), lo, step);
    std::vector<double> x2 = x;
    value_.emplace(std::move(x), std::move(v), std::move(dv));
    slope_.emplace(std::move(x2), std::move(s), std::move(ds));
  }

  bool covers(double x) const noexcept { return x >= lo_ && x <= hi_; }

  Profile operator()(double x) const {
    return Profile{std::clamp((*value_)(x), 0.0, 1.0), (*slope_)(x), (*lap_)(x)};
  }

 private:
  double lo_, hi_;
  bool radial_;
  std::optional<boost::math::interpolators::cubic_hermite<std::vector<double>>> value_, slope_;
  std::optional<boost::math::interpolators::cardinal_cubic_b_spline<double>> lap_;
};

}  // namespace

double Jet::laplacian() const noexcept {
  const std::size_t n = gradient.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += hessian[i * n + i];
  return s;
}

double Jet::gradient_norm_squared() const noexcept {
  double s = 0.0;
  for (double g : gradient) s += g * g;
  return s;
}

Mollifier::Mollifier(int n) : n_(n), c_(1.0) {
  if (n < 1) throw Error(ErrorCode::InvalidConfig, "dimension must be at least 1");
  const double moment =
      integrate([n](double s) { return std::exp(-1.0 / (1.0 - s * s)) * std::pow(s, n - 1); }, 0.0, 1.0);
  c_ = 1.0 / (unit_sphere_area(n) * moment);
}

double Mollifier::g(double s) const noexcept {
  if (s >= 1.0) return 0.0;
  return c_ * std::exp(-1.0 / (1.0 - s * s));
}

double Mollifier::dg(double s) const noexcept {
  if (s >= 1.0) return 0.0;
  const double u = 1.0 - s * s;
  return g(s) * (-2.0 * s / (u * u));
}

double Mollifier::d2g(double s) const noexcept {
  if (s >= 1.0) return 0.0;
  const double u = 1.0 - s * s;
  const double gs = g(s);
  if (gs == 0.0) return 0.0;
  return gs * (4.0 * s * s - (2.0 + 6.0 * s * s) * u) / (u * u * u * u);
}

struct CutoffFunction::Impl {
  int n = 0;
  double epsilon = 0.0;
  double a = 0.0;  // mollifier radius eps/4
  RegionSpec f0, f1;
  RegionSpec widened;  // eps/4-neighbourhood of F1
  Mollifier mollifier;
  // Union evaluation.
  SphereRule rule;
  std::optional<boost::math::interpolators::cubic_hermite<std::vector<double>>> radial_mass;
  double full_mass = 1.0;
  // Transition-band table for balls, complements and half-spaces.
  mutable std::once_flag table_once;
  mutable std::optional<ProfileTable> table;

  const ProfileTable* band_table() const {
    std::call_once(table_once, [this] {
      if (const auto* b = std::get_if<Ball>(&widened))
        table.emplace(std::max(0.0, b->radius - a), b->radius + a, n, true,
                      [&](double r) { return ball_profile(mollifier, a, b->radius, r, true); });
      else if (const auto* c = std::get_if<ComplementOfBall>(&widened))
        table.emplace(std::max(0.0, c->radius - a), c->radius + a, n, true,
                      [&](double r) { return ball_profile(mollifier, a, c->radius, r, true); });
      else if (std::holds_alternative<HalfSpace>(widened))
        table.emplace(-a, a, n, false, [&](double h) { return half_profile(mollifier, a, h, true); });
    });
    return table ? &*table : nullptr;
  }

  Profile radial_parts(double R, double rho) const {
    if (rho <= R - a) return {1.0, 0.0, 0.0};
    if (rho >= R + a) return {0.0, 0.0, 0.0};
    return (*band_table())(rho);
  }

  Impl(int dim, double eps, RegionSpec zero, RegionSpec one)
      : n(dim), epsilon(eps), a(eps / 4.0), f0(std::move(zero)), f1(std::move(one)), mollifier(dim) {
    widened = dilate(f1, a);
    if (std::holds_alternative<UnionOfBalls>(widened)) {
      if (n > 3)
        throw Error(ErrorCode::UnsupportedRegion, "unions of balls are supported in dimension <= 3");
      rule = sphere_rule(n);
      // K(sigma) = integral of g(s) s^{n-1} over [0, sigma], tabulated with its exact derivative.
      constexpr int nodes = 4097;
      std::vector<double> x(nodes), y(nodes), dy(nodes);
      using gl = boost::math::quadrature::gauss<double, 10>;
      for (int i = 0; i < nodes; ++i) {
        x[i] = static_cast<double>(i) / (nodes - 1);
        dy[i] = mollifier.g(x[i]) * std::pow(x[i], n - 1);
        y[i] = i == 0 ? 0.0
                      : y[i - 1] + gl::integrate([&](double s) { return mollifier.g(s) * std::pow(s, n - 1); }, x[i - 1], x[i]);
      }
      double total = 0.0;
      for (double w : rule.weights) total += w;
      full_mass = total * y.back();
      radial_mass.emplace(std::move(x), std::move(y), std::move(dy));
    }
  }

  double union_raycast(std::span<const double> x, const UnionOfBalls& u) const {
    double acc = 0.0;
    std::vector<std::pair<double, double>> hits;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const Point& w = rule.nodes[k];
      hits.clear();
      for (const auto& b : u.balls) {
        double bb = 0.0, cc = -b.radius * b.radius;
        for (int i = 0; i < n; ++i) {
          const double d = x[i] - b.center[i];
          bb += w[i] * d;
          cc += d * d;
        }
        const double disc = bb * bb - cc;
        if (disc <= 0.0) continue;
        const double r = std::sqrt(disc);
        const double lo = std::max(0.0, (-bb - r) / a);
        const double hi = std::min(1.0, (-bb + r) / a);
        if (hi > lo) hits.emplace_back(lo, hi);
      }
      std::sort(hits.begin(), hits.end());
      double covered = 0.0, lo = -1.0, hi = -1.0;
      for (const auto& [l, h] : hits) {
        if (l > hi) {
          if (hi > lo) covered += (*radial_mass)(hi) - (*radial_mass)(lo);
          lo = l;
          hi = h;
        } else {
          hi = std::max(hi, h);
        }
      }
      if (hi > lo) covered += (*radial_mass)(hi) - (*radial_mass)(lo);
      acc += rule.weights[k] * covered;
    }
    return std::clamp(acc / full_mass, 0.0, 1.0);
  }

  // Value of the union cutoff, with the single-ball closed form when only
  // one widened ball reaches x.
  double union_value(std::span<const double> x, const UnionOfBalls& u) const {
    const Ball* only = nullptr;
    std::size_t near = 0;
    for (const auto& b : u.balls) {
      const double rho = distance(x, b.center);
      if (rho <= b.radius - a) return 1.0;
      if (rho < b.radius + a) {
        ++near;
        only = &b;
      }
    }
    if (near == 0) return 0.0;
    if (near == 1) return ball_profile(mollifier, a, only->radius, distance(x, only->center), false).value;
    return union_raycast(x, u);
  }

  Jet union_jet(std::span<const double> x, const UnionOfBalls& u) const {
    std::size_t near = 0;
    const Ball* only = nullptr;
    for (const auto& b : u.balls) {
      const double rho = distance(x, b.center);
      if (rho <= b.radius - a) return constant_jet(n, 1.0);
      if (rho < b.radius + 2.0 * a) {
        ++near;
        only = &b;
      }
    }
    if (near == 0) return constant_jet(n, 0.0);
    if (near == 1)
      return radial_jet(x, only->center, ball_profile(mollifier, a, only->radius, distance(x, only->center), true), 1.0);
    // Central differences at step eps * 1e-4.
    const double h = epsilon * 1e-4;
    Point p(x.begin(), x.end());
    auto f = [&](const Point& q) { return union_value(q, u); };
    Jet j;
    j.value = f(p);
    j.gradient.assign(n, 0.0);
    j.hessian.assign(n * n, 0.0);
    for (int i = 0; i < n; ++i) {
      Point pp = p, pm = p;
      pp[i] += h;
      pm[i] -= h;
      const double fp = f(pp), fm = f(pm);
      j.gradient[i] = (fp - fm) / (2.0 * h);
      j.hessian[i * n + i] = (fp - 2.0 * j.value + fm) / (h * h);
      for (int k = 0; k < i; ++k) {
        Point q1 = p, q2 = p, q3 = p, q4 = p;
        q1[i] += h, q1[k] += h;
        q2[i] += h, q2[k] -= h;
        q3[i] -= h, q3[k] += h;
        q4[i] -= h, q4[k] -= h;
        const double v = (f(q1) - f(q2) - f(q3) + f(q4)) / (4.0 * h * h);
        j.hessian[i * n + k] = j.hessian[k * n + i] = v;
      }
    }
    return j;
  }

  Jet jet(std::span<const double> x, bool derivatives) const {
    return std::visit(
        overloaded{
            [&](const Ball& b) { return radial_jet(x, b.center, radial_parts(b.radius, distance(x, b.center)), 1.0); },
            [&](const ComplementOfBall& b) {
              return radial_jet(x, b.center, radial_parts(b.radius, distance(x, b.center)), -1.0);
            },
            [&](const UnionOfBalls& u) {
              if (!derivatives) return constant_jet(n, union_value(x, u));
              return union_jet(x, u);
            },
            [&](const HalfSpace& h) {
              double nx = 0.0;
              for (int i = 0; i < n; ++i) nx += h.normal[i] * x[i];
              const double depth = h.offset - nx;
              const Profile p = depth >= a    ? Profile{1.0, 0.0, 0.0}
                                : depth <= -a ? Profile{0.0, 0.0, 0.0}
                                              : (*band_table())(depth);
              Jet j = constant_jet(n, p.value);
              for (int i = 0; i < n; ++i) {
                j.gradient[i] = p.d1 * h.normal[i];
                for (int k = 0; k < n; ++k) j.hessian[i * n + k] = p.lap * h.normal[i] * h.normal[k];
              }
              return j;
            },
            [&](const EmptyRegion&) { return constant_jet(n, 0.0); },
            [&](const WholeSpace&) { return constant_jet(n, 1.0); },
        },
        widened);
  }
};

double CutoffFunction::operator()(std::span<const double> x) const { return impl_->jet(x, false).value; }
Jet CutoffFunction::jet(std::span<const double> x) const { return impl_->jet(x, true); }
int CutoffFunction::dimension() const noexcept { return impl_->n; }
double CutoffFunction::epsilon() const noexcept { return impl_->epsilon; }
const RegionSpec& CutoffFunction::f0() const noexcept { return impl_->f0; }
const RegionSpec& CutoffFunction::f1() const noexcept { return impl_->f1; }
bool CutoffFunction::analytic_derivatives() const noexcept {
  return !std::holds_alternative<UnionOfBalls>(impl_->widened);
}

CutoffFunction build_cutoff(const RegionSpec& f0, const RegionSpec& f1, double epsilon, int n) {
  if (n < 1) throw Error(ErrorCode::InvalidConfig, "dimension must be at least 1");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw Error(ErrorCode::InvalidConfig, "epsilon must be positive and finite");
  validate_region(f0, n);
  validate_region(f1, n);
  const double d = region_distance(f0, f1);
  if (d < epsilon * (1.0 - 1e-12))
    throw Error(ErrorCode::RegionsTooClose,
                "dist(F0, F1) = " + std::to_string(d) + " is smaller than epsilon = " + std::to_string(epsilon));
  return CutoffFunction(std::make_shared<const CutoffFunction::Impl>(n, epsilon, f0, f1));
}

// ---------------------------------------------------------------------------
// Verification

namespace {

struct Box {
  Point lo, hi;
};

void extend(std::optional<Box>& box, const Point& c, double r) {
  if (!box) {
    box = Box{c, c};
    for (std::size_t i = 0; i < c.size(); ++i) box->lo[i] = box->hi[i] = c[i];
  }
  for (std::size_t i = 0; i < c.size(); ++i) {
    box->lo[i] = std::min(box->lo[i], c[i] - r);
    box->hi[i] = std::max(box->hi[i], c[i] + r);
  }
}

// Points around which the transition of phi happens, with a radius.
std::vector<std::pair<Point, double>> focus_balls(const RegionSpec& r, int n, double eps) {
  return std::visit(overloaded{
                        [](const Ball& b) { return std::vector<std::pair<Point, double>>{{b.center, b.radius}}; },
                        [](const ComplementOfBall& b) {
                          return std::vector<std::pair<Point, double>>{{b.center, b.radius}};
                        },
                        [](const UnionOfBalls& u) {
                          std::vector<std::pair<Point, double>> out;
                          for (const auto& b : u.balls) out.emplace_back(b.center, b.radius);
                          return out;
                        },
                        [eps](const HalfSpace& h) {
                          Point foot = h.normal;
                          for (double& x : foot) x *= h.offset;
                          return std::vector<std::pair<Point, double>>{{foot, eps}};
                        },
                        [n](const EmptyRegion&) { return std::vector<std::pair<Point, double>>{}; },
                        [n](const WholeSpace&) { return std::vector<std::pair<Point, double>>{}; },
                    },
                    r);
}

std::vector<Point> sample_points(const CutoffFunction& phi, int resolution) {
  const int n = phi.dimension();
  const double eps = phi.epsilon();
  std::vector<Point> pts;
  std::optional<Box> box;
  std::vector<std::pair<Point, double>> foci = focus_balls(phi.f1(), n, eps);
  for (auto& f : focus_balls(phi.f0(), n, eps)) foci.push_back(std::move(f));
  for (const auto& [c, r] : foci) extend(box, c, r + eps);
  if (!box) extend(box, Point(n, 0.0), eps);

  // Regular grid.
  resolution = std::max(resolution, 2);
  std::vector<int> idx(n, 0);
  for (;;) {
    Point p(n);
    for (int i = 0; i < n; ++i) p[i] = box->lo[i] + (box->hi[i] - box->lo[i]) * idx[i] / (resolution - 1);
    pts.push_back(std::move(p));
    int i = n - 1;
    while (i >= 0 && ++idx[i] == resolution) idx[i--] = 0;
    if (i < 0) break;
  }
  // Dense rays through every focus along e_1 and the diagonal, and boundary points.
  std::vector<Point> dirs{Point(n, 0.0)};
  dirs[0][0] = 1.0;
  if (n > 1) dirs.emplace_back(n, 1.0 / std::sqrt(static_cast<double>(n)));
  if (const auto* h = std::get_if<HalfSpace>(&phi.f1())) dirs.push_back(h->normal);
  constexpr int ray = 2001;
  for (const auto& [c, r] : foci) {
    const double reach = r + eps;
    for (const auto& d : dirs) {
      for (int k = 0; k < ray; ++k) {
        const double t = -reach + 2.0 * reach * k / (ray - 1);
        Point p = c;
        for (int i = 0; i < n; ++i) p[i] += t * d[i];
        pts.push_back(std::move(p));
      }
      for (double s : {-r, r}) {
        Point p = c;
        for (int i = 0; i < n; ++i) p[i] += s * d[i];
        pts.push_back(std::move(p));
      }
    }
  }
  return pts;
}

struct Measured {
  CutoffConstants constants;
  double range = 0.0;
  double boundary = 0.0;
};

Measured measure(const CutoffFunction& phi, const std::vector<Point>& pts) {
  Measured m;
  m.constants.epsilon = phi.epsilon();
  std::array<double, 3> mx{};
  for (const auto& p : pts) {
    const Jet j = phi.jet(p);
    m.range = std::max({m.range, -j.value, j.value - 1.0});
    if (contains(phi.f0(), p)) m.boundary = std::max(m.boundary, std::abs(j.value));
    if (contains(phi.f1(), p)) m.boundary = std::max(m.boundary, std::abs(1.0 - j.value));
    mx[0] = std::max(mx[0], std::abs(j.value));
    for (double g : j.gradient) mx[1] = std::max(mx[1], std::abs(g));
    for (double h : j.hessian) mx[2] = std::max(mx[2], std::abs(h));
  }
  const double e = phi.epsilon();
  m.constants.c_hat = {mx[0], e * mx[1], e * e * mx[2]};
  return m;
}

}  // namespace

VerificationReport verify_cutoff(const CutoffFunction& phi, int resolution, double tolerance, double spread_tolerance) {
  VerificationReport rep;
  const std::vector<Point> base = sample_points(phi, resolution);
  for (double target : {0.1, 1.0, 10.0}) {
    const double lambda = target / phi.epsilon();
    const CutoffFunction scaled =
        build_cutoff(scale(phi.f0(), lambda), scale(phi.f1(), lambda), target, phi.dimension());
    std::vector<Point> pts = base;
    for (auto& p : pts)
      for (double& x : p) x *= lambda;
    const Measured m = measure(scaled, pts);
    rep.range_violation = std::max(rep.range_violation, m.range);
    rep.boundary_violation = std::max(rep.boundary_violation, m.boundary);
    rep.constants.push_back(m.constants);
    rep.samples += pts.size();
  }
  for (int k = 0; k < 3; ++k) {
    double lo = kInf, hi = 0.0;
    for (const auto& c : rep.constants) {
      lo = std::min(lo, c.c_hat[k]);
      hi = std::max(hi, c.c_hat[k]);
    }
    if (hi > 0.0) rep.scale_spread = std::max(rep.scale_spread, (hi - lo) / hi);
  }
  rep.pass = rep.range_violation < tolerance && rep.boundary_violation < tolerance && rep.scale_spread <= spread_tolerance;
  return rep;
}

// ---------------------------------------------------------------------------
// Families

CutoffFamily::CutoffFamily(int n, double epsilon, std::vector<FamilyMember> members,
                           std::vector<std::optional<Lattice>> lattices)
    : n_(n), epsilon_(epsilon), members_(std::move(members)), lattices_(std::move(lattices)) {}

void CutoffFamily::for_each_near(std::span<const double> x,
                                 const std::function<void(const FamilyMember&, const Point&)>& visit) const {
  for (std::size_t i = 0; i < members_.size(); ++i) {
    const FamilyMember& m = members_[i];
    if (lattices_[i]) {
      lattices_[i]->for_each_site_near(x, m.phi_tilde_radius,
                                       [&](std::span<const std::int64_t>, const Point& site) { visit(m, site); });
    } else if (distance(x, m.center) <= m.phi_tilde_radius) {
      visit(m, m.center);
    }
  }
}

FamilyCheck CutoffFamily::certify(std::size_t samples, std::uint64_t seed) const {
  FamilyCheck out;
  out.min_tilde_gap = kInf;
  auto gap = [&](std::size_t i, std::size_t j, double ri, double rj) {
    const FamilyMember& a = members_[i];
    const FamilyMember& b = members_[j];
    if (i == j) return lattices_[i] ? lattices_[i]->minimal_distance() - 2.0 * ri : kInf;
    if (lattices_[i]) return lattices_[i]->distance_to(b.center) - ri - rj;
    if (lattices_[j]) return lattices_[j]->distance_to(a.center) - ri - rj;
    return distance(a.center, b.center) - ri - rj;
  };
  for (std::size_t i = 0; i < members_.size(); ++i)
    for (std::size_t j = i; j < members_.size(); ++j) {
      const double gp = gap(i, j, members_[i].phi_radius, members_[j].phi_radius);
      const double gt = gap(i, j, members_[i].phi_tilde_radius, members_[j].phi_tilde_radius);
      if (gp <= 0.0) out.phi_disjoint = false;
      if (gt <= 0.0) out.phi_tilde_disjoint = false;
      out.min_tilde_gap = std::min(out.min_tilde_gap, gt);
    }
  if (members_.empty()) return out;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, members_.size() - 1);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit;
  for (std::size_t s = 0; s < samples; ++s) {
    const FamilyMember& m = members_[pick(rng)];
    // Uniform point in the ball of radius phi_tilde_radius + eps/4 around the member.
    Point dir(n_);
    double len = 0.0;
    for (double& d : dir) {
      d = gauss(rng);
      len += d * d;
    }
    len = std::sqrt(len);
    const double r = (m.phi_tilde_radius + epsilon_ / 4.0) * std::pow(unit(rng), 1.0 / n_);
    Point x = m.center;
    for (int i = 0; i < n_; ++i) x[i] += r * dir[i] / len;
    std::size_t nonzero = 0;
    for_each_near(x, [&](const FamilyMember& mm, const Point& shift) {
      Point y = x;
      for (int i = 0; i < n_; ++i) y[i] -= shift[i];
      const double p = mm.phi(y);
      const double pt = mm.phi_tilde(y);
      if (p != 0.0) ++nonzero;
      out.containment_error = std::max(out.containment_error, std::abs(pt * p - p));
    });
    out.max_overlap = std::max(out.max_overlap, nonzero);
    ++out.samples;
  }
  return out;
}

CutoffFamily build_family(const ValidatedConfig& cfg) {
  const int n = cfg.dimension();
  double max_delta = 0.0;
  for (const auto& s : cfg.sites) max_delta = std::max(max_delta, support_radius(s.potential));
  for (const auto& o : cfg.orbits) max_delta = std::max(max_delta, support_radius(o.potential));
  const double eps = std::isfinite(cfg.epsilon) ? cfg.epsilon : max_delta;
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidConfig, "family needs a positive separation");

  // Prototypes centred at the origin, shared by equal cutoff radii.
  std::vector<std::pair<double, std::pair<CutoffFunction, CutoffFunction>>> cache;
  auto prototypes = [&](double delta) {
    for (const auto& [d, p] : cache)
      if (d == delta) return p;
    const Point o(n, 0.0);
    auto p = std::make_pair(
        build_cutoff(ComplementOfBall{o, delta + eps / 2.0}, Ball{o, delta + eps / 4.0}, eps / 4.0, n),
        build_cutoff(ComplementOfBall{o, delta + eps / 2.0}, Ball{o, delta + 3.0 * eps / 8.0}, eps / 8.0, n));
    cache.emplace_back(delta, p);
    return p;
  };

  std::vector<FamilyMember> members;
  std::vector<std::optional<Lattice>> lattices;
  auto add = [&](std::size_t index, bool orbit, const Point& center, const PotentialSpec& spec,
                 std::optional<Lattice> lat) {
    const double delta = support_radius(spec);
    auto [phi, tilde] = prototypes(delta);
    members.push_back({index, orbit, center, delta, phi, tilde, delta + 3.0 * eps / 8.0, delta + 7.0 * eps / 16.0});
    lattices.push_back(std::move(lat));
  };
  for (std::size_t i = 0; i < cfg.sites.size(); ++i) add(i, false, cfg.sites[i].position, cfg.sites[i].potential, {});
  for (std::size_t i = 0; i < cfg.orbits.size(); ++i)
    add(i, true, cfg.orbits[i].lattice.origin(), cfg.orbits[i].potential, cfg.orbits[i].lattice);
  return CutoffFamily(n, eps, std::move(members), std::move(lattices));
}

PartitionConstants partition_constants(const CutoffFamily& family, int resolution) {
  const int n = family.dimension();
  PartitionConstants out;
  if (family.members().empty()) return out;
  std::optional<Box> box;
  for (const auto& m : family.members()) {
    double reach = m.phi_tilde_radius;
    if (m.orbit) reach += family.epsilon() + 2.0 * m.phi_tilde_radius;
    extend(box, m.center, reach);
  }
  std::vector<Point> pts;
  resolution = std::max(resolution, 2);
  std::vector<int> idx(n, 0);
  for (;;) {
    Point p(n);
    for (int i = 0; i < n; ++i) p[i] = box->lo[i] + (box->hi[i] - box->lo[i]) * idx[i] / (resolution - 1);
    pts.push_back(std::move(p));
    int i = n - 1;
    while (i >= 0 && ++idx[i] == resolution) idx[i--] = 0;
    if (i < 0) break;
  }
  constexpr int ray = 2001;
  for (const auto& m : family.members())
    for (int k = 0; k < ray; ++k) {
      Point p = m.center;
      p[0] += -m.phi_tilde_radius + 2.0 * m.phi_tilde_radius * k / (ray - 1);
      pts.push_back(std::move(p));
    }
  double grad = 0.0, lap = 0.0;
  for (const auto& x : pts) {
    double g = 0.0, l = 0.0;
    family.for_each_near(x, [&](const FamilyMember& m, const Point& shift) {
      Point y = x;
      for (int i = 0; i < n; ++i) y[i] -= shift[i];
      const Jet j = m.phi.jet(y);
      g += j.gradient_norm_squared();
      const double d = j.laplacian();
      l += d * d;
    });
    grad = std::max(grad, g);
    lap = std::max(lap, l);
  }
  out.e = grad;
  out.alpha = 2.0 * lap;
  out.beta = 4.0 * grad;
  out.samples = pts.size();
  return out;
}

// ---------------------------------------------------------------------------
// Lattice partition

namespace {

std::vector<Point> scaled_identity(int n, double h) {
  std::vector<Point> basis(n, Point(n, 0.0));
  for (int i = 0; i < n; ++i) basis[i][i] = h;
  return basis;
}

}  // namespace

LatticePartition::LatticePartition(int n)
    : n_(n),
      spacing_(std::min(1.0, std::sqrt(2.0 / std::max(n, 1)))),
      proto_(build_cutoff(ComplementOfBall{Point(std::max(n, 1), 0.0), 1.5}, Ball{Point(std::max(n, 1), 0.0), 0.5}, 1.0,
                          n)),
      lattice_(scaled_identity(n, std::min(1.0, std::sqrt(2.0 / std::max(n, 1)))), Point(std::max(n, 1), 0.0)) {}

LatticePartition::Evaluation LatticePartition::evaluate(std::span<const double> x) const {
  Evaluation ev;
  std::vector<Jet> jets;
  std::vector<Point> sites;
  lattice_.for_each_site_near(x, 1.0, [&](std::span<const std::int64_t>, const Point& site) {
    Point y(x.begin(), x.end());
    for (int i = 0; i < n_; ++i) y[i] -= site[i];
    Jet j = proto_.jet(y);
    if (j.value == 0.0) return;
    jets.push_back(std::move(j));
    sites.push_back(site);
  });
  CompensatedSum s;
  std::vector<double> p(n_, 0.0);  // sum phi grad phi
  for (const auto& j : jets) {
    s += j.value * j.value;
    for (int i = 0; i < n_; ++i) p[i] += j.value * j.gradient[i];
  }
  ev.unnormalized_sum = s.value();
  const double root = std::sqrt(ev.unnormalized_sum);
  for (std::size_t k = 0; k < jets.size(); ++k) {
    Term t{sites[k], jets[k].value / root, std::vector<double>(n_)};
    for (int i = 0; i < n_; ++i)
      t.gradient[i] = jets[k].gradient[i] / root - jets[k].value * p[i] / (ev.unnormalized_sum * root);
    ev.terms.push_back(std::move(t));
  }
  return ev;
}

LatticePartition::Check LatticePartition::verify(std::size_t samples, std::uint64_t seed) const {
  Check c;
  c.min_unnormalized = kInf;
  std::vector<Point> pts;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, spacing_);
  for (std::size_t s = 0; s < samples; ++s) {
    Point p(n_);
    for (double& x : p) x = u(rng);
    pts.push_back(std::move(p));
  }
  const int grid = n_ <= 2 ? 21 : 11;
  std::vector<int> idx(n_, 0);
  for (;;) {
    Point p(n_);
    for (int i = 0; i < n_; ++i) p[i] = spacing_ * idx[i] / (grid - 1);
    pts.push_back(std::move(p));
    int i = n_ - 1;
    while (i >= 0 && ++idx[i] == grid) idx[i--] = 0;
    if (i < 0) break;
  }
  for (const auto& x : pts) {
    const Evaluation ev = evaluate(x);
    double sum = 0.0;
    std::vector<double> cross(n_, 0.0);
    for (const auto& t : ev.terms) {
      sum += t.value * t.value;
      for (int i = 0; i < n_; ++i) cross[i] += t.value * t.gradient[i];
    }
    c.max_sum_deviation = std::max(c.max_sum_deviation, std::abs(sum - 1.0));
    c.max_cross_term = std::max(c.max_cross_term, norm(cross));
    c.min_unnormalized = std::min(c.min_unnormalized, ev.unnormalized_sum);
    c.max_terms = std::max(c.max_terms, ev.terms.size());
    ++c.samples;
  }
  return c;
}

LatticePartition lattice_partition(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidConfig, "dimension must be at least 1");
  return LatticePartition(n);
}

}  // namespace defidx
