#include "defidx/region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

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

double dot(std::span<const double> a, std::span<const double> b) {
  CompensatedSum s;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s.value();
}

void check_point(const Point& p, int n, const char* what) {
  if (static_cast<int>(p.size()) != n)
    throw Error(ErrorCode::UnsupportedRegion, std::string(what) + " has dimension " + std::to_string(p.size()) +
                                                  ", expected " + std::to_string(n));
  for (double x : p)
    if (!std::isfinite(x)) throw Error(ErrorCode::UnsupportedRegion, std::string(what) + " is not finite");
}

void check_radius(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw Error(ErrorCode::UnsupportedRegion, "region radius must be positive");
}

std::vector<Ball> as_balls(const RegionSpec& r) {
  if (const auto* b = std::get_if<Ball>(&r)) return {*b};
  return std::get<UnionOfBalls>(r).balls;
}

bool is_ball_like(const RegionSpec& r) {
  return std::holds_alternative<Ball>(r) || std::holds_alternative<UnionOfBalls>(r);
}

double ball_ball(const Ball& a, const Ball& b) {
  return std::max(0.0, distance(a.center, b.center) - a.radius - b.radius);
}

double ball_complement(const Ball& b, const ComplementOfBall& c) {
  return std::max(0.0, c.radius - distance(b.center, c.center) - b.radius);
}

double ball_half(const Ball& b, const HalfSpace& h) { return std::max(0.0, dot(h.normal, b.center) - h.offset - b.radius); }

double half_half(const HalfSpace& a, const HalfSpace& b) {
  // Disjoint only for opposite normals: {n.x <= o1} and {n.x >= -o2}.
  if (std::abs(dot(a.normal, b.normal) + 1.0) > 1e-14) return 0.0;
  return std::max(0.0, -b.offset - a.offset);
}

}  // namespace

HalfSpace make_half_space(Point normal, double offset) {
  const double len = norm(normal);
  if (!(len > 0.0) || !std::isfinite(len)) throw Error(ErrorCode::UnsupportedRegion, "half-space normal must be non-zero");
  for (double& x : normal) x /= len;
  return HalfSpace{std::move(normal), offset / len};
}

void validate_region(const RegionSpec& region, int n) {
  std::visit(overloaded{
                 [n](const Ball& b) {
                   check_point(b.center, n, "ball centre");
                   check_radius(b.radius);
                 },
                 [n](const ComplementOfBall& b) {
                   check_point(b.center, n, "ball centre");
                   check_radius(b.radius);
                 },
                 [n](const UnionOfBalls& u) {
                   if (u.balls.empty()) throw Error(ErrorCode::UnsupportedRegion, "union of balls is empty");
                   for (const auto& b : u.balls) {
                     check_point(b.center, n, "ball centre");
                     check_radius(b.radius);
                   }
                 },
                 [n](const HalfSpace& h) {
                   check_point(h.normal, n, "half-space normal");
                   if (std::abs(norm(h.normal) - 1.0) > 1e-12)
                     throw Error(ErrorCode::UnsupportedRegion, "half-space normal must have unit length");
                   if (!std::isfinite(h.offset)) throw Error(ErrorCode::UnsupportedRegion, "half-space offset is not finite");
                 },
                 [](const EmptyRegion&) {},
                 [](const WholeSpace&) {},
             },
             region);
}

double distance_to(const RegionSpec& region, std::span<const double> x) {
  return std::visit(overloaded{
                        [x](const Ball& b) { return std::max(0.0, distance(x, b.center) - b.radius); },
                        [x](const ComplementOfBall& b) { return std::max(0.0, b.radius - distance(x, b.center)); },
                        [x](const UnionOfBalls& u) {
                          double d = kInf;
                          for (const auto& b : u.balls) d = std::min(d, std::max(0.0, distance(x, b.center) - b.radius));
                          return d;
                        },
                        [x](const HalfSpace& h) { return std::max(0.0, dot(h.normal, x) - h.offset); },
                        [](const EmptyRegion&) { return kInf; },
                        [](const WholeSpace&) { return 0.0; },
                    },
                    region);
}

bool contains(const RegionSpec& region, std::span<const double> x) {
  return std::visit(overloaded{
                        [x](const Ball& b) { return distance(x, b.center) <= b.radius; },
                        [x](const ComplementOfBall& b) { return distance(x, b.center) >= b.radius; },
                        [x](const UnionOfBalls& u) {
                          return std::any_of(u.balls.begin(), u.balls.end(),
                                             [x](const Ball& b) { return distance(x, b.center) <= b.radius; });
                        },
                        [x](const HalfSpace& h) { return dot(h.normal, x) <= h.offset; },
                        [](const EmptyRegion&) { return false; },
                        [](const WholeSpace&) { return true; },
                    },
                    region);
}

double region_distance(const RegionSpec& a, const RegionSpec& b) {
  if (std::holds_alternative<EmptyRegion>(a) || std::holds_alternative<EmptyRegion>(b)) return kInf;
  if (std::holds_alternative<WholeSpace>(a) || std::holds_alternative<WholeSpace>(b)) return 0.0;
  if (is_ball_like(a) && is_ball_like(b)) {
    double d = kInf;
    for (const auto& x : as_balls(a))
      for (const auto& y : as_balls(b)) d = std::min(d, ball_ball(x, y));
    return d;
  }
  if (is_ball_like(b)) return region_distance(b, a);
  if (is_ball_like(a)) {
    double d = kInf;
    for (const auto& x : as_balls(a)) {
      if (const auto* c = std::get_if<ComplementOfBall>(&b)) d = std::min(d, ball_complement(x, *c));
      if (const auto* h = std::get_if<HalfSpace>(&b)) d = std::min(d, ball_half(x, *h));
    }
    return d;
  }
  const auto* ha = std::get_if<HalfSpace>(&a);
  const auto* hb = std::get_if<HalfSpace>(&b);
  if (ha && hb) return half_half(*ha, *hb);
  // Two unbounded regions, at least one the exterior of a ball: they meet far out.
  return 0.0;
}

RegionSpec dilate(const RegionSpec& region, double r) {
  return std::visit(overloaded{
                        [r](const Ball& b) -> RegionSpec { return Ball{b.center, b.radius + r}; },
                        [r](const ComplementOfBall& b) -> RegionSpec {
                          if (b.radius - r <= 0.0) return WholeSpace{};
                          return ComplementOfBall{b.center, b.radius - r};
                        },
                        [r](const UnionOfBalls& u) -> RegionSpec {
                          UnionOfBalls out = u;
                          for (auto& b : out.balls) b.radius += r;
                          return out;
                        },
                        [r](const HalfSpace& h) -> RegionSpec { return HalfSpace{h.normal, h.offset + r}; },
                        [](const EmptyRegion& e) -> RegionSpec { return e; },
                        [](const WholeSpace& w) -> RegionSpec { return w; },
                    },
                    region);
}

RegionSpec scale(const RegionSpec& region, double lambda) {
  auto sp = [lambda](Point p) {
    for (double& x : p) x *= lambda;
    return p;
  };
  return std::visit(overloaded{
                        [&](const Ball& b) -> RegionSpec { return Ball{sp(b.center), b.radius * lambda}; },
                        [&](const ComplementOfBall& b) -> RegionSpec {
                          return ComplementOfBall{sp(b.center), b.radius * lambda};
                        },
                        [&](const UnionOfBalls& u) -> RegionSpec {
                          UnionOfBalls out;
                          for (const auto& b : u.balls) out.balls.push_back({sp(b.center), b.radius * lambda});
                          return out;
                        },
                        [&](const HalfSpace& h) -> RegionSpec { return HalfSpace{h.normal, h.offset * lambda}; },
                        [](const EmptyRegion& e) -> RegionSpec { return e; },
                        [](const WholeSpace& w) -> RegionSpec { return w; },
                    },
                    region);
}

bool is_bounded(const RegionSpec& region) {
  return std::holds_alternative<Ball>(region) || std::holds_alternative<UnionOfBalls>(region) ||
         std::holds_alternative<EmptyRegion>(region);
}

std::string describe(const RegionSpec& region) {
  std::ostringstream os;
  os.precision(12);
  auto pt = [&os](const Point& p) {
    os << "(";
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
    os << ")";
  };
  std::visit(overloaded{
                 [&](const Ball& b) {
                   os << "Ball";
                   pt(b.center);
                   os << " r=" << b.radius;
                 },
                 [&](const ComplementOfBall& b) {
                   os << "ComplementOfBall";
                   pt(b.center);
                   os << " r=" << b.radius;
                 },
                 [&](const UnionOfBalls& u) { os << "UnionOfBalls[" << u.balls.size() << "]"; },
                 [&](const HalfSpace& h) {
                   os << "HalfSpace n=";
                   pt(h.normal);
                   os << " offset=" << h.offset;
                 },
                 [&](const EmptyRegion&) { os << "Empty"; },
                 [&](const WholeSpace&) { os << "Whole"; },
             },
             region);
  return os.str();
}

}  // namespace defidx
