#pragma once

#include <string>
#include <variant>
#include <vector>

#include "defidx/lattice.hpp"

namespace defidx {

/// Closed ball.
struct Ball {
  Point center;
  double radius = 1.0;
  friend bool operator==(const Ball&, const Ball&) = default;
};

/// {x : |x - center| >= radius}.
struct ComplementOfBall {
  Point center;
  double radius = 1.0;
  friend bool operator==(const ComplementOfBall&, const ComplementOfBall&) = default;
};

struct UnionOfBalls {
  std::vector<Ball> balls;
  friend bool operator==(const UnionOfBalls&, const UnionOfBalls&) = default;
};

/// {x : normal . x <= offset}; `normal` has unit length.
struct HalfSpace {
  Point normal;
  double offset = 0.0;
  friend bool operator==(const HalfSpace&, const HalfSpace&) = default;
};

struct EmptyRegion {
  friend bool operator==(const EmptyRegion&, const EmptyRegion&) = default;
};

struct WholeSpace {
  friend bool operator==(const WholeSpace&, const WholeSpace&) = default;
};

using RegionSpec = std::variant<Ball, ComplementOfBall, UnionOfBalls, HalfSpace, EmptyRegion, WholeSpace>;

/// Half-space with its normal normalized. Throws Error(UnsupportedRegion) for a zero normal.
HalfSpace make_half_space(Point normal, double offset);

/// Throws Error(UnsupportedRegion) on a dimension mismatch, a non-positive
/// radius, an empty union or a non-unit normal.
void validate_region(const RegionSpec& region, int n);

bool contains(const RegionSpec& region, std::span<const double> x);
/// Distance from x to the region (0 inside).
double distance_to(const RegionSpec& region, std::span<const double> x);
/// Distance between two closed regions; +inf when either is empty.
double region_distance(const RegionSpec& a, const RegionSpec& b);
/// Closed r-neighbourhood (r >= 0).
RegionSpec dilate(const RegionSpec& region, double r);
/// Image under x -> lambda x (lambda > 0).
RegionSpec scale(const RegionSpec& region, double lambda);
bool is_bounded(const RegionSpec& region);
std::string describe(const RegionSpec& region);

}  // namespace defidx
