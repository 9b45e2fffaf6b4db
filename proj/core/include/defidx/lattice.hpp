#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace defidx {

using Point = std::vector<double>;

/// Inclusive integer coefficient range per basis vector.
struct IndexBox {
  std::vector<std::int64_t> lo;
  std::vector<std::int64_t> hi;

  std::uint64_t count() const noexcept;
  friend bool operator==(const IndexBox&, const IndexBox&) = default;
};

/// Sites origin + sum_i k_i * basis_i, k in a box or in all of Z^d.
class Lattice {
 public:
  /// Throws Error(InvalidConfig) when the basis is empty, ragged, longer than
  /// the ambient dimension, or linearly dependent.
  Lattice(std::vector<Point> basis, Point origin);

  std::size_t ambient_dimension() const noexcept { return origin_.size(); }
  std::size_t rank() const noexcept { return basis_.size(); }
  const std::vector<Point>& basis() const noexcept { return basis_; }
  const Point& origin() const noexcept { return origin_; }

  Point site(std::span<const std::int64_t> coefficients) const;

  /// Length of the shortest non-zero lattice vector (exact enumeration).
  double minimal_distance() const;

  /// Distance from p to the nearest site of the infinite lattice.
  double distance_to(std::span<const double> p) const;

  /// Calls visit(coefficients, site) for every site within `radius` of p
  /// (closed ball), optionally restricted to a coefficient box.
  void for_each_site_near(std::span<const double> p, double radius,
                          const std::function<void(std::span<const std::int64_t>, const Point&)>& visit,
                          const std::optional<IndexBox>& box = std::nullopt) const;

  /// All sites of a finite coefficient box in lexicographic coefficient order.
  std::vector<Point> sites(const IndexBox& box) const;

  bool same_basis(const Lattice& other) const noexcept;

 private:
  // Least-squares coordinates of p - origin in the basis and the squared
  // distance from p to the affine span.
  std::pair<std::vector<double>, double> project(std::span<const double> p) const;

  std::vector<Point> basis_;
  Point origin_;
  std::vector<double> gram_inverse_;  // rank x rank, row-major
};

}  // namespace defidx
