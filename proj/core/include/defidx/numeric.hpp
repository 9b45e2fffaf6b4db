#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

#include <boost/math/special_functions/beta.hpp>

namespace defidx {

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Euclidean distance between two points of equal dimension, with the
/// squared differences accumulated by compensated summation.
inline double distance(std::span<const double> a, std::span<const double> b) noexcept {
  CompensatedSum s;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s.value());
}

inline double norm(std::span<const double> a) noexcept {
  CompensatedSum s;
  for (double x : a) s += x * x;
  return std::sqrt(s.value());
}

/// Surface area of the unit sphere S^{d-1} in R^d (d >= 1; |S^0| = 2).
inline double unit_sphere_area(int d) noexcept {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

/// Volume of the unit ball in R^d.
inline double unit_ball_volume(int d) noexcept {
  return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

/// Measure of the cap {w in S^{d-1} : w.e < tau} (counting measure on S^0 for d = 1).
inline double sphere_cap_measure(int d, double tau) {
  if (d == 1) return (tau > -1.0 ? 1.0 : 0.0) + (tau > 1.0 ? 1.0 : 0.0);
  if (tau >= 1.0) return unit_sphere_area(d);
  if (tau <= -1.0) return 0.0;
  const double rim = unit_sphere_area(d - 1);
  if (d == 2) return rim * (std::asin(tau) + 0.5 * std::numbers::pi);
  if (d == 3) return rim * (tau + 1.0);
  const double p = 0.5 * (d - 1);
  return rim * std::exp2(d - 2) * boost::math::beta(p, p) * boost::math::ibeta(p, p, 0.5 * (1.0 + tau));
}

/// First moment of the same cap: the integral of w.e over {w.e < tau}.
inline double sphere_cap_moment(int d, double tau) {
  if (tau >= 1.0 || tau <= -1.0) return 0.0;
  if (d == 1) return -1.0;
  return -unit_sphere_area(d - 1) / (d - 1) * std::pow(1.0 - tau * tau, 0.5 * (d - 1));
}

/// Binomial coefficient C(n, k); 0 when k < 0, n < 0 or k > n.
inline std::uint64_t binomial(std::int64_t n, std::int64_t k) noexcept {
  if (n < 0 || k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t r = 1;
  for (std::int64_t i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

}  // namespace defidx
