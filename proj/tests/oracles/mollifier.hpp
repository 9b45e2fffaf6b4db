#pragma once

// Mollified ball indicator evaluated directly in polar coordinates around the
// ball centre, with its own bump normalization. Dimensions 1 to 3.

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

namespace oracle {

using GL40 = boost::math::quadrature::gauss<double, 40>;

inline double bump(double s) { return s < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0; }

inline double bump_normalization(int n) {
  double radial = 0.0;
  for (int p = 0; p < 32; ++p)
    radial += GL40::integrate([&](double r) { return bump(r) * std::pow(r, n - 1); }, p / 32.0, (p + 1) / 32.0);
  const double sphere = n == 1 ? 2.0 : (n == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi);
  return 1.0 / (sphere * radial);
}

// (theta_a * 1_{B(0,R)})(x) at |x| = rho, theta_a(z) = C a^-n bump(|z|/a).
inline double mollified_ball(int n, double a, double R, double rho) {
  const double C = bump_normalization(n);
  auto theta = [&](double d) { return C * bump(d / a) / std::pow(a, n); };
  const double lo = std::max(0.0, rho - a), hi = std::min(R, rho + a);
  if (hi <= lo) return rho < R ? 1.0 : 0.0;
  const int panels = 16;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double r0 = lo + (hi - lo) * p / panels, r1 = lo + (hi - lo) * (p + 1) / panels;
    total += GL40::integrate(
        [&](double r) {
          if (n == 1) return theta(std::abs(rho - r)) + theta(rho + r);
          const double tmin = std::clamp((rho * rho + r * r - a * a) / (2.0 * rho * r), -1.0, 1.0);
          double inner = 0.0;
          for (int k = 0; k < 8; ++k) {
            const double t0 = tmin + (1.0 - tmin) * k / 8.0, t1 = tmin + (1.0 - tmin) * (k + 1) / 8.0;
            auto at = [&](double t) { return theta(std::sqrt(std::max(0.0, rho * rho + r * r - 2.0 * rho * r * t))); };
            if (n == 3) {
              inner += 2.0 * std::numbers::pi * GL40::integrate(at, t0, t1);
            } else {
              inner += 2.0 * GL40::integrate([&](double ang) { return at(std::cos(ang)); }, std::acos(t1), std::acos(t0));
            }
          }
          return std::pow(r, n - 1) * inner;
        },
        r0, r1);
  }
  return total;
}

}  // namespace oracle
