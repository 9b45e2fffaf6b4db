#pragma once

// Composite Simpson quadrature of the radial Hardy ratio
//   gamma * int f^2 r^{n-3} dr / int f'^2 r^{n-1} dr
// with f' taken by central differences.

#include <cmath>
#include <functional>

namespace oracle {

inline double simpson(const std::function<double(double)>& f, double a, double b, int intervals = 4000) {
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

inline double hardy_ratio(int n, double gamma, const std::function<double(double)>& f, double R) {
  const double h = 1e-6 * R;
  auto df = [&](double r) { return (f(r + h) - f(std::max(0.0, r - h))) / (r + h - std::max(0.0, r - h)); };
  const double singular = simpson([&](double r) { return f(r) * f(r) * std::pow(r, n - 3); }, 0.0, R);
  const double gradient = simpson([&](double r) { return df(r) * df(r) * std::pow(r, n - 1); }, 0.0, R);
  return gamma * singular / gradient;
}

}  // namespace oracle
