#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace defidx::ode {

/// Outcome of one integrate() call.
enum class Status { Reached, StepUnderflow, BudgetExhausted };

/// Embedded Dormand-Prince 5(4) pair with local extrapolation and PI-free
/// step control. `rhs(t, y, dy)` fills the derivative; `error_norm(y0, y1,
/// err)` returns the weighted error (accept when <= 1); `after_step(t, y)` may
/// rescale y in place after each accepted step. `h` carries the step size
/// between calls and its sign gives the direction of integration.
template <std::size_t N, class Rhs, class Norm, class After>
Status integrate(Rhs&& rhs, Norm&& error_norm, After&& after_step, double& t, std::array<double, N>& y,
                 double t_end, double& h, std::size_t& step_budget) {
  using S = std::array<double, N>;
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  const double dir = t_end >= t ? 1.0 : -1.0;
  if (h == 0.0 || (h > 0) != (dir > 0)) h = dir * std::max(std::abs(h), 1e-3 * std::abs(t_end - t));
  S k1, k2, k3, k4, k5, k6, k7, tmp, y5, err;
  rhs(t, y, k1);
  while (dir * (t_end - t) > 0.0) {
    if (step_budget == 0) return Status::BudgetExhausted;
    bool last = false;
    double natural_h = h;
    if (dir * (t + h - t_end) >= 0.0) {
      h = t_end - t;
      last = true;
    }
    if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t))) return Status::StepUnderflow;
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    rhs(t + c2 * h, tmp, k2);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + c3 * h, tmp, k3);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * h, tmp, k4);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + c5 * h, tmp, k5);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    rhs(t + h, tmp, k6);
    for (std::size_t i = 0; i < N; ++i)
      y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    rhs(t + h, y5, k7);
    for (std::size_t i = 0; i < N; ++i)
      err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    const double e = error_norm(y, y5, err);
    --step_budget;
    if (e <= 1.0 && std::isfinite(e)) {
      t = last ? t_end : t + h;
      y = y5;
      if (after_step(t, y))
        rhs(t, y, k1);
      else
        k1 = k7;
      const double fac = e == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(e, -0.2), 0.2, 5.0);
      h = last ? std::max(std::abs(h), std::abs(natural_h)) * dir : h * fac;
    } else {
      const double fac = std::isfinite(e) ? std::clamp(0.9 * std::pow(e, -0.2), 0.1, 0.9) : 0.1;
      h *= fac;
    }
  }
  return Status::Reached;
}

}  // namespace defidx::ode
