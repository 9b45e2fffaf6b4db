#include "defidx/weyl.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "defidx/error.hpp"
#include "defidx/ode.hpp"

namespace defidx {
namespace {

using cplx = std::complex<double>;
// y = (Re u, Im u, Re u_t, Im u_t, window integral), t = log s (or log r).
using State = std::array<double, 5>;

constexpr double kRescaleHigh = 1e100;
constexpr double kRescaleLow = 1e-100;

struct Trace {
  std::vector<double> log_windows;
  cplx u_end;
  double log_scale_end = 0.0;
  bool budget_exhausted = false;
};

double y_norm(const State& y) { return std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3]); }

// Integrates one solution with data (u, du/dr) at the anchor toward the
// singular endpoint, recording ln of the window integrals of |u|^2.
Trace trace_solution(const RadialProblem& p, cplx z, cplx u0, cplx du0, int windows, const WeylOptions& opt,
                     std::size_t& budget) {
  const bool inf = p.infinite_endpoint();
  const double dir = inf ? 1.0 : -1.0;
  double t = std::log(p.anchor);
  // dr/dt = +-s (finite endpoint) or r (infinite endpoint).
  const double drdt = inf ? p.anchor : (p.above ? p.anchor : -p.anchor);
  const cplx ut0 = du0 * drdt;
  State y{u0.real(), u0.imag(), ut0.real(), ut0.imag(), 0.0};

  auto rhs = [&](double tt, const State& s, State& ds) {
    const double x = std::exp(tt);
    const double qv = p.q(x);
    if (!std::isfinite(qv))
      throw Error(ErrorCode::NonFiniteCoefficient, "q is not finite at distance " + std::to_string(x));
    const cplx c = x * x * (qv - z);
    const cplx u(s[0], s[1]);
    const cplx ut(s[2], s[3]);
    const cplx d = ut + c * u;
    ds = {s[2], s[3], d.real(), d.imag(), dir * std::norm(u) * x};
  };
  auto err_norm = [&](const State& a, const State& b, const State& e) {
    const double sy = opt.rtol * std::max(y_norm(a), y_norm(b)) + 1e-300;
    const double si = opt.rtol * std::max(std::abs(a[4]), std::abs(b[4])) + 1e-300;
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) acc += (e[i] / sy) * (e[i] / sy);
    acc += (e[4] / si) * (e[4] / si);
    return std::sqrt(acc / 5.0);
  };
  double log_scale = 0.0;
  auto rescale = [&](State& s) {
    const double m = y_norm(s);
    if (m > 0.0 && std::isfinite(m)) {
      for (int i = 0; i < 4; ++i) s[i] /= m;
      s[4] /= m * m;
      log_scale += std::log(m);
    }
  };
  auto after = [&](double, State& s) {
    const double m = y_norm(s);
    if (m > kRescaleHigh || (m < kRescaleLow && m > 0.0) || s[4] > 1e200) {
      rescale(s);
      return true;
    }
    return false;
  };

  Trace tr;
  double h = dir * 0.05;
  for (int k = 1; k <= windows; ++k) {
    rescale(y);
    y[4] = 0.0;
    const double t_end = std::log(p.anchor) + dir * k * std::numbers::ln2;
    const auto status = ode::integrate<5>(rhs, err_norm, after, t, y, t_end, h, budget);
    if (status == ode::Status::BudgetExhausted) {
      tr.budget_exhausted = true;
      break;
    }
    if (status == ode::Status::StepUnderflow) break;
    tr.log_windows.push_back(y[4] > 0.0 ? std::log(y[4]) + 2.0 * log_scale : -std::numeric_limits<double>::infinity());
    tr.u_end = cplx(y[0], y[1]);
    tr.log_scale_end = log_scale;
  }
  return tr;
}

// nu_hat from the least-squares slope of ln W over windows [first, last).
double fit_nu(const std::vector<double>& logw, std::size_t first, std::size_t last) {
  const double m = static_cast<double>(last - first);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = first; k < last; ++k) {
    const double x = static_cast<double>(k);
    const double y = std::isfinite(logw[k]) ? logw[k] : -745.0 * 2;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return 1.0 + slope / std::numbers::ln2 / 2.0;
}

}  // namespace

std::string to_string(EndpointClass c) {
  switch (c.kind) {
    case EndpointClass::Kind::LimitPoint: return "LimitPoint";
    case EndpointClass::Kind::LimitCircle: return "LimitCircle";
    case EndpointClass::Kind::BoundaryIndeterminate: return "BoundaryIndeterminate";
  }
  return "?";
}

std::string short_name(EndpointClass c) {
  switch (c.kind) {
    case EndpointClass::Kind::LimitPoint: return "LP";
    case EndpointClass::Kind::LimitCircle: return "LC";
    case EndpointClass::Kind::BoundaryIndeterminate: return "indeterminate";
  }
  return "?";
}

RadialProblem inverse_square_problem(double q0, double anchor) {
  return RadialProblem{[q0](double r) { return q0 / (r * r); }, 0.0, true, anchor};
}

EndpointClass frobenius_classify_inverse_square(double q0) noexcept {
  return q0 >= 0.75 ? EndpointClass::limit_point() : EndpointClass::limit_circle();
}

WeylAnalysis weyl_analyze(const RadialProblem& p, SpectralSign sign, const WeylOptions& opt) {
  if (!(p.anchor > 0.0) || !std::isfinite(p.anchor))
    throw Error(ErrorCode::InvalidConfig, "anchor must be a positive finite distance");
  const cplx z = sign == SpectralSign::Plus ? cplx(0.0, 1.0) : cplx(0.0, -1.0);
  const int windows = p.infinite_endpoint() ? opt.infinite_windows : opt.windows;
  const std::size_t fit = static_cast<std::size_t>(opt.fit_windows);

  // Each of the (up to) three traces gets an equal share of the step budget.
  const std::size_t share = opt.max_steps / 3;
  std::size_t budget_u = share, budget_v = share, budget_w = share;
  WeylAnalysis out;
  const Trace tu = trace_solution(p, z, 1.0, 0.0, windows, opt, budget_u);
  const Trace tv = trace_solution(p, z, 0.0, 1.0, windows, opt, budget_v);

  const std::size_t done = std::min(tu.log_windows.size(), tv.log_windows.size());
  const std::size_t needed =
      std::min<std::size_t>(static_cast<std::size_t>(windows), std::max<std::size_t>(fit + 1, static_cast<std::size_t>(opt.min_windows)));
  if (done < needed)
    throw Error(ErrorCode::IntegrationFailure, "integration stopped after " + std::to_string(done) + " of " +
                                                   std::to_string(windows) + " windows");

  out.first.log_window_integrals = tu.log_windows;
  out.second.log_window_integrals = tv.log_windows;
  out.first.nu_hat = fit_nu(tu.log_windows, done - fit, done);
  out.second.nu_hat = fit_nu(tv.log_windows, done - fit, done);
  out.first.converges = out.first.nu_hat < 1.0;
  out.second.converges = out.second.nu_hat < 1.0;

  auto finish = [&](EndpointClass c) {
    out.classification = c;
    out.steps = 3 * share - budget_u - budget_v - budget_w;
    return out;
  };

  if (std::abs(out.first.nu_hat - 1.0) < opt.band || std::abs(out.second.nu_hat - 1.0) < opt.band)
    return finish(EndpointClass::indeterminate(opt.band));
  if (out.first.converges && out.second.converges) return finish(EndpointClass::limit_circle());
  if (out.first.converges || out.second.converges) return finish(EndpointClass::limit_point());

  // Both generic solutions leave L2: look for the square-integrable
  // combination u + lambda v that cancels the dominant behaviour at the
  // innermost node, then confirm its decay over the windows where the
  // cancellation is still resolved.
  const double log_ratio = std::log(std::abs(tu.u_end)) - std::log(std::abs(tv.u_end)) + tu.log_scale_end - tv.log_scale_end;
  if (!std::isfinite(log_ratio) || std::abs(log_ratio) > 600.0) return finish(EndpointClass::indeterminate(opt.band));
  const cplx lambda = -std::polar(std::exp(log_ratio), std::arg(tu.u_end) - std::arg(tv.u_end));

  const double nu_dom = std::max({out.first.nu_hat, out.second.nu_hat, 0.5});
  const int usable = static_cast<int>(std::floor(std::log(1e7) / (2.0 * nu_dom * std::numbers::ln2)));
  const int m = std::clamp(usable, 2, std::min(8, windows));
  const Trace tw = trace_solution(p, z, 1.0, lambda, m, opt, budget_w);
  out.combination_tested = true;
  if (tw.log_windows.size() < 2) return finish(EndpointClass::indeterminate(opt.band));
  out.combination_nu_hat = fit_nu(tw.log_windows, 0, tw.log_windows.size());
  if (out.combination_nu_hat < 1.0 - opt.band) return finish(EndpointClass::limit_point());
  return finish(EndpointClass::indeterminate(opt.band));
}

EndpointClass weyl_classify_numeric(const RadialProblem& problem, SpectralSign z, const WeylOptions& options) {
  return weyl_analyze(problem, z, options).classification;
}

std::uint64_t count_L2_solutions(EndpointClass inner, EndpointClass outer) {
  if (inner.is_indeterminate() || outer.is_indeterminate())
    throw Error(ErrorCode::Indeterminate, "endpoint classification is indeterminate");
  return (inner.is_limit_circle() ? 1u : 0u) + (outer.is_limit_circle() ? 1u : 0u);
}

std::uint64_t count_L2_solutions(const RadialProblem& inner, const RadialProblem& outer, SpectralSign z,
                                 const WeylOptions& options) {
  return count_L2_solutions(weyl_classify_numeric(inner, z, options), weyl_classify_numeric(outer, z, options));
}

bool perturbation_stability_check(const RadialProblem& problem, const std::function<double(double)>& perturbation,
                                  SpectralSign z, const WeylOptions& options) {
  RadialProblem perturbed = problem;
  perturbed.q = [q = problem.q, perturbation](double x) { return q(x) + perturbation(x); };
  return weyl_classify_numeric(problem, z, options).kind == weyl_classify_numeric(perturbed, z, options).kind;
}

}  // namespace defidx
