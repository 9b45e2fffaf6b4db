#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "defidx/bounds.hpp"
#include "defidx/channels.hpp"
#include "defidx/decouple.hpp"
#include "defidx/error.hpp"
#include "defidx/partition.hpp"
#include "defidx/support.hpp"
#include "defidx/weyl.hpp"
#include "oracles/hardy.hpp"
#include "oracles/support.hpp"
#ifdef DEFIDX_WITH_CLI
#include "cli.hpp"
#endif

using namespace defidx;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

Outcome threshold_sweep() {
  const auto t0 = Clock::now();
  std::size_t checked = 0, wrong = 0;
  for (int n = 3; n <= 8; ++n) {
    const double threshold = -n * (n - 4) / 4.0;
    for (int k = -32; k <= 32; ++k) {
      const double c = threshold + k / 32.0;
      ++checked;
      if (point_defect(n, c).def().is_zero() != (c >= threshold)) ++wrong;
    }
  }
  const double t = seconds_since(t0);
  return {wrong == 0 && t < 5.0, std::to_string(checked) + " couplings, " + std::to_string(wrong) + " mismatches, " +
                                     std::to_string(t) + " s"};
}

Outcome weyl_oracle() {
  std::size_t agree = 0, total = 0;
  double slowest = 0.0;
  for (int k = 0; total < 500; ++k) {
    const double q0 = -5.0 + 10.0 * k / 503.0;
    if (std::abs(q0 - 0.75) < 1e-3) continue;
    const auto t0 = Clock::now();
    const EndpointClass c = weyl_classify_numeric(inverse_square_problem(q0), SpectralSign::Plus);
    slowest = std::max(slowest, seconds_since(t0));
    // Frobenius: r^{1/2 - nu} is square integrable at 0 iff nu = sqrt(1/4 + q0) < 1.
    const bool lp = std::sqrt(std::max(0.0, 0.25 + q0)) >= 1.0;
    ++total;
    if (!c.is_indeterminate() && c.is_limit_point() == lp) ++agree;
  }
  return {agree == total && slowest < 0.05,
          std::to_string(agree) + "/" + std::to_string(total) + " agree, slowest " + std::to_string(slowest * 1e3) + " ms"};
}

SingularityConfig random_config(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(3, 5), count(1, 20), kind(0, 2);
  std::uniform_real_distribution<double> coupling(-8.0, 3.0), delta(0.3, 1.0), frac(0.1, 0.9);
  SingularityConfig cfg;
  cfg.dimension = dim(rng);
  const int m = count(rng);
  for (int i = 0; i < m; ++i) {
    Point x(static_cast<std::size_t>(cfg.dimension), 0.0);
    x[0] = 3.0 * (i % 5);
    x[1] = 3.0 * (i / 5);
    const double d = delta(rng);
    switch (kind(rng)) {
      case 0:
      case 1:
        cfg.singularities.push_back({x, InverseSquarePoint{std::round(coupling(rng) * 16.0) / 16.0, d, {}}});
        break;
      default: {
        std::uniform_int_distribution<int> beta(1, 3);
        const double b = beta(rng);
        const double g = std::uniform_int_distribution<int>(0, 1)(rng) ? 0.25 * b : 2.0 * b + 0.5;
        cfg.singularities.push_back({x, Shell{b, g, frac(rng) * d, d}});
      }
    }
  }
  return cfg;
}

Outcome additivity() {
  std::mt19937_64 rng(2024);
  std::size_t ok = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const SingularityConfig cfg = random_config(rng);
    const DefectCertificate whole = essential_selfadjointness(cfg);
    DefectRecord sum;
    bool defined = whole.total.has_value();
    for (const auto& s : cfg.singularities) {
      SingularityConfig one = cfg;
      one.singularities = {s};
      const DefectCertificate single = essential_selfadjointness(one);
      if (!single.total) {
        defined = false;
        break;
      }
      sum += *single.total;
    }
    if (defined && *whole.total == sum) ++ok;
  }
  auto lattice = [](int n, double c) {
    SingularityConfig cfg;
    cfg.dimension = n;
    std::vector<Point> basis;
    for (int a = 0; a < n; ++a) {
      Point e(static_cast<std::size_t>(n), 0.0);
      e[a] = 2.0;
      basis.push_back(e);
    }
    cfg.lattices.push_back({basis, Point(static_cast<std::size_t>(n), 0.0), std::nullopt, InverseSquarePoint{c, 0.5, {}}});
    return essential_selfadjointness(cfg);
  };
  const bool zero_orbit = lattice(5, 0).total->def().is_zero();
  const bool infinite_orbit = lattice(3, 0).total->def().is_infinite();
  return {ok == 100 && zero_orbit && infinite_orbit,
          std::to_string(ok) + "/100 additive, zero orbit " + (zero_orbit ? "ok" : "bad") + ", positive orbit " +
              (infinite_orbit ? "ok" : "bad")};
}

Outcome conjugation() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> q0(-5.0, 5.0), b(-3.0, 3.0);
  std::size_t agree = 0;
  for (int k = 0; k < 50; ++k) {
    RadialProblem p;
    const double a = q0(rng), c = b(rng);
    if (k % 5 == 4) {
      p.q = [c](double r) { return c / (1.0 + r * r); };
      p.endpoint = std::numeric_limits<double>::infinity();
    } else {
      p.q = [a, c](double r) { return a / (r * r) + c / r; };
    }
    const EndpointClass plus = weyl_classify_numeric(p, SpectralSign::Plus);
    const EndpointClass minus = weyl_classify_numeric(p, SpectralSign::Minus);
    if (plus == minus) ++agree;
  }
  return {agree == 50, std::to_string(agree) + "/50 agree"};
}

Outcome cutoffs() {
  std::size_t ok = 0, total = 0;
  double spread = 0.0;
  for (int n = 1; n <= 3; ++n)
    for (double r : {0.5, 1.0, 2.0}) {
      const Point o(static_cast<std::size_t>(n), 0.0);
      for (const auto& [f0, f1] : {std::pair<RegionSpec, RegionSpec>{ComplementOfBall{o, r + 1.5}, Ball{o, r}},
                                   std::pair<RegionSpec, RegionSpec>{Ball{o, r}, ComplementOfBall{o, r + 1.0}}}) {
        const VerificationReport v = verify_cutoff(build_cutoff(f0, f1, 1.0, n));
        ++total;
        spread = std::max(spread, v.scale_spread);
        if (v.pass && v.range_violation <= 1e-8 && v.boundary_violation <= 1e-8 && v.scale_spread <= 0.05) ++ok;
      }
    }
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " pairs, worst spread " + std::to_string(spread)};
}

Outcome morgan() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 10.0), pos(1e-3, 10.0);
  std::size_t exact = 0;
  for (int k = 0; k < 10000; ++k) {
    const double a = u(rng), b = u(rng), c = pos(rng), d = pos(rng), e = u(rng), eps = pos(rng);
    const RelativeBound f = morgan_form_bound({a, b, BoundKind::Form}, {c, d, e});
    const RelativeBound o = morgan_operator_bound({a, b, BoundKind::Operator}, {c, d, e});
    const auto iii = commutator_to_iii(e, eps);
    const auto gate = operator_commutator_gate(eps, e);
    if (f.a == a * c * d && f.b == a * c * e + b * c && o.a == f.a && o.b == f.b && iii.first == 1 + eps &&
        iii.second == (1 + eps) * e / eps && gate.first == eps * eps / (4 + 2 * eps) && gate.second == eps * e / (2 + eps))
      ++exact;
  }
  const bool flips = defect_invariance_gate({std::nextafter(1.0, 0.0), 0, BoundKind::Operator}) &&
                     !defect_invariance_gate({1.0, 0, BoundKind::Operator});
  return {exact == 10000 && flips, std::to_string(exact) + "/10000 exact, gate " + (flips ? "strict" : "wrong")};
}

Outcome hardy() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coef(-1.0, 1.0), radius(0.5, 3.0);
  bool ok = true;
  std::ostringstream detail;
  for (int n = 3; n <= 5; ++n) {
    const double gamma = 0.9 * hardy_constant(n);
    const double a = hardy_form_bound(n, gamma).a;
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
      const double c0 = 1.0 + 0.5 * coef(rng), c1 = coef(rng), c2 = coef(rng), c3 = coef(rng), R = radius(rng);
      auto f = [=](double r) {
        const double s = std::min(r / R, 1.0);
        return (1 - s) * (1 - s) * (c0 + s * (c1 + s * (c2 + s * c3)));
      };
      worst = std::max(worst, oracle::hardy_ratio(n, gamma, f, R));
    }
    const HardyEvidence ev = hardy_quadrature_evidence(n, gamma);
    bool rejected = false;
    try {
      hardy_form_bound(n, hardy_constant(n));
    } catch (const Error& e) {
      rejected = e.code() == ErrorCode::HardyViolation;
    }
    ok = ok && worst <= a + 1e-6 && ev.max_ratio <= a + 1e-6 && rejected;
    detail << "n=" << n << " max " << std::max(worst, ev.max_ratio) << " <= " << a << (rejected ? "" : " (not rejected)")
           << (n < 5 ? ", " : "");
  }
  return {ok, detail.str()};
}

Outcome lattice() {
  bool ok = true;
  std::ostringstream detail;
  for (int n = 1; n <= 3; ++n) {
    const auto c = lattice_partition(n).verify(1000);
    ok = ok && c.max_sum_deviation <= 1e-10 && c.max_cross_term <= 1e-10 && c.min_unnormalized >= 0.5;
    detail << "n=" << n << " dev " << c.max_sum_deviation << " cross " << c.max_cross_term << " min "
           << c.min_unnormalized << (n < 3 ? ", " : "");
  }
  return {ok, detail.str()};
}

Outcome support_laws() {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::bernoulli_distribution keep(0.8), zero(0.8);
  std::size_t failures = 0, mismatches = 0;
  for (int n = 1; n <= 2; ++n)
    for (int trial = 0; trial < 1000; ++trial) {
      const std::vector<std::size_t> shape = n == 1 ? std::vector<std::size_t>{32} : std::vector<std::size_t>{10, 10};
      const std::size_t size = n == 1 ? 32 : 100;
      auto make = [&](const CellSet& mask) {
        GridFunction f;
        f.shape = shape;
        f.lo.assign(n, 0.0);
        f.spacing.assign(n, 0.1);
        f.values.resize(size);
        for (auto& v : f.values) v = zero(rng) ? 0.0 : u(rng);
        f.mask = mask;
        return f;
      };
      CellSet mask(size);
      for (std::size_t i = 0; i < size; ++i) mask[i] = keep(rng);
      const GridFunction f = make(mask), g = make(mask);
      if (!check_support_laws(f, g).pass()) ++failures;
      if (trial % 50 == 0 && essential_support(f) != oracle::support(oracle::Grid{shape}, f.values, mask, 0.0))
        ++mismatches;
    }
  return {failures == 0 && mismatches == 0,
          "2000 pairs, " + std::to_string(failures) + " law failures, " + std::to_string(mismatches) + " oracle mismatches"};
}

Outcome classical() {
  auto single = [](int n) {
    SingularityConfig cfg;
    cfg.dimension = n;
    cfg.singularities.push_back({Point(static_cast<std::size_t>(n), 0.0), InverseSquarePoint{0.0, 1.0, {}}});
    return *essential_selfadjointness(cfg).total;
  };
  bool ok = single(3) == make_defect(1, 1);
  for (int n = 4; n <= 8; ++n) ok = ok && single(n).def().is_zero();
  return {ok, "n=3 def " + std::to_string(single(3).def().as_double()) + ", n=4..8 def 0 " + (ok ? "yes" : "no")};
}

Outcome golden() {
#ifdef DEFIDX_WITH_CLI
  std::size_t same = 0;
  for (const char* name : {"single_point_n3", "mixed_five_n3", "lattice_z2_in_r3"}) {
    const std::filesystem::path dir(DEFIDX_GOLDEN_DIR);
    std::ostringstream out, err;
    cli::run({"defect", "--config", (dir / (std::string(name) + ".json")).string()}, out, err);
    std::ifstream in(dir / (std::string(name) + ".expected.json"), std::ios::binary);
    std::ostringstream expected;
    expected << in.rdbuf();
    if (in && cli::strip_timing(out.str()) == expected.str()) ++same;
  }
  return {same == 3, std::to_string(same) + "/3 byte-identical"};
#else
  return {false, "built without the command-line front end"};
#endif
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"threshold reproduction", threshold_sweep},
      {"Weyl oracle agreement", weyl_oracle},
      {"decoupling additivity", additivity},
      {"conjugation symmetry", conjugation},
      {"cutoff verification", cutoffs},
      {"Morgan arithmetic", morgan},
      {"Hardy certificate", hardy},
      {"lattice partition", lattice},
      {"support laws", support_laws},
      {"classical cross-checks", classical},
      {"golden reports", golden},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << i + 1 << ". " << criteria[i].first << ": " << o.detail << '\n';
  }
  return failed == 0 ? 0 : 1;
}
