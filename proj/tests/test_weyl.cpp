#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "defidx/error.hpp"
#include "defidx/weyl.hpp"

using namespace defidx;

namespace {

// Frobenius exponents of -u'' + q0 u / r^2 are 1/2 +- sqrt(1/4 + q0); the
// solution r^{1/2 - nu} is square integrable at 0 iff nu < 1, i.e. q0 < 3/4.
bool frobenius_lp(double q0) { return std::sqrt(std::max(0.0, 0.25 + q0)) >= 1.0; }

RadialProblem free_at_infinity() {
  RadialProblem p;
  p.q = [](double) { return 0.0; };
  p.endpoint = std::numeric_limits<double>::infinity();
  p.anchor = 1.0;
  return p;
}

}  // namespace

TEST_CASE("closed-form rule") {
  CHECK(frobenius_classify_inverse_square(0.75).is_limit_point());
  CHECK(frobenius_classify_inverse_square(2.0).is_limit_point());
  CHECK(frobenius_classify_inverse_square(0.0).is_limit_circle());
  CHECK(frobenius_classify_inverse_square(-1.0).is_limit_circle());
  CHECK(frobenius_classify_inverse_square(std::nextafter(0.75, 0.0)).is_limit_circle());
}

TEST_CASE("numeric classification matches the Frobenius exponents") {
  CHECK(weyl_classify_numeric(inverse_square_problem(2.0), SpectralSign::Plus).is_limit_point());
  CHECK(weyl_classify_numeric(inverse_square_problem(-0.5), SpectralSign::Plus).is_limit_circle());
  CHECK(weyl_classify_numeric(inverse_square_problem(0.0), SpectralSign::Plus).is_limit_circle());
  CHECK(weyl_classify_numeric(inverse_square_problem(-1.0), SpectralSign::Plus).is_limit_circle());
  for (double q0 : {-4.0, -0.2, 0.5, 0.74, 0.76, 1.0, 3.0, 4.9}) {
    CAPTURE(q0);
    CHECK(weyl_classify_numeric(inverse_square_problem(q0), SpectralSign::Plus).is_limit_point() == frobenius_lp(q0));
  }
}

TEST_CASE("free equation at infinity is limit point") {
  CHECK(weyl_classify_numeric(free_at_infinity(), SpectralSign::Plus).is_limit_point());
  CHECK(weyl_classify_numeric(free_at_infinity(), SpectralSign::Minus).is_limit_point());
}

TEST_CASE("borderline coupling is indeterminate, never guessed") {
  const auto c = weyl_classify_numeric(inverse_square_problem(0.75), SpectralSign::Plus);
  CHECK(c.is_indeterminate());
  CHECK(c.band_width > 0.0);
}

TEST_CASE("count_L2_solutions") {
  const auto lp = EndpointClass::limit_point(), lc = EndpointClass::limit_circle();
  CHECK(count_L2_solutions(lc, lp) == 1);
  CHECK(count_L2_solutions(lp, lp) == 0);
  CHECK(count_L2_solutions(lc, lc) == 2);
  try {
    count_L2_solutions(EndpointClass::indeterminate(1e-3), lp);
    FAIL("expected Indeterminate");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Indeterminate);
  }
  CHECK(count_L2_solutions(inverse_square_problem(0.0), free_at_infinity(), SpectralSign::Plus) == 1);
}

TEST_CASE("perturbation stability") {
  CHECK(perturbation_stability_check(inverse_square_problem(0.0), [](double r) { return 1.0 / std::sqrt(r); },
                                     SpectralSign::Plus));
  CHECK(perturbation_stability_check(inverse_square_problem(2.0),
                                     [](double r) { return r < 0.5 ? std::exp(-1.0 / (1.0 - 4.0 * r * r)) : 0.0; },
                                     SpectralSign::Plus));
  CHECK(perturbation_stability_check(inverse_square_problem(0.0), [](double) { return 0.0; }, SpectralSign::Plus));
}

TEST_CASE("conjugation symmetry, monotonicity and determinism") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int k = 0; k < 20; ++k) {
    const double q0 = u(rng);
    CAPTURE(q0);
    const auto plus = weyl_classify_numeric(inverse_square_problem(q0), SpectralSign::Plus);
    CHECK(plus == weyl_classify_numeric(inverse_square_problem(q0), SpectralSign::Minus));
    CHECK(plus == weyl_classify_numeric(inverse_square_problem(q0), SpectralSign::Plus));
  }
  bool seen_lp = false;
  for (double q0 = -5.0; q0 <= 5.0; q0 += 0.25) {
    if (std::abs(q0 - 0.75) < 1e-3) continue;
    const bool lp = weyl_classify_numeric(inverse_square_problem(q0), SpectralSign::Plus).is_limit_point();
    if (seen_lp) CHECK(lp);
    seen_lp = seen_lp || lp;
  }
  CHECK(seen_lp);
}

TEST_CASE("non-finite coefficient is reported") {
  RadialProblem p = inverse_square_problem(1.0);
  p.q = [](double s) { return s < 0.01 ? std::numeric_limits<double>::quiet_NaN() : 1.0 / (s * s); };
  try {
    weyl_classify_numeric(p, SpectralSign::Plus);
    FAIL("expected NonFiniteCoefficient");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteCoefficient);
  }
}

TEST_CASE("classification time") {
  const auto t0 = std::chrono::steady_clock::now();
  (void)weyl_classify_numeric(inverse_square_problem(-2.3), SpectralSign::Plus);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  CHECK(ms < 50.0);
}
