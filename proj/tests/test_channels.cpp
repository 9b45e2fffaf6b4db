#include <cmath>

#include "doctest.h"
#include "defidx/channels.hpp"
#include "defidx/error.hpp"
#include "oracles/harmonic.hpp"

using namespace defidx;

TEST_CASE("effective coupling") {
  CHECK(effective_coupling(3, 0, 0) == 0.0);
  CHECK(effective_coupling(3, 0, 1) == 2.0);
  CHECK(effective_coupling(5, -2, 0) == 0.0);
}

TEST_CASE("harmonic multiplicity") {
  CHECK(harmonic_multiplicity(3, 2) == 5);
  CHECK(harmonic_multiplicity(2, 3) == 2);
  CHECK(harmonic_multiplicity(2, 0) == 1);
  CHECK(harmonic_multiplicity(4, 1) == 4);
}

TEST_CASE("multiplicity matches brute-force harmonic polynomial dimensions") {
  for (int n = 2; n <= 4; ++n) {
    std::uint64_t cumulative = 0, brute = 0;
    for (int l = 0; l <= 4; ++l) {
      CAPTURE(n);
      CAPTURE(l);
      CHECK(harmonic_multiplicity(n, l) == oracle::harmonic_dimension(n, l));
      cumulative += harmonic_multiplicity(n, l);
      brute += oracle::harmonic_dimension(n, l);
      CHECK(cumulative == brute);
    }
  }
}

TEST_CASE("point defect examples") {
  CHECK(point_defect(5, 0).def().is_zero());
  CHECK(point_defect(3, 0.75).def().is_zero());
  CHECK(point_defect(3, 0) == make_defect(1, 1));
  CHECK(point_defect(3, -3) == make_defect(4, 4));
  CHECK(point_defect(4, 0).def().is_zero());
}

TEST_CASE("point defect agrees with brute-force channel enumeration") {
  for (int n = 2; n <= 5; ++n)
    for (double c = -6.0; c <= 2.0; c += 0.25) {
      CAPTURE(n);
      CAPTURE(c);
      const std::uint64_t k = oracle::point_defect_count(n, c);
      CHECK(point_defect(n, c) == make_defect(k, k));
    }
}

TEST_CASE("threshold equivalence on a 1/16 grid") {
  for (int n = 2; n <= 10; ++n) {
    const double threshold = -n * (n - 4) / 4.0;
    for (int k = -64; k <= 64; ++k) {
      const double c = threshold + k / 16.0;
      CAPTURE(n);
      CAPTURE(c);
      CHECK(point_defect(n, c).def().is_zero() == (c >= threshold));
    }
  }
}

TEST_CASE("defect is non-increasing in the coupling") {
  for (int n = 2; n <= 6; ++n) {
    double prev = std::numeric_limits<double>::infinity();
    for (double c = -20.0; c <= 3.0; c += 0.125) {
      const double d = point_defect(n, c).def().as_double();
      CHECK(d <= prev);
      prev = d;
    }
  }
}

TEST_CASE("borderline channel raises a warning and the closed form decides") {
  const PointDefect pd = point_defect_detailed(3, 0.75);
  CHECK(pd.record.def().is_zero());
  CHECK(pd.warnings.size() == 1);
}

TEST_CASE("channel spectrum examples") {
  const ChannelSpectrum s = channel_spectrum(3, 0, 2);
  REQUIRE(s.entries.size() == 3);
  CHECK(s.entries[0].q_eff == 0.0);
  CHECK(s.entries[0].multiplicity == 1);
  CHECK(s.entries[0].cls.is_limit_circle());
  CHECK(s.entries[1].q_eff == 2.0);
  CHECK(s.entries[1].multiplicity == 3);
  CHECK(s.entries[1].cls.is_limit_point());
  CHECK(s.entries[2].q_eff == 6.0);
  CHECK(s.entries[2].multiplicity == 5);
  CHECK(s.first_limit_point == 1u);

  const ChannelSpectrum two = channel_spectrum(2, 5, 0);
  REQUIRE(two.entries.size() == 1);
  CHECK(two.entries[0].q_eff == 4.75);
  CHECK(two.entries[0].cls.is_limit_point());

  const ChannelSpectrum four = channel_spectrum(4, 0, 0);
  CHECK(four.entries[0].q_eff == 0.75);
  CHECK(four.entries[0].cls.is_limit_point());

  try {
    channel_spectrum(3, -3, 1);
    FAIL("expected TruncationTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TruncationTooSmall);
  }
}

TEST_CASE("closed-form channel classes agree with the numeric oracle") {
  for (int n : {2, 3, 5}) {
    for (double c : {-4.0, -1.0, 0.0, 0.3}) {
      const ChannelSpectrum s = channel_spectrum(n, c, 4, true);
      for (const auto& e : s.entries) {
        if (std::abs(e.q_eff - 0.75) < 1e-3) continue;
        REQUIRE(e.numeric.has_value());
        CAPTURE(e.q_eff);
        CHECK(*e.numeric == e.cls);
      }
    }
  }
}

TEST_CASE("q_eff strictly increasing") {
  const ChannelSpectrum s = channel_spectrum(6, -30, 10);
  for (std::size_t i = 1; i < s.entries.size(); ++i) CHECK(s.entries[i].q_eff > s.entries[i - 1].q_eff);
}

TEST_CASE("shell defect examples") {
  CHECK(shell_defect(3, Shell{0, 2, 0.5, 1}).def().is_zero());
  CHECK(shell_defect(3, Shell{1, 0, 0.5, 1}).def().is_zero());
  CHECK(shell_defect(3, Shell{1, 0.5, 0.5, 1}).def().is_infinite());
  CHECK(shell_defect(3, Shell{1, 2, 0.5, 1}).def().is_zero());
  CHECK(shell_defect(3, Shell{0.5, 2, 0.5, 1}).def().is_infinite());
  CHECK(shell_defect(4, Shell{2, 3, 0.3, 0.6}).def().is_zero());
  CHECK(shell_defect(3, Shell{2, 4.5, 0.2, 0.5}).def().is_zero());
  CHECK(shell_defect(5, Shell{3, 6.5, 0.2, 0.5}).def().is_zero());
}

TEST_CASE("dimension below 2 is rejected") {
  CHECK_THROWS_AS(point_defect(1, 0), Error);
}
