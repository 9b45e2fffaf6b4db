#include <algorithm>
#include <random>

#include "doctest.h"
#include "defidx/config.hpp"
#include "defidx/config_io.hpp"
#include "defidx/error.hpp"
#include "defidx/extnat.hpp"
#include "defidx/lattice.hpp"

using namespace defidx;

namespace {

const ExtNat inf = ExtNat::infinity();

Singularity point_at(Point x, double c, double delta) { return {std::move(x), InverseSquarePoint{c, delta, {}}}; }

}  // namespace

TEST_CASE("make_defect half-sum") {
  CHECK(make_defect(1, 1).def().as_double() == 1.0);
  CHECK(make_defect(0, 0).def().is_zero());
  CHECK(make_defect(inf, 3).def().is_infinite());
  CHECK(make_defect(1, 2).def().to_string() == "1.5");
}

TEST_CASE("extended arithmetic is associative and commutative") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> pick(0, 9);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<DefectRecord> recs;
    for (int k = 0; k < 6; ++k) {
      const int v = pick(rng);
      recs.push_back(v == 9 ? make_defect(inf, inf) : make_defect(v, v));
    }
    DefectRecord forward, backward;
    for (const auto& r : recs) forward += r;
    for (auto it = recs.rbegin(); it != recs.rend(); ++it) backward = *it + backward;
    std::shuffle(recs.begin(), recs.end(), rng);
    DefectRecord shuffled;
    for (const auto& r : recs) shuffled = shuffled + r;
    CHECK(forward == backward);
    CHECK(forward == shuffled);
  }
}

TEST_CASE("restrict_extension") {
  CHECK(restrict_extension(make_defect(2, 2), 1) == make_defect(1, 1));
  CHECK(restrict_extension(make_defect(7, 7), 0) == make_defect(7, 7));
  CHECK(restrict_extension(make_defect(inf, inf), 5) == make_defect(inf, inf));
  try {
    restrict_extension(make_defect(1, 3), 2);
    FAIL("expected DimensionTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionTooLarge);
  }
}

TEST_CASE("validate_config separation") {
  SingularityConfig cfg;
  cfg.dimension = 3;
  cfg.singularities = {point_at({0, 0, 0}, 0, 1), point_at({3, 0, 0}, 0, 1)};
  CHECK(validate_config(cfg).epsilon == doctest::Approx(1.0).epsilon(1e-15));

  cfg.singularities[1].position = {2, 0, 0};
  try {
    validate_config(cfg);
    FAIL("expected SeparationViolation");
  } catch (const SeparationViolation& e) {
    CHECK(e.first() == 0);
    CHECK(e.second() == 1);
    CHECK(e.distance() == doctest::Approx(0.0));
  }

  SingularityConfig empty;
  empty.dimension = 3;
  try {
    validate_config(empty);
    FAIL("expected EmptyConfig");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyConfig);
  }
}

TEST_CASE("validate_config lattice Z^2 x {0} in R^3") {
  SingularityConfig cfg;
  cfg.dimension = 3;
  cfg.lattices.push_back({{{1, 0, 0}, {0, 1, 0}}, {0, 0, 0}, std::nullopt, InverseSquarePoint{0, 0.25, {}}});
  CHECK(validate_config(cfg).epsilon == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("finite lattice truncations give non-increasing epsilon converging to the generator value") {
  SingularityConfig inf_cfg;
  inf_cfg.dimension = 2;
  inf_cfg.lattices.push_back({{{1.0, 0.2}, {0.1, 1.3}}, {0, 0}, std::nullopt, InverseSquarePoint{0, 0.2, {}}});
  const double limit = validate_config(inf_cfg).epsilon;
  double previous = std::numeric_limits<double>::infinity();
  for (std::int64_t k = 1; k <= 4; ++k) {
    SingularityConfig cfg = inf_cfg;
    cfg.lattices[0].region = IndexBox{{-k, -k}, {k, k}};
    const double eps = validate_config(cfg).epsilon;
    CHECK(eps <= previous);
    CHECK(eps >= limit - 1e-12);
    previous = eps;
  }
  CHECK(previous == doctest::Approx(limit).epsilon(1e-12));
}

TEST_CASE("validate_config is permutation invariant") {
  std::mt19937_64 rng(11);
  SingularityConfig cfg;
  cfg.dimension = 2;
  for (int i = 0; i < 6; ++i) cfg.singularities.push_back(point_at({3.0 * i, 1.5 * (i % 2)}, 0, 0.4 + 0.1 * i));
  const double eps = validate_config(cfg).epsilon;
  for (int t = 0; t < 10; ++t) {
    std::shuffle(cfg.singularities.begin(), cfg.singularities.end(), rng);
    CHECK(validate_config(cfg).epsilon == eps);
  }
}

TEST_CASE("declared epsilon is a hint only") {
  SingularityConfig cfg;
  cfg.dimension = 3;
  cfg.singularities = {point_at({0, 0, 0}, 0, 1), point_at({3, 0, 0}, 0, 1)};
  cfg.declared_epsilon = 0.7;
  const auto v = validate_config(cfg);
  CHECK(v.epsilon == doctest::Approx(1.0));
  CHECK(v.warnings.size() == 1);
}

TEST_CASE("shell requires 0 < r0 < delta") {
  SingularityConfig cfg;
  cfg.dimension = 3;
  cfg.singularities = {{{0, 0, 0}, Shell{1, 2, 1.0, 1.0}}};
  CHECK_THROWS_AS(validate_config(cfg), Error);
}

TEST_CASE("config round trip and strict keys") {
  const std::string text = R"({
    "version": 1, "dimension": 3,
    "singularities": [
      {"position": [0, 0, 0], "potential": {"type": "inverse_square", "coupling": -0.5, "cutoff_radius": 0.5,
        "perturbation": {"type": "power", "coefficient": 2, "exponent": 0.5}}},
      {"position": [4, 0, 0], "potential": {"type": "shell", "beta": 1, "gamma": 2, "shell_radius": 0.3, "cutoff_radius": 0.9}}
    ],
    "lattices": [{"basis": [[10, 0, 0]], "origin": [0, 10, 0], "region": {"min": [-2], "max": [2]},
                  "potential": {"type": "inverse_square", "coupling": 1, "cutoff_radius": 1}}],
    "background": {"sup_norm": 3.5}
  })";
  const SingularityConfig cfg = parse_config(text);
  CHECK(parse_config(serialize_config(cfg)) == cfg);
  CHECK(cfg.background_sup_norm == 3.5);

  try {
    parse_config(R"({"version": 1, "dimension": 3, "colour": "red"})");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
  }
  CHECK_THROWS_AS(parse_config(R"({"version": 2, "dimension": 3})"), Error);
}

TEST_CASE("lattice geometry") {
  const Lattice l({{1, 0}, {0.5, std::sqrt(3.0) / 2}}, {0, 0});
  CHECK(l.minimal_distance() == doctest::Approx(1.0).epsilon(1e-14));
  const Point p{0.5, 0.3};
  double brute = 1e9;
  for (int i = -3; i <= 3; ++i)
    for (int j = -3; j <= 3; ++j) {
      const std::int64_t k[2] = {i, j};
      const Point s = l.site(k);
      brute = std::min(brute, std::hypot(s[0] - p[0], s[1] - p[1]));
    }
  CHECK(l.distance_to(p) == doctest::Approx(brute).epsilon(1e-14));
  CHECK_THROWS_AS(Lattice({{1, 0}, {2, 0}}, {0, 0}), Error);
}
