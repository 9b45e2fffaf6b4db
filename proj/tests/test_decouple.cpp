#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "defidx/decouple.hpp"
#include "defidx/error.hpp"
#include "defidx/report.hpp"

using namespace defidx;

namespace {

Singularity point_at(Point x, double c, double delta) { return {std::move(x), InverseSquarePoint{c, delta, {}}}; }

SingularityConfig points(int n, const std::vector<double>& couplings, double spacing = 3.0, double delta = 1.0) {
  SingularityConfig cfg;
  cfg.dimension = n;
  for (std::size_t i = 0; i < couplings.size(); ++i) {
    Point x(static_cast<std::size_t>(n), 0.0);
    x[0] = spacing * static_cast<double>(i);
    cfg.singularities.push_back(point_at(x, couplings[i], delta));
  }
  return cfg;
}

SingularityConfig lattice(int n, double c) {
  SingularityConfig cfg;
  cfg.dimension = n;
  std::vector<Point> basis;
  for (int a = 0; a < n; ++a) {
    Point e(static_cast<std::size_t>(n), 0.0);
    e[a] = 1.0;
    basis.push_back(e);
  }
  cfg.lattices.push_back({basis, Point(static_cast<std::size_t>(n), 0.0), std::nullopt, InverseSquarePoint{c, 0.25, {}}});
  return cfg;
}

std::vector<DefectRecord> table_defects(const DefectCertificate& c) {
  std::vector<DefectRecord> out;
  for (const auto& row : c.table) out.push_back(*row.record);
  return out;
}

}  // namespace

TEST_CASE("localize remainder examples") {
  {
    SingularityConfig cfg = points(3, {1, 1}, 5.0, 2.0);
    const LocalizedConfig loc = localize(validate_config(cfg));
    CHECK(loc.epsilon == doctest::Approx(1.0));
    CHECK(loc.pieces[0].split_radius == doctest::Approx(0.5));
    CHECK(loc.pieces[0].remainder_sup == doctest::Approx(4.0).epsilon(1e-9));
  }
  {
    SingularityConfig cfg = points(3, {-2, -2}, 2.5, 1.0);
    const LocalizedConfig loc = localize(validate_config(cfg));
    CHECK(loc.epsilon == doctest::Approx(0.5));
    CHECK(std::abs(loc.pieces[0].remainder_sup - 32.0) / 32.0 < 1e-6);
    CHECK(loc.remainder_bound == doctest::Approx(32.0).epsilon(1e-6));
  }
  {
    SingularityConfig cfg = points(3, {0, 0}, 5.0, 2.0);
    CHECK(localize(validate_config(cfg)).remainder_bound == 0.0);
  }
}

TEST_CASE("sampled sup finds interior maxima") {
  CHECK(sampled_sup([](double r) { return std::sin(3.0 * r); }, 0.0, 2.0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sampled_sup([](double r) { return 1.0 / (r * r); }, 0.25, 1.0) == doctest::Approx(16.0).epsilon(1e-12));
}

TEST_CASE("aggregate examples") {
  const DefectCertificate c = essential_selfadjointness(points(3, {0, -1, 2}));
  CHECK(table_defects(c) == std::vector<DefectRecord>{make_defect(1, 1), make_defect(1, 1), make_defect(0, 0)});
  CHECK(c.total == make_defect(2, 2));
  CHECK(c.verdict == Verdict::PositiveDefect);

  const DefectCertificate l5 = essential_selfadjointness(lattice(5, 0));
  CHECK(l5.verdict == Verdict::EssentiallySelfAdjoint);
  CHECK(l5.total->def().is_zero());

  const DefectCertificate l3 = essential_selfadjointness(lattice(3, 0));
  CHECK(l3.verdict == Verdict::InfiniteDefect);
  CHECK(l3.total->def().is_infinite());
  CHECK(l3.table[0].record == make_defect(1, 1));
}

TEST_CASE("essential self-adjointness examples") {
  CHECK(essential_selfadjointness(points(4, {0})).verdict == Verdict::EssentiallySelfAdjoint);

  const DefectCertificate c = essential_selfadjointness(points(3, {1, 0.5}));
  CHECK(c.verdict == Verdict::PositiveDefect);
  CHECK(c.first_violation == 1u);

  SingularityConfig bg;
  bg.dimension = 3;
  bg.background_sup_norm = 10.0;
  const DefectCertificate b = essential_selfadjointness(bg);
  CHECK(b.verdict == Verdict::EssentiallySelfAdjoint);
  CHECK(b.total == make_defect(0, 0));
}

TEST_CASE("verdict soundness and footer") {
  for (const auto& cfg : {points(3, {1, 2}), points(3, {0}), points(5, {-3, -1})}) {
    const DefectCertificate c = essential_selfadjointness(cfg);
    CHECK((c.verdict == Verdict::EssentiallySelfAdjoint) == c.total->def().is_zero());
    CHECK(c.notes.size() == 2);
  }
}

TEST_CASE("infinite shell dominates mixed configurations") {
  SingularityConfig cfg = points(3, {0, -3});
  cfg.singularities.push_back({{0, 3, 0}, Shell{1, 0.5, 0.4, 0.8}});
  const DefectCertificate c = essential_selfadjointness(cfg);
  CHECK(c.verdict == Verdict::InfiniteDefect);
  CHECK(c.total->def().is_infinite());
}

TEST_CASE("perturbed borderline channel gives an indeterminate verdict") {
  SingularityConfig cfg;
  cfg.dimension = 3;
  cfg.singularities.push_back({{0, 0, 0}, InverseSquarePoint{0.75, 1.0, PowerLawProfile{1.0, 0.5}}});
  const DefectCertificate c = essential_selfadjointness(cfg);
  CHECK(c.verdict == Verdict::Indeterminate);
  CHECK(!c.total.has_value());
  CHECK(c.first_violation == 0u);
}

TEST_CASE("dipoles are rejected") {
  SingularityConfig cfg;
  cfg.dimension = 3;
  cfg.singularities.push_back({{0, 0, 0}, Dipole{{1, 0, 0}, 1.0}});
  try {
    essential_selfadjointness(cfg);
    FAIL("expected UnsupportedPotential");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedPotential);
  }
}

TEST_CASE("additivity over singleton sub-configurations") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> coupling(-6.0, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    SingularityConfig cfg;
    cfg.dimension = 3 + trial % 3;
    const int count = 2 + trial % 5;
    for (int i = 0; i < count; ++i) {
      Point x(static_cast<std::size_t>(cfg.dimension), 0.0);
      x[0] = 3.0 * i;
      if (i % 3 == 2)
        cfg.singularities.push_back({x, Shell{1.0 + 0.5 * (i % 2), i % 2 ? 2.5 : 0.5, 0.4, 0.9}});
      else
        cfg.singularities.push_back(point_at(x, std::round(coupling(rng) * 8.0) / 8.0, 0.9));
    }
    const DefectCertificate whole = essential_selfadjointness(cfg);
    DefectRecord sum;
    for (const auto& s : cfg.singularities) {
      SingularityConfig one = cfg;
      one.singularities = {s};
      sum += *essential_selfadjointness(one).total;
    }
    CHECK(*whole.total == sum);
  }
}

TEST_CASE("permutation, translation and localization invariance") {
  SingularityConfig cfg = points(3, {0, -3, 1, -0.5});
  cfg.singularities.push_back({{0, 4, 0}, Shell{1, 2, 0.3, 0.7}});
  const DefectCertificate base = essential_selfadjointness(cfg);

  SingularityConfig moved = cfg;
  std::reverse(moved.singularities.begin(), moved.singularities.end());
  for (auto& s : moved.singularities) {
    s.position[0] += 17.25;
    s.position[2] -= 3.5;
  }
  const DefectCertificate other = essential_selfadjointness(moved);
  auto a = table_defects(base), b = table_defects(other);
  std::reverse(b.begin(), b.end());
  CHECK(a == b);
  CHECK(base.total == other.total);

  const ValidatedConfig v = validate_config(cfg);
  for (double w : {v.epsilon / 2, v.epsilon / 7, v.epsilon / 50}) {
    const DefectCertificate c = aggregate_defect(localize(v, w));
    CHECK(table_defects(c) == a);
  }
}

TEST_CASE("threads do not change the certificate") {
  SingularityConfig cfg = points(3, {0, -3, 1, -0.5, 2, -1});
  cfg.singularities.push_back({{0, 4, 0}, Shell{1, 2, 0.3, 0.7}});
  AggregateOptions one, many;
  many.threads = 4;
  CHECK(to_json(essential_selfadjointness(cfg, one)) == to_json(essential_selfadjointness(cfg, many)));
}

TEST_CASE("channel truncation override") {
  AggregateOptions opt;
  opt.ell_max = 5;
  const DefectCertificate c = essential_selfadjointness(points(3, {0}), opt);
  REQUIRE(c.table[0].channels.has_value());
  CHECK(c.table[0].channels->entries.size() == 6);
  opt.ell_max = 0;
  CHECK_THROWS_AS(essential_selfadjointness(points(3, {0}), opt), Error);
}
