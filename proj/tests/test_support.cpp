#include <random>

#include "doctest.h"
#include "defidx/error.hpp"
#include "defidx/support.hpp"
#include "oracles/support.hpp"

using namespace defidx;

namespace {

GridFunction blank(std::vector<std::size_t> shape) {
  GridFunction f;
  f.shape = shape;
  f.lo.assign(shape.size(), 0.0);
  f.spacing.assign(shape.size(), 1.0 / static_cast<double>(shape[0]));
  f.values.assign(f.size(), 0.0);
  f.mask.assign(f.size(), true);
  return f;
}

GridFunction random_function(std::mt19937_64& rng, std::vector<std::size_t> shape, const CellSet& mask) {
  GridFunction f = blank(shape);
  f.mask = mask;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::bernoulli_distribution zero(0.85);
  for (auto& v : f.values) v = zero(rng) ? 0.0 : u(rng);
  return f;
}

CellSet random_mask(std::mt19937_64& rng, std::size_t size) {
  std::bernoulli_distribution keep(0.8);
  CellSet m(size);
  for (std::size_t i = 0; i < size; ++i) m[i] = keep(rng);
  return m;
}

}  // namespace

TEST_CASE("neighbourhood offsets") {
  CHECK(support_neighbourhood(1).size() == 5);
  CHECK(support_neighbourhood(2).size() == 13);
}

TEST_CASE("indicator of the left half") {
  GridFunction f = blank({10});
  for (int i = 0; i < 5; ++i) f.values[i] = 1.0;
  CHECK(cells(essential_support(f)) == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6});
}

TEST_CASE("zero function and empty domain") {
  CHECK(cells(essential_support(blank({8, 8}))).empty());
  CHECK(cells(plus_set(CellSet(16, false), {4, 4})).empty());
  const CellSet full(16, true);
  CHECK(plus_set(full, {4, 4}) == full);
}

TEST_CASE("single cell support is its closed neighbourhood") {
  GridFunction f = blank({7, 7});
  f.values[3 * 7 + 3] = 2.0;
  const CellSet s = essential_support(f);
  CHECK(cells(s).size() == 13);
  CellSet e(49, false);
  e[3 * 7 + 3] = true;
  CHECK(plus_set(e, f.shape) == s);
  f.mask[3 * 7 + 4] = false;
  CHECK(cells(essential_support(f)).size() == 12);
}

TEST_CASE("agreement with direct distance computation") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    const std::vector<std::size_t> shape = trial % 2 ? std::vector<std::size_t>{9, 7} : std::vector<std::size_t>{30};
    const oracle::Grid g{shape};
    const CellSet mask = random_mask(rng, g.size());
    GridFunction f = random_function(rng, shape, mask);
    f.tolerance = trial % 3 == 0 ? 0.5 : 0.0;
    CHECK(essential_support(f) == oracle::support(g, f.values, mask, f.tolerance));
    CHECK(plus_set(mask, shape) == oracle::plus(g, mask));
  }
}

TEST_CASE("support lies in the domain and its plus set") {
  std::mt19937_64 rng(43);
  const std::vector<std::size_t> shape{12, 12};
  const CellSet mask = random_mask(rng, 144);
  const GridFunction f = random_function(rng, shape, mask);
  const CellSet s = essential_support(f), plus = plus_set(mask, shape);
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i]) {
      CHECK(mask[i]);
      CHECK(plus[i]);
    }
}

TEST_CASE("raising the tolerance shrinks the support") {
  std::mt19937_64 rng(47);
  GridFunction f = random_function(rng, {20, 20}, CellSet(400, true));
  CellSet prev = essential_support(f);
  for (double tol : {0.1, 0.3, 0.6, 0.9, 1.0}) {
    f.tolerance = tol;
    const CellSet s = essential_support(f);
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s[i]) CHECK(prev[i]);
    prev = s;
  }
  CHECK(cells(prev).empty());
}

TEST_CASE("support laws on random 64x64 grids") {
  std::mt19937_64 rng(53);
  const CellSet mask = random_mask(rng, 64 * 64);
  const GridFunction f = random_function(rng, {64, 64}, mask);
  const GridFunction g = random_function(rng, {64, 64}, mask);
  const LawReport r = check_support_laws(f, g);
  CHECK(r.pass());
  CHECK(r.laws.size() == 5);
}

TEST_CASE("values on masked cells do not matter") {
  std::mt19937_64 rng(59);
  const CellSet mask = random_mask(rng, 256);
  const GridFunction f = random_function(rng, {16, 16}, mask);
  GridFunction g = f;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!mask[i]) g.values[i] = 5.0;
  CHECK(essential_support(f) == essential_support(g));
  CHECK(check_support_laws(f, g).pass());
}

TEST_CASE("indicator of the left half of E") {
  std::mt19937_64 rng(61);
  const CellSet mask = random_mask(rng, 100);
  GridFunction f = random_function(rng, {10, 10}, mask);
  CellSet left(100, false);
  for (std::size_t i = 0; i < 100; ++i) left[i] = mask[i] && (i / 10) < 5;
  const LawReport r = check_support_laws(f, f, left);
  CHECK(r.pass());
}

TEST_CASE("randomized laws in one and two dimensions") {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<std::size_t> shape = trial % 2 ? std::vector<std::size_t>{24} : std::vector<std::size_t>{8, 8};
    std::size_t size = 1;
    for (auto k : shape) size *= k;
    const CellSet mask = random_mask(rng, size);
    const LawReport r = check_support_laws(random_function(rng, shape, mask), random_function(rng, shape, mask));
    CHECK(r.pass());
  }
}

TEST_CASE("invalid grid functions") {
  GridFunction f = blank({4});
  f.values.pop_back();
  CHECK_THROWS_AS(validate(f), Error);
  f = blank({4});
  f.tolerance = -1;
  CHECK_THROWS_AS(validate(f), Error);
  f = blank({4});
  GridFunction g = blank({5});
  CHECK_THROWS_AS(check_support_laws(f, g), Error);
}
