#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "defidx/grid_table.hpp"

namespace defidx {

/// Cell membership flags in row-major order (last axis fastest).
using CellSet = std::vector<bool>;

/// Piecewise-constant function on a regular grid with a domain mask E.
/// Values on cells outside E are carried but never consulted.
struct GridFunction {
  std::vector<double> lo;
  std::vector<double> spacing;
  std::vector<std::size_t> shape;
  std::vector<double> values;
  CellSet mask;
  double tolerance = 0.0;

  int dimension() const noexcept { return static_cast<int>(shape.size()); }
  std::size_t size() const noexcept;
};

/// Error(InvalidConfig) on mismatched sizes, non-positive spacing or a negative tolerance.
void validate(const GridFunction& f);

/// Masked table cells leave E; their stored value becomes 0.
GridFunction grid_function(const GridTable& table, double tolerance = 0.0);

/// Offsets k with sum k_i^2 <= 4: the ball of radius 2h in index space.
std::vector<std::vector<int>> support_neighbourhood(int n);

/// Cells x in E whose neighbourhood meets a cell of E with |f| > tolerance.
CellSet essential_support(const GridFunction& f);

/// Cells whose neighbourhood meets E.
CellSet plus_set(const CellSet& e, const std::vector<std::size_t>& shape);

std::vector<std::size_t> cells(const CellSet& s);

struct LawResult {
  std::string name;
  bool pass = true;
  std::vector<std::size_t> counterexamples;
};

struct LawReport {
  std::vector<LawResult> laws;
  bool pass() const noexcept;
};

/// Evaluates spt-2, spt-4, spt-5, spt-6 and spt-aaa on f and g (same grid and
/// mask). spt-4 compares supp(f) with the support of f altered off E; when f
/// and g agree on E it also compares supp(f) with supp(g). spt-aaa uses F intersected
/// with E, defaulting to {x in E : |f(x)| > tolerance}. The laws are exact at zero
/// tolerance; at positive tolerance spt-5 and spt-6 may legitimately fail.
LawReport check_support_laws(const GridFunction& f, const GridFunction& g,
                             const std::optional<CellSet>& f_set = std::nullopt);

}  // namespace defidx
