#include "defidx/support.hpp"

#include <algorithm>
#include <cmath>

#include "defidx/error.hpp"

namespace defidx {
namespace {

constexpr std::size_t kMaxCounterexamples = 16;

// Calls visit(neighbour_flat) for every in-box cell of the neighbourhood of `flat`.
template <class Visit>
void for_each_neighbour(std::size_t flat, const std::vector<std::size_t>& shape,
                        const std::vector<std::vector<int>>& offsets, Visit&& visit) {
  const std::size_t n = shape.size();
  std::vector<std::int64_t> idx(n);
  for (std::size_t a = n, rest = flat; a-- > 0;) {
    idx[a] = static_cast<std::int64_t>(rest % shape[a]);
    rest /= shape[a];
  }
  for (const auto& k : offsets) {
    std::size_t nb = 0;
    bool inside = true;
    for (std::size_t a = 0; a < n && inside; ++a) {
      const std::int64_t j = idx[a] + k[a];
      inside = j >= 0 && j < static_cast<std::int64_t>(shape[a]);
      nb = nb * shape[a] + static_cast<std::size_t>(j);
    }
    if (inside && visit(nb)) return;
  }
}

// Cells of `domain` whose neighbourhood meets `target`.
CellSet dilate_within(const CellSet& target, const CellSet* domain, const std::vector<std::size_t>& shape) {
  const auto offsets = support_neighbourhood(static_cast<int>(shape.size()));
  CellSet out(target.size(), false);
  for (std::size_t x = 0; x < target.size(); ++x) {
    if (domain && !(*domain)[x]) continue;
    for_each_neighbour(x, shape, offsets, [&](std::size_t y) { return out[x] = target[y]; });
  }
  return out;
}

CellSet nonzero_in_domain(const GridFunction& f) {
  CellSet s(f.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = f.mask[i] && std::abs(f.values[i]) > f.tolerance;
  return s;
}

void require_common_grid(const GridFunction& f, const GridFunction& g) {
  if (f.shape != g.shape || f.lo != g.lo || f.spacing != g.spacing || f.mask != g.mask)
    throw Error(ErrorCode::InvalidConfig, "support laws need two functions on the same grid and domain");
}

LawResult compare(std::string name, const CellSet& lhs, const CellSet& rhs, bool equality) {
  LawResult r{std::move(name), true, {}};
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    if ((lhs[i] && !rhs[i]) || (equality && rhs[i] && !lhs[i])) {
      r.pass = false;
      if (r.counterexamples.size() < kMaxCounterexamples) r.counterexamples.push_back(i);
    }
  }
  return r;
}

}  // namespace

std::size_t GridFunction::size() const noexcept {
  std::size_t s = shape.empty() ? 0 : 1;
  for (auto k : shape) s *= k;
  return s;
}

void validate(const GridFunction& f) {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::InvalidConfig, "grid function: " + m); };
  const std::size_t n = f.shape.size();
  if (n == 0) bad("dimension must be positive");
  if (f.lo.size() != n || f.spacing.size() != n) bad("lo and spacing must match the shape");
  for (double h : f.spacing)
    if (!(h > 0.0)) bad("spacing must be positive");
  if (f.values.size() != f.size() || f.mask.size() != f.size()) bad("values and mask must match the shape");
  if (!(f.tolerance >= 0.0)) bad("tolerance must be non-negative");
}

GridFunction grid_function(const GridTable& table, double tolerance) {
  validate_grid_table(table);
  GridFunction f{table.lo, table.spacing, table.shape, {}, {}, tolerance};
  f.values.resize(table.size());
  f.mask.resize(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    f.mask[i] = table.values[i].has_value();
    f.values[i] = table.values[i].value_or(0.0);
  }
  validate(f);
  return f;
}

std::vector<std::vector<int>> support_neighbourhood(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> k(static_cast<std::size_t>(n), -2);
  while (true) {
    int r2 = 0;
    for (int x : k) r2 += x * x;
    if (r2 <= 4) out.push_back(k);
    std::size_t a = k.size();
    while (a-- > 0) {
      if (k[a] < 2) {
        ++k[a];
        break;
      }
      k[a] = -2;
    }
    if (a == static_cast<std::size_t>(-1)) return out;
  }
}

CellSet essential_support(const GridFunction& f) {
  validate(f);
  return dilate_within(nonzero_in_domain(f), &f.mask, f.shape);
}

CellSet plus_set(const CellSet& e, const std::vector<std::size_t>& shape) { return dilate_within(e, nullptr, shape); }

std::vector<std::size_t> cells(const CellSet& s) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i]) out.push_back(i);
  return out;
}

bool LawReport::pass() const noexcept {
  return std::all_of(laws.begin(), laws.end(), [](const LawResult& l) { return l.pass; });
}

LawReport check_support_laws(const GridFunction& f, const GridFunction& g, const std::optional<CellSet>& f_set) {
  validate(f);
  validate(g);
  require_common_grid(f, g);
  const double tol = std::max(f.tolerance, g.tolerance);
  const std::size_t size = f.size();
  const CellSet sf = essential_support(f);
  const CellSet sg = essential_support(g);
  LawReport report;

  // spt-2: f vanishes on E \ supp f.
  {
    CellSet bad(size);
    for (std::size_t i = 0; i < size; ++i) bad[i] = f.mask[i] && !sf[i] && std::abs(f.values[i]) > f.tolerance;
    report.laws.push_back(compare("spt-2", bad, CellSet(size, false), false));
  }

  // spt-4: altering f off E leaves the support unchanged; same for g when f = g on E.
  {
    GridFunction h = f;
    for (std::size_t i = 0; i < size; ++i)
      if (!h.mask[i]) h.values[i] = g.values[i] + 1.0;
    LawResult r = compare("spt-4", essential_support(h), sf, true);
    bool equal_on_e = true;
    for (std::size_t i = 0; i < size && equal_on_e; ++i)
      if (f.mask[i] && f.values[i] != g.values[i]) equal_on_e = false;
    if (equal_on_e && f.tolerance == g.tolerance) {
      const LawResult r2 = compare("spt-4", sf, sg, true);
      r.pass = r.pass && r2.pass;
      r.counterexamples.insert(r.counterexamples.end(), r2.counterexamples.begin(), r2.counterexamples.end());
    }
    report.laws.push_back(std::move(r));
  }

  GridFunction product = f, sum = f;
  product.tolerance = sum.tolerance = tol;
  for (std::size_t i = 0; i < size; ++i) {
    product.values[i] = f.values[i] * g.values[i];
    sum.values[i] = f.values[i] + g.values[i];
  }

  // spt-5: supp(fg) is inside supp f and supp g.
  {
    CellSet both(size);
    for (std::size_t i = 0; i < size; ++i) both[i] = sf[i] && sg[i];
    report.laws.push_back(compare("spt-5", essential_support(product), both, false));
  }

  // spt-6: supp(f + g) is inside supp f or supp g.
  {
    CellSet either(size);
    for (std::size_t i = 0; i < size; ++i) either[i] = sf[i] || sg[i];
    report.laws.push_back(compare("spt-6", essential_support(sum), either, false));
  }

  // spt-aaa: supp(chi_F) = F+ intersected with E.
  {
    CellSet F = f_set ? *f_set : nonzero_in_domain(f);
    if (F.size() != size) throw Error(ErrorCode::InvalidConfig, "F must have one flag per cell");
    for (std::size_t i = 0; i < size; ++i) F[i] = F[i] && f.mask[i];
    GridFunction chi = f;
    chi.tolerance = 0.0;
    for (std::size_t i = 0; i < size; ++i) chi.values[i] = F[i] ? 1.0 : 0.0;
    CellSet rhs = plus_set(F, f.shape);
    for (std::size_t i = 0; i < size; ++i) rhs[i] = rhs[i] && f.mask[i];
    report.laws.push_back(compare("spt-aaa", essential_support(chi), rhs, true));
  }
  return report;
}

}  // namespace defidx
