#pragma once

// Essential support and E+ by direct Euclidean distance between cell centres
// (radius 2h on a uniform grid), independent of the offset tables.

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

struct Grid {
  std::vector<std::size_t> shape;

  std::size_t size() const {
    std::size_t s = 1;
    for (auto k : shape) s *= k;
    return s;
  }
  std::vector<double> coords(std::size_t flat) const {
    std::vector<double> c(shape.size());
    for (std::size_t a = shape.size(); a-- > 0;) {
      c[a] = static_cast<double>(flat % shape[a]);
      flat /= shape[a];
    }
    return c;
  }
  bool close(std::size_t x, std::size_t y) const {
    const auto cx = coords(x), cy = coords(y);
    double d2 = 0.0;
    for (std::size_t a = 0; a < cx.size(); ++a) d2 += (cx[a] - cy[a]) * (cx[a] - cy[a]);
    return d2 <= 4.0 + 1e-12;
  }
};

inline std::vector<bool> support(const Grid& g, const std::vector<double>& f, const std::vector<bool>& mask, double tol) {
  std::vector<bool> out(g.size(), false);
  for (std::size_t x = 0; x < g.size(); ++x) {
    if (!mask[x]) continue;
    for (std::size_t y = 0; y < g.size() && !out[x]; ++y)
      if (mask[y] && std::abs(f[y]) > tol && g.close(x, y)) out[x] = true;
  }
  return out;
}

inline std::vector<bool> plus(const Grid& g, const std::vector<bool>& e) {
  std::vector<bool> out(g.size(), false);
  for (std::size_t x = 0; x < g.size(); ++x)
    for (std::size_t y = 0; y < g.size() && !out[x]; ++y)
      if (e[y] && g.close(x, y)) out[x] = true;
  return out;
}

}  // namespace oracle
