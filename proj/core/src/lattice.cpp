#include "defidx/lattice.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "defidx/error.hpp"
#include "defidx/numeric.hpp"

namespace defidx {

std::uint64_t IndexBox::count() const noexcept {
  std::uint64_t c = 1;
  for (std::size_t i = 0; i < lo.size(); ++i) c *= hi[i] >= lo[i] ? static_cast<std::uint64_t>(hi[i] - lo[i] + 1) : 0;
  return c;
}

Lattice::Lattice(std::vector<Point> basis, Point origin) : basis_(std::move(basis)), origin_(std::move(origin)) {
  const std::size_t n = origin_.size();
  const std::size_t d = basis_.size();
  if (d == 0) throw Error(ErrorCode::InvalidConfig, "lattice basis is empty");
  if (d > n) throw Error(ErrorCode::InvalidConfig, "lattice has more basis vectors than dimensions");
  for (const auto& b : basis_)
    if (b.size() != n) throw Error(ErrorCode::InvalidConfig, "lattice basis vector has wrong dimension");

  Eigen::MatrixXd B(n, d);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = 0; i < n; ++i) B(i, j) = basis_[j][i];
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(B);
  qr.setThreshold(1e-12);
  if (qr.rank() < static_cast<Eigen::Index>(d))
    throw Error(ErrorCode::InvalidConfig, "lattice basis vectors are linearly dependent");

  const Eigen::MatrixXd G = B.transpose() * B;
  const Eigen::MatrixXd Ginv = G.inverse();
  gram_inverse_.resize(d * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) gram_inverse_[i * d + j] = Ginv(i, j);
}

Point Lattice::site(std::span<const std::int64_t> k) const {
  Point x = origin_;
  for (std::size_t j = 0; j < basis_.size(); ++j)
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += static_cast<double>(k[j]) * basis_[j][i];
  return x;
}

std::pair<std::vector<double>, double> Lattice::project(std::span<const double> p) const {
  const std::size_t n = origin_.size();
  const std::size_t d = basis_.size();
  std::vector<double> rhs(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    CompensatedSum s;
    for (std::size_t i = 0; i < n; ++i) s += basis_[j][i] * (p[i] - origin_[i]);
    rhs[j] = s.value();
  }
  std::vector<double> t(d, 0.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) t[i] += gram_inverse_[i * d + j] * rhs[j];
  CompensatedSum perp;
  for (std::size_t i = 0; i < n; ++i) {
    double r = p[i] - origin_[i];
    for (std::size_t j = 0; j < d; ++j) r -= t[j] * basis_[j][i];
    perp += r * r;
  }
  return {t, std::max(0.0, perp.value())};
}

void Lattice::for_each_site_near(std::span<const double> p, double radius,
                                 const std::function<void(std::span<const std::int64_t>, const Point&)>& visit,
                                 const std::optional<IndexBox>& box) const {
  const std::size_t d = basis_.size();
  const auto [t, perp2] = project(p);
  const double in_span2 = radius * radius - perp2;
  if (in_span2 < 0.0) return;
  const double in_span = std::sqrt(in_span2);

  std::vector<std::int64_t> lo(d), hi(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double w = in_span * std::sqrt(gram_inverse_[i * d + i]) + 1e-9;
    lo[i] = static_cast<std::int64_t>(std::ceil(t[i] - w));
    hi[i] = static_cast<std::int64_t>(std::floor(t[i] + w));
    if (box) {
      lo[i] = std::max(lo[i], box->lo[i]);
      hi[i] = std::min(hi[i], box->hi[i]);
    }
    if (lo[i] > hi[i]) return;
  }
  std::vector<std::int64_t> k = lo;
  for (;;) {
    const Point x = site(k);
    if (distance(x, p) <= radius) visit(k, x);
    std::size_t i = 0;
    while (i < d && ++k[i] > hi[i]) {
      k[i] = lo[i];
      ++i;
    }
    if (i == d) break;
  }
}

double Lattice::minimal_distance() const {
  double bound = std::numeric_limits<double>::infinity();
  for (const auto& b : basis_) bound = std::min(bound, norm(b));
  double best = bound;
  const Point zero = origin_;
  for_each_site_near(zero, bound, [&](std::span<const std::int64_t> k, const Point& x) {
    if (std::all_of(k.begin(), k.end(), [](std::int64_t v) { return v == 0; })) return;
    best = std::min(best, distance(x, zero));
  });
  return best;
}

double Lattice::distance_to(std::span<const double> p) const {
  const auto [t, perp2] = project(p);
  std::vector<std::int64_t> rounded(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) rounded[i] = std::llround(t[i]);
  double best = distance(site(rounded), p);
  for_each_site_near(p, best, [&](std::span<const std::int64_t>, const Point& x) {
    best = std::min(best, distance(x, p));
  });
  (void)perp2;
  return best;
}

std::vector<Point> Lattice::sites(const IndexBox& box) const {
  std::vector<Point> out;
  const std::size_t d = basis_.size();
  if (box.lo.size() != d || box.hi.size() != d)
    throw Error(ErrorCode::InvalidConfig, "lattice region rank does not match basis");
  if (box.count() == 0) return out;
  std::vector<std::int64_t> k = box.lo;
  for (;;) {
    out.push_back(site(k));
    std::size_t i = d;
    // last coefficient varies fastest: lexicographic order
    while (i > 0) {
      --i;
      if (++k[i] <= box.hi[i]) break;
      k[i] = box.lo[i];
      if (i == 0) return out;
    }
  }
}

bool Lattice::same_basis(const Lattice& other) const noexcept { return basis_ == other.basis_; }

}  // namespace defidx
