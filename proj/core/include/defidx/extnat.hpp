#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>

namespace defidx {

/// A natural number or +infinity. Addition saturates at infinity; all
/// comparisons treat infinity as larger than every finite value.
class ExtNat {
 public:
  constexpr ExtNat() noexcept = default;
  constexpr ExtNat(std::uint64_t value) noexcept : value_(value) {}  // NOLINT: implicit by intent

  static constexpr ExtNat infinity() noexcept {
    ExtNat n;
    n.infinite_ = true;
    return n;
  }

  constexpr bool is_infinite() const noexcept { return infinite_; }
  constexpr bool is_finite() const noexcept { return !infinite_; }

  /// Finite value; throws std::logic_error on infinity.
  std::uint64_t value() const;

  friend constexpr ExtNat operator+(ExtNat a, ExtNat b) noexcept {
    if (a.infinite_ || b.infinite_) return infinity();
    return ExtNat(a.value_ + b.value_);
  }
  constexpr ExtNat& operator+=(ExtNat other) noexcept { return *this = *this + other; }

  friend constexpr bool operator==(ExtNat a, ExtNat b) noexcept {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }
  friend constexpr std::strong_ordering operator<=>(ExtNat a, ExtNat b) noexcept {
    if (a.infinite_ || b.infinite_) return a.infinite_ <=> b.infinite_;
    return a.value_ <=> b.value_;
  }

  /// "inf" or the decimal value.
  std::string to_string() const;

 private:
  std::uint64_t value_ = 0;
  bool infinite_ = false;
};

/// ExtNat multiplied by a natural count (count * infinity is infinity unless count is 0).
ExtNat scaled(ExtNat value, std::uint64_t count) noexcept;

/// The half-sum (n+ + n-)/2. Stored as twice its value so that half-integers
/// stay exact.
class DefectValue {
 public:
  constexpr DefectValue() noexcept = default;
  explicit constexpr DefectValue(ExtNat twice) noexcept : twice_(twice) {}

  constexpr bool is_infinite() const noexcept { return twice_.is_infinite(); }
  constexpr bool is_zero() const noexcept { return twice_ == ExtNat(0); }
  constexpr ExtNat twice() const noexcept { return twice_; }
  /// Value as a double (infinity for the infinite defect).
  double as_double() const noexcept;
  /// "inf", "3" or "1.5".
  std::string to_string() const;

  friend constexpr bool operator==(DefectValue, DefectValue) noexcept = default;

 private:
  ExtNat twice_;
};

/// Deficiency indices (n+, n-) of a closed symmetric operator.
struct DefectRecord {
  ExtNat n_plus;
  ExtNat n_minus;

  DefectValue def() const noexcept { return DefectValue(n_plus + n_minus); }
  bool symmetric() const noexcept { return n_plus == n_minus; }

  friend DefectRecord operator+(const DefectRecord& a, const DefectRecord& b) noexcept {
    return {a.n_plus + b.n_plus, a.n_minus + b.n_minus};
  }
  DefectRecord& operator+=(const DefectRecord& other) noexcept { return *this = *this + other; }
  friend bool operator==(const DefectRecord&, const DefectRecord&) noexcept = default;
};

DefectRecord make_defect(ExtNat n_plus, ExtNat n_minus) noexcept;

/// Indices left after restricting to an extension parametrized by an
/// m-dimensional partial isometry: (n+ - m, n- - m). Throws
/// ErrorCode::DimensionTooLarge when m exceeds a finite index.
DefectRecord restrict_extension(const DefectRecord& record, std::uint64_t m);

}  // namespace defidx
