#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace defidx {

inline constexpr int kGridTableVersion = 1;

/// Declared singularity of a sampled potential: V(x) ~ coefficient * |x - position|^(-exponent)
/// inside the ball of the given radius.
struct SingularSite {
  std::vector<double> position;
  double coefficient = 0.0;
  double exponent = 0.0;
  double radius = 0.0;

  friend bool operator==(const SingularSite&, const SingularSite&) = default;
};

/// Cell-centred samples on a regular box. Cell k has centre lo + (k + 1/2) h
/// per axis; values are stored row-major with the last axis fastest. An empty
/// optional marks a masked cell.
struct GridTable {
  int dimension = 0;
  std::vector<double> lo;
  std::vector<double> spacing;
  std::vector<std::size_t> shape;
  std::vector<std::optional<double>> values;
  std::vector<SingularSite> singular_sites;
  std::string quantity = "potential";

  std::size_t size() const noexcept;
  double cell_volume() const noexcept;
  std::vector<double> center(std::size_t flat) const;
  std::vector<std::size_t> unflatten(std::size_t flat) const;
  std::size_t flatten(std::span<const std::size_t> index) const;

  friend bool operator==(const GridTable&, const GridTable&) = default;
};

/// Throws Error(InvalidConfig) on inconsistent shape, spacing or sites.
void validate_grid_table(const GridTable& table);

/// JSON document with "format": "defidx-grid-table" and "version": 1.
/// Unknown keys are rejected with Error(ParseError).
GridTable parse_grid_table(std::string_view text);
std::string serialize_grid_table(const GridTable& table);
GridTable load_grid_table(const std::filesystem::path& path);
void save_grid_table(const std::filesystem::path& path, const GridTable& table);

/// Samples f at every cell centre. Non-finite values are stored as masked.
GridTable sample_grid(const std::function<double(std::span<const double>)>& f, std::vector<double> lo,
                      std::vector<double> spacing, std::vector<std::size_t> shape,
                      std::string quantity = "potential");

}  // namespace defidx
