#include "defidx/grid_table.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "defidx/config_io.hpp"
#include "defidx/error.hpp"
#include "json.hpp"

namespace defidx {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::ParseError, "grid table: " + msg); }

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) fail(where + ": unknown key '" + it.key() + "'");
}

const json& at(const json& j, const char* key) {
  if (!j.contains(key)) fail(std::string("missing key '") + key + "'");
  return j.at(key);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where + ": expected a number");
  return j.get<double>();
}

std::vector<double> numbers(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where + ": expected an array");
  std::vector<double> out;
  for (const auto& x : j) out.push_back(number(x, where));
  return out;
}

}  // namespace

std::size_t GridTable::size() const noexcept {
  std::size_t s = shape.empty() ? 0 : 1;
  for (auto k : shape) s *= k;
  return s;
}

double GridTable::cell_volume() const noexcept {
  double v = 1.0;
  for (double h : spacing) v *= h;
  return v;
}

std::vector<std::size_t> GridTable::unflatten(std::size_t flat) const {
  std::vector<std::size_t> idx(shape.size());
  for (std::size_t a = shape.size(); a-- > 0;) {
    idx[a] = flat % shape[a];
    flat /= shape[a];
  }
  return idx;
}

std::size_t GridTable::flatten(std::span<const std::size_t> index) const {
  std::size_t flat = 0;
  for (std::size_t a = 0; a < shape.size(); ++a) flat = flat * shape[a] + index[a];
  return flat;
}

std::vector<double> GridTable::center(std::size_t flat) const {
  const auto idx = unflatten(flat);
  std::vector<double> x(shape.size());
  for (std::size_t a = 0; a < shape.size(); ++a) x[a] = lo[a] + (static_cast<double>(idx[a]) + 0.5) * spacing[a];
  return x;
}

void validate_grid_table(const GridTable& t) {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::InvalidConfig, "grid table: " + m); };
  if (t.dimension < 1) bad("dimension must be positive");
  const auto n = static_cast<std::size_t>(t.dimension);
  if (t.lo.size() != n || t.spacing.size() != n || t.shape.size() != n) bad("lo, spacing and shape must match dimension");
  for (std::size_t a = 0; a < n; ++a) {
    if (!std::isfinite(t.lo[a])) bad("lo must be finite");
    if (!(t.spacing[a] > 0.0) || !std::isfinite(t.spacing[a])) bad("spacing must be positive");
    if (t.shape[a] == 0) bad("shape entries must be positive");
  }
  if (t.values.size() != t.size()) bad("values has " + std::to_string(t.values.size()) + " entries, expected " +
                                       std::to_string(t.size()));
  for (const auto& v : t.values)
    if (v && !std::isfinite(*v)) bad("values must be finite or null");
  for (const auto& s : t.singular_sites) {
    if (s.position.size() != n) bad("singular site position has wrong dimension");
    if (!(s.radius > 0.0) || !std::isfinite(s.radius)) bad("singular site radius must be positive");
    if (!std::isfinite(s.coefficient) || !std::isfinite(s.exponent) || s.exponent < 0.0)
      bad("singular site coefficient and exponent must be finite, exponent >= 0");
  }
}

GridTable parse_grid_table(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(e.what());
  }
  only_keys(j, "root",
            {"format", "version", "dimension", "lo", "spacing", "shape", "values", "singular_sites", "quantity"});
  if (at(j, "format") != "defidx-grid-table") fail("format must be \"defidx-grid-table\"");
  if (!at(j, "version").is_number_integer() || at(j, "version").get<int>() != kGridTableVersion)
    fail("unsupported version");
  GridTable t;
  if (!at(j, "dimension").is_number_integer()) fail("dimension must be an integer");
  t.dimension = at(j, "dimension").get<int>();
  t.lo = numbers(at(j, "lo"), "lo");
  t.spacing = numbers(at(j, "spacing"), "spacing");
  const json& shape = at(j, "shape");
  if (!shape.is_array()) fail("shape: expected an array");
  for (const auto& k : shape) {
    if (!k.is_number_unsigned()) fail("shape: expected non-negative integers");
    t.shape.push_back(k.get<std::size_t>());
  }
  const json& values = at(j, "values");
  if (!values.is_array()) fail("values: expected an array");
  t.values.reserve(values.size());
  for (const auto& v : values) {
    if (v.is_null())
      t.values.emplace_back();
    else
      t.values.emplace_back(number(v, "values"));
  }
  if (j.contains("singular_sites")) {
    const json& sites = j.at("singular_sites");
    if (!sites.is_array()) fail("singular_sites: expected an array");
    for (const auto& s : sites) {
      only_keys(s, "singular_sites[]", {"position", "coefficient", "exponent", "radius"});
      t.singular_sites.push_back({numbers(at(s, "position"), "position"), number(at(s, "coefficient"), "coefficient"),
                                  number(at(s, "exponent"), "exponent"), number(at(s, "radius"), "radius")});
    }
  }
  if (j.contains("quantity")) {
    if (!j.at("quantity").is_string()) fail("quantity: expected a string");
    t.quantity = j.at("quantity").get<std::string>();
  }
  validate_grid_table(t);
  return t;
}

std::string serialize_grid_table(const GridTable& t) {
  json j;
  j["format"] = "defidx-grid-table";
  j["version"] = kGridTableVersion;
  j["dimension"] = t.dimension;
  j["lo"] = t.lo;
  j["spacing"] = t.spacing;
  j["shape"] = t.shape;
  json values = json::array();
  for (const auto& v : t.values) values.push_back(v ? json(*v) : json(nullptr));
  j["values"] = std::move(values);
  json sites = json::array();
  for (const auto& s : t.singular_sites)
    sites.push_back(
        {{"position", s.position}, {"coefficient", s.coefficient}, {"exponent", s.exponent}, {"radius", s.radius}});
  j["singular_sites"] = std::move(sites);
  j["quantity"] = t.quantity;
  return j.dump() + "\n";
}

GridTable load_grid_table(const std::filesystem::path& path) { return parse_grid_table(read_text_file(path)); }

void save_grid_table(const std::filesystem::path& path, const GridTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write " + path.string());
  out << serialize_grid_table(table);
}

GridTable sample_grid(const std::function<double(std::span<const double>)>& f, std::vector<double> lo,
                      std::vector<double> spacing, std::vector<std::size_t> shape, std::string quantity) {
  GridTable t;
  t.dimension = static_cast<int>(lo.size());
  t.lo = std::move(lo);
  t.spacing = std::move(spacing);
  t.shape = std::move(shape);
  t.quantity = std::move(quantity);
  t.values.resize(t.size());
  validate_grid_table(t);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double v = f(t.center(i));
    if (std::isfinite(v)) t.values[i] = v;
  }
  return t;
}

}  // namespace defidx
