#include "defidx/config_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "defidx/error.hpp"
#include "json.hpp"

namespace defidx {
namespace {

using nlohmann::json;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
  throw Error(ErrorCode::ParseError, where + ": " + msg);
}

void require_object(const json& j, const std::string& where, std::initializer_list<const char*> allowed,
                    std::initializer_list<const char*> required) {
  if (!j.is_object()) fail(where, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) fail(where, "unknown key '" + it.key() + "'");
  for (const char* key : required)
    if (!j.contains(key)) fail(where, std::string("missing key '") + key + "'");
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

std::int64_t integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<std::int64_t>();
}

std::vector<double> numbers(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

SampledProfile parse_samples(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of [radius, value] pairs");
  SampledProfile s;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto pair = numbers(j[i], where + "[" + std::to_string(i) + "]");
    if (pair.size() != 2) fail(where, "each sample must be [radius, value]");
    s.radii.push_back(pair[0]);
    s.values.push_back(pair[1]);
  }
  return s;
}

json samples_json(const SampledProfile& s) {
  json arr = json::array();
  for (std::size_t i = 0; i < s.radii.size(); ++i) arr.push_back({s.radii[i], s.values[i]});
  return arr;
}

RadialProfile parse_profile(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("type")) fail(where, "profile needs a 'type'");
  const auto type = j["type"].get<std::string>();
  if (type == "power") {
    require_object(j, where, {"type", "coefficient", "exponent"}, {"coefficient", "exponent"});
    return PowerLawProfile{number(j["coefficient"], where + ".coefficient"), number(j["exponent"], where + ".exponent")};
  }
  if (type == "samples") {
    require_object(j, where, {"type", "samples"}, {"samples"});
    return parse_samples(j["samples"], where + ".samples");
  }
  fail(where, "unknown profile type '" + type + "'");
}

json profile_json(const RadialProfile& p) {
  return std::visit(overloaded{
                        [](const PowerLawProfile& q) {
                          return json{{"type", "power"}, {"coefficient", q.coefficient}, {"exponent", q.exponent}};
                        },
                        [](const SampledProfile& s) { return json{{"type", "samples"}, {"samples", samples_json(s)}}; },
                    },
                    p);
}

PotentialSpec parse_potential(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("type")) fail(where, "potential needs a 'type'");
  const auto type = j["type"].get<std::string>();
  if (type == "inverse_square") {
    require_object(j, where, {"type", "coupling", "cutoff_radius", "perturbation"}, {"coupling", "cutoff_radius"});
    InverseSquarePoint p{number(j["coupling"], where + ".coupling"), number(j["cutoff_radius"], where + ".cutoff_radius"),
                         std::nullopt};
    if (j.contains("perturbation")) p.perturbation = parse_profile(j["perturbation"], where + ".perturbation");
    return p;
  }
  if (type == "shell") {
    require_object(j, where, {"type", "beta", "gamma", "shell_radius", "cutoff_radius"},
                   {"beta", "gamma", "shell_radius", "cutoff_radius"});
    return Shell{number(j["beta"], where + ".beta"), number(j["gamma"], where + ".gamma"),
                 number(j["shell_radius"], where + ".shell_radius"), number(j["cutoff_radius"], where + ".cutoff_radius")};
  }
  if (type == "custom_radial") {
    require_object(j, where, {"type", "leading_coupling", "cutoff_radius", "samples"},
                   {"leading_coupling", "cutoff_radius", "samples"});
    return CustomRadial{number(j["leading_coupling"], where + ".leading_coupling"),
                        number(j["cutoff_radius"], where + ".cutoff_radius"),
                        parse_samples(j["samples"], where + ".samples")};
  }
  if (type == "dipole") {
    require_object(j, where, {"type", "moment", "cutoff_radius"}, {"moment", "cutoff_radius"});
    return Dipole{numbers(j["moment"], where + ".moment"), number(j["cutoff_radius"], where + ".cutoff_radius")};
  }
  throw Error(ErrorCode::UnsupportedPotential,
              where + ": potential type '" + type + "' is not supported (points and spheres only)");
}

json potential_json(const PotentialSpec& spec) {
  return std::visit(overloaded{
                        [](const InverseSquarePoint& p) {
                          json j{{"type", "inverse_square"}, {"coupling", p.coupling}, {"cutoff_radius", p.cutoff_radius}};
                          if (p.perturbation) j["perturbation"] = profile_json(*p.perturbation);
                          return j;
                        },
                        [](const Shell& s) {
                          return json{{"type", "shell"},
                                      {"beta", s.beta},
                                      {"gamma", s.gamma},
                                      {"shell_radius", s.shell_radius},
                                      {"cutoff_radius", s.cutoff_radius}};
                        },
                        [](const CustomRadial& c) {
                          return json{{"type", "custom_radial"},
                                      {"leading_coupling", c.leading_coupling},
                                      {"cutoff_radius", c.cutoff_radius},
                                      {"samples", samples_json(c.samples)}};
                        },
                        [](const Dipole& d) {
                          return json{{"type", "dipole"}, {"moment", d.moment}, {"cutoff_radius", d.cutoff_radius}};
                        },
                    },
                    spec);
}

}  // namespace

SingularityConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  try {
    require_object(doc, "config",
                   {"version", "dimension", "singularities", "lattices", "background", "declared_epsilon"},
                   {"version", "dimension"});
    if (integer(doc["version"], "version") != kConfigVersion)
      throw Error(ErrorCode::InvalidConfig, "unsupported config version " + doc["version"].dump());

    SingularityConfig cfg;
    cfg.dimension = static_cast<int>(integer(doc["dimension"], "dimension"));

    if (doc.contains("singularities")) {
      const auto& arr = doc["singularities"];
      if (!arr.is_array()) fail("singularities", "expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string where = "singularities[" + std::to_string(i) + "]";
        require_object(arr[i], where, {"position", "potential"}, {"position", "potential"});
        cfg.singularities.push_back(
            {numbers(arr[i]["position"], where + ".position"), parse_potential(arr[i]["potential"], where + ".potential")});
      }
    }
    if (doc.contains("lattices")) {
      const auto& arr = doc["lattices"];
      if (!arr.is_array()) fail("lattices", "expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string where = "lattices[" + std::to_string(i) + "]";
        const auto& l = arr[i];
        require_object(l, where, {"basis", "origin", "region", "potential"}, {"basis", "region", "potential"});
        LatticeSpec spec;
        if (!l["basis"].is_array()) fail(where + ".basis", "expected an array of vectors");
        for (std::size_t b = 0; b < l["basis"].size(); ++b)
          spec.basis.push_back(numbers(l["basis"][b], where + ".basis[" + std::to_string(b) + "]"));
        spec.origin = l.contains("origin") ? numbers(l["origin"], where + ".origin")
                                           : Point(static_cast<std::size_t>(std::max(cfg.dimension, 0)), 0.0);
        const auto& region = l["region"];
        if (region.is_string()) {
          if (region.get<std::string>() != "infinite") fail(where + ".region", "expected \"infinite\" or a box");
        } else {
          require_object(region, where + ".region", {"min", "max"}, {"min", "max"});
          IndexBox box;
          for (const auto& v : region["min"]) box.lo.push_back(integer(v, where + ".region.min"));
          for (const auto& v : region["max"]) box.hi.push_back(integer(v, where + ".region.max"));
          spec.region = box;
        }
        spec.potential = parse_potential(l["potential"], where + ".potential");
        cfg.lattices.push_back(std::move(spec));
      }
    }
    if (doc.contains("background")) {
      require_object(doc["background"], "background", {"sup_norm"}, {"sup_norm"});
      cfg.background_sup_norm = number(doc["background"]["sup_norm"], "background.sup_norm");
    }
    if (doc.contains("declared_epsilon")) cfg.declared_epsilon = number(doc["declared_epsilon"], "declared_epsilon");
    return cfg;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

std::string serialize_config(const SingularityConfig& cfg) {
  json doc;
  doc["version"] = kConfigVersion;
  doc["dimension"] = cfg.dimension;
  json sing = json::array();
  for (const auto& s : cfg.singularities) sing.push_back({{"position", s.position}, {"potential", potential_json(s.potential)}});
  doc["singularities"] = sing;
  json lat = json::array();
  for (const auto& l : cfg.lattices) {
    json j{{"basis", l.basis}, {"origin", l.origin}, {"potential", potential_json(l.potential)}};
    if (l.region)
      j["region"] = {{"min", l.region->lo}, {"max", l.region->hi}};
    else
      j["region"] = "infinite";
    lat.push_back(std::move(j));
  }
  doc["lattices"] = lat;
  doc["background"] = {{"sup_norm", cfg.background_sup_norm}};
  if (cfg.declared_epsilon) doc["declared_epsilon"] = *cfg.declared_epsilon;
  return doc.dump(2) + "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SingularityConfig load_config(const std::filesystem::path& path) { return parse_config(read_text_file(path)); }

}  // namespace defidx
