#include "defidx/report.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace defidx {
namespace {

using nlohmann::json;

json real(double x) {
  if (std::isfinite(x)) return x;
  return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
}

json count(ExtNat x) {
  if (x.is_infinite()) return "inf";
  return x.value();
}

json defect_value(DefectValue d) {
  if (d.is_infinite()) return "inf";
  return d.as_double();
}

json record(const DefectRecord& r) {
  return {{"n_plus", count(r.n_plus)}, {"n_minus", count(r.n_minus)}, {"def", defect_value(r.def())}};
}

json point(const Point& p) {
  json a = json::array();
  for (double x : p) a.push_back(real(x));
  return a;
}

json spectrum(const ChannelSpectrum& s) {
  json entries = json::array();
  for (const auto& e : s.entries) {
    json j = {{"ell", e.ell}, {"q_eff", real(e.q_eff)}, {"multiplicity", e.multiplicity}, {"class", short_name(e.cls)}};
    if (e.numeric) j["numeric_class"] = short_name(*e.numeric);
    entries.push_back(std::move(j));
  }
  json j = {{"dimension", s.dimension}, {"coupling", real(s.coupling)}, {"channels", std::move(entries)}};
  j["first_limit_point"] = s.first_limit_point ? json(*s.first_limit_point) : json(nullptr);
  return j;
}

json certificate(const DefectCertificate& c) {
  json table = json::array();
  for (const auto& row : c.table) {
    json j = {{"index", row.index},           {"orbit", row.orbit},   {"position", point(row.position)},
              {"kind", row.kind},             {"notes", row.notes},   {"remainder_sup", real(row.remainder_sup)}};
    j["defect"] = row.record ? record(*row.record) : json("indeterminate");
    j["contribution"] = row.contribution ? record(*row.contribution) : json("indeterminate");
    if (row.channels) j["channels"] = spectrum(*row.channels);
    if (row.shell_inner) j["shell_inner"] = short_name(*row.shell_inner);
    if (row.shell_outer) j["shell_outer"] = short_name(*row.shell_outer);
    table.push_back(std::move(j));
  }
  json j = {{"dimension", c.dimension},
            {"verdict", to_string(c.verdict)},
            {"epsilon", real(c.epsilon)},
            {"remainder_bound", real(c.remainder_bound)},
            {"background_sup_norm", real(c.background_sup_norm)},
            {"singularities", std::move(table)},
            {"warnings", c.warnings},
            {"notes", c.notes}};
  j["total"] = c.total ? record(*c.total) : json("indeterminate");
  j["first_violation"] = c.first_violation ? json(*c.first_violation) : json(nullptr);
  return j;
}

std::string fmt(double x) {
  if (!std::isfinite(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

std::string fmt(const Point& p) {
  std::string s = "(";
  for (std::size_t i = 0; i < p.size(); ++i) s += (i ? ", " : "") + fmt(p[i]);
  return s + ")";
}

}  // namespace

std::string to_json(const DefectCertificate& c, int indent) { return certificate(c).dump(indent); }
std::string to_json(const ChannelSpectrum& s, int indent) { return spectrum(s).dump(indent); }

std::string to_text(const ChannelSpectrum& s) {
  std::ostringstream os;
  os << "n = " << s.dimension << ", c = " << fmt(s.coupling) << "\n";
  os << "  " << std::left << std::setw(6) << "ell" << std::setw(18) << "q_eff" << std::setw(12) << "mult"
     << "class\n";
  for (const auto& e : s.entries) {
    os << "  " << std::setw(6) << e.ell << std::setw(18) << fmt(e.q_eff) << std::setw(12) << e.multiplicity
       << short_name(e.cls);
    if (e.numeric) os << " (numeric " << short_name(*e.numeric) << ")";
    os << "\n";
  }
  return os.str();
}

std::string to_text(const DefectCertificate& c) {
  std::ostringstream os;
  os << "verdict: " << to_string(c.verdict) << "\n";
  os << "total def: " << (c.total ? c.total->def().to_string() : std::string("indeterminate")) << "\n";
  os << "dimension: " << c.dimension << ", epsilon: " << fmt(c.epsilon) << "\n";
  for (const auto& row : c.table) {
    os << (row.orbit ? "  orbit " : "  site ") << row.index << " " << row.kind << " at " << fmt(row.position)
       << ": def " << (row.record ? row.record->def().to_string() : std::string("indeterminate"));
    if (row.orbit && row.contribution) os << " per site, contributes " << row.contribution->def().to_string();
    os << "\n";
  }
  if (c.first_violation) os << "first violation: row " << *c.first_violation << "\n";
  for (const auto& w : c.warnings) os << "warning: " << w << "\n";
  for (const auto& n : c.notes) os << "note: " << n << "\n";
  return os.str();
}

}  // namespace defidx
