#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "defidx/bounds.hpp"
#include "defidx/channels.hpp"
#include "defidx/config_io.hpp"
#include "defidx/decouple.hpp"
#include "defidx/error.hpp"
#include "defidx/grid_table.hpp"
#include "defidx/partition.hpp"
#include "defidx/report.hpp"
#include "defidx/support.hpp"
#include "defidx/weyl.hpp"
#include "json.hpp"

#ifndef DEFIDX_VERSION
#define DEFIDX_VERSION "0.0.0"
#endif

namespace defidx::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Options {
  std::string config;
  std::string format = "json";
  std::optional<double> band;
  std::optional<std::uint64_t> lmax;
  unsigned threads = 1;
  // classify
  std::optional<double> q0;
  std::optional<int> dimension;
  std::optional<double> coupling;
  std::optional<std::uint64_t> ell;
  // partition
  std::string export_path;
};

struct Outcome {
  json report;
  int code = kOk;
  std::vector<std::string> warnings;
  std::string text;  // optional human-readable body; generated from `report` when empty
};

json real(double x) {
  if (std::isfinite(x)) return x;
  return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
}

json point(const std::vector<double>& p) {
  json a = json::array();
  for (double x : p) a.push_back(real(x));
  return a;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

WeylOptions weyl_options(const Options& o) {
  WeylOptions w;
  if (o.band) {
    if (!(*o.band > 0.0)) throw Error(ErrorCode::Usage, "--tolerance-band must be positive");
    w.band = *o.band;
  }
  return w;
}

int verdict_code(Verdict v) {
  switch (v) {
    case Verdict::EssentiallySelfAdjoint: return kOk;
    case Verdict::PositiveDefect:
    case Verdict::InfiniteDefect: return kFailed;
    case Verdict::Indeterminate: return kIndeterminate;
  }
  return kInvalid;
}

int class_code(EndpointClass c) {
  if (c.is_limit_point()) return kOk;
  if (c.is_limit_circle()) return kFailed;
  return kIndeterminate;
}

const std::string& require_config(const Options& o) {
  if (o.config.empty()) throw Error(ErrorCode::Usage, "--config is required");
  return o.config;
}

DefectCertificate run_pipeline(const Options& o) {
  AggregateOptions agg;
  agg.threads = std::max(1u, o.threads);
  agg.weyl = weyl_options(o);
  agg.ell_max = o.lmax;
  return essential_selfadjointness(load_config(require_config(o)), agg);
}

Outcome cmd_defect(const Options& o) {
  const DefectCertificate cert = run_pipeline(o);
  return {json::parse(to_json(cert)), verdict_code(cert.verdict), cert.warnings, to_text(cert)};
}

Outcome cmd_certify(const Options& o) {
  const DefectCertificate cert = run_pipeline(o);
  json r = {{"verdict", to_string(cert.verdict)}};
  std::ostringstream text;
  text << "verdict: " << to_string(cert.verdict) << "\n";
  return {std::move(r), verdict_code(cert.verdict), cert.warnings, text.str()};
}

json analysis_json(const WeylAnalysis& a) {
  return {{"class", short_name(a.classification)},
          {"nu_hat_first", real(a.first.nu_hat)},
          {"nu_hat_second", real(a.second.nu_hat)},
          {"combination_tested", a.combination_tested},
          {"steps", a.steps}};
}

Outcome cmd_classify(const Options& o) {
  const WeylOptions weyl = weyl_options(o);
  Outcome out;
  if (!o.q0 && !(o.dimension && o.coupling))
    throw Error(ErrorCode::Usage, "classify needs --q0, or --dimension and --coupling");
  if (o.q0 || o.ell) {
    double q0 = 0.0;
    json r;
    if (o.q0) {
      q0 = *o.q0;
    } else {
      q0 = effective_coupling(*o.dimension, *o.coupling, *o.ell);
      r["dimension"] = *o.dimension;
      r["coupling"] = real(*o.coupling);
      r["ell"] = *o.ell;
      r["multiplicity"] = harmonic_multiplicity(*o.dimension, *o.ell);
    }
    const EndpointClass closed = frobenius_classify_inverse_square(q0);
    const RadialProblem problem = inverse_square_problem(q0);
    const WeylAnalysis plus = weyl_analyze(problem, SpectralSign::Plus, weyl);
    const WeylAnalysis minus = weyl_analyze(problem, SpectralSign::Minus, weyl);
    r["q0"] = real(q0);
    r["closed_form"] = short_name(closed);
    r["numeric"] = {{"z_plus_i", analysis_json(plus)}, {"z_minus_i", analysis_json(minus)}};
    r["agree"] = plus.classification == closed;
    if (!(plus.classification == minus.classification))
      out.warnings.push_back("z = +i and z = -i classifications differ");
    if (!plus.classification.is_indeterminate() && !(plus.classification == closed))
      out.warnings.push_back("numeric class disagrees with the closed-form rule");
    out.code = class_code(plus.classification);
    out.report = std::move(r);
    return out;
  }
  std::uint64_t ell_max = 0;
  if (o.lmax) {
    ell_max = *o.lmax;
  } else {
    const PointDefect pd = point_defect_detailed(*o.dimension, *o.coupling);
    ell_max = pd.spectrum.first_limit_point.value_or(0);
    out.warnings = pd.warnings;
  }
  const ChannelSpectrum s = channel_spectrum(*o.dimension, *o.coupling, ell_max, true, weyl);
  out.report = json::parse(to_json(s));
  out.text = to_text(s);
  for (const auto& e : s.entries)
    if (e.numeric && !e.numeric->is_indeterminate() && !(*e.numeric == e.cls))
      out.warnings.push_back("channel ell=" + std::to_string(e.ell) + ": numeric class disagrees with the closed-form rule");
  out.code = s.first_limit_point == 0u ? kOk : kFailed;
  return out;
}

json verification_json(const VerificationReport& v) {
  json constants = json::array();
  for (const auto& c : v.constants)
    constants.push_back({{"epsilon", real(c.epsilon)}, {"c_hat", {real(c.c_hat[0]), real(c.c_hat[1]), real(c.c_hat[2])}}});
  return {{"pass", v.pass},
          {"range_violation", real(v.range_violation)},
          {"boundary_violation", real(v.boundary_violation)},
          {"scale_spread", real(v.scale_spread)},
          {"constants", std::move(constants)},
          {"samples", v.samples}};
}

Outcome cmd_partition(const Options& o) {
  const ValidatedConfig cfg = validate_config(load_config(require_config(o)));
  const CutoffFamily family = build_family(cfg);
  const int n = family.dimension();
  Outcome out;
  out.warnings = cfg.warnings;
  json members = json::array();
  for (const auto& m : family.members())
    members.push_back({{"index", m.index},
                       {"orbit", m.orbit},
                       {"center", point(m.center)},
                       {"delta", real(m.delta)},
                       {"phi_radius", real(m.phi_radius)},
                       {"phi_tilde_radius", real(m.phi_tilde_radius)}});
  const FamilyCheck check = family.certify();
  const PartitionConstants pc = partition_constants(family, n <= 3 ? 33 : 9);
  bool pass = check.phi_disjoint && check.phi_tilde_disjoint && check.containment_error <= 1e-8;

  json verification = json::array();
  if (n <= 3) {
    std::map<double, bool> seen;
    for (const auto& m : family.members()) {
      if (seen.count(m.delta)) continue;
      seen[m.delta] = true;
      const VerificationReport vp = verify_cutoff(m.phi);
      const VerificationReport vt = verify_cutoff(m.phi_tilde);
      pass = pass && vp.pass && vt.pass;
      verification.push_back({{"delta", real(m.delta)}, {"phi", verification_json(vp)}, {"phi_tilde", verification_json(vt)}});
    }
  } else {
    out.warnings.push_back("cutoff verification is sampled on a grid and is skipped for n > 3");
  }

  if (!o.export_path.empty()) {
    if (n > 3) throw Error(ErrorCode::Usage, "--export supports n <= 3");
    const FamilyMember& m = family.members().front();
    const double R = m.phi_tilde_radius * 1.25;
    const std::size_t cells = n == 3 ? 48 : 128;
    std::vector<double> lo(n), h(n, 2.0 * R / static_cast<double>(cells));
    for (int a = 0; a < n; ++a) lo[a] = m.center[a] - R;
    const CutoffFunction phi = m.phi;
    save_grid_table(o.export_path, sample_grid([&](std::span<const double> x) { return phi(x); }, lo, h,
                                               std::vector<std::size_t>(n, cells), "cutoff"));
  }

  out.report = {{"dimension", n},
                {"epsilon", real(family.epsilon())},
                {"members", std::move(members)},
                {"family_check",
                 {{"phi_disjoint", check.phi_disjoint},
                  {"phi_tilde_disjoint", check.phi_tilde_disjoint},
                  {"min_tilde_gap", real(check.min_tilde_gap)},
                  {"containment_error", real(check.containment_error)},
                  {"max_overlap", check.max_overlap},
                  {"samples", check.samples}}},
                {"constants", {{"e", real(pc.e)}, {"alpha", real(pc.alpha)}, {"beta", real(pc.beta)}, {"samples", pc.samples}}},
                {"verification", std::move(verification)},
                {"pass", pass}};
  out.code = pass ? kOk : kFailed;
  return out;
}

// Small strict readers for the bounds and support-check documents.
void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : keys) ok = ok || it.key() == k;
    if (!ok) throw Error(ErrorCode::ParseError, where + ": unknown key '" + it.key() + "'");
  }
}

double num(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw Error(ErrorCode::ParseError, where + ": '" + key + "' must be a number");
  return j.at(key).get<double>();
}

json read_document(const std::string& path, std::initializer_list<const char*> keys) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  only_keys(j, "root", keys);
  if (!j.contains("version") || !j.at("version").is_number_integer() || j.at("version").get<int>() != 1)
    throw Error(ErrorCode::ParseError, "root: 'version' must be 1");
  return j;
}

GridTable table_from(const json& j, const fs::path& base, const std::string& where) {
  if (j.is_string()) return load_grid_table(base / j.get<std::string>());
  if (j.is_object()) return parse_grid_table(j.dump());
  throw Error(ErrorCode::ParseError, where + ": expected a grid table object or a path");
}

Outcome cmd_bounds(const Options& o) {
  const json doc = read_document(require_config(o), {"version", "local", "hardy", "partition", "commutator", "lp_check"});
  const fs::path base = fs::path(o.config).parent_path();
  Outcome out;
  json r;
  if (doc.contains("local") == doc.contains("hardy"))
    throw Error(ErrorCode::ParseError, "root: exactly one of 'local' and 'hardy' is required");

  RelativeBound local;
  if (doc.contains("local")) {
    const json& l = doc.at("local");
    only_keys(l, "local", {"a", "b", "kind"});
    local = {num(l, "a", "local"), num(l, "b", "local"), BoundKind::Form};
    const std::string kind = l.value("kind", "form");
    if (kind == "operator")
      local.kind = BoundKind::Operator;
    else if (kind != "form")
      throw Error(ErrorCode::ParseError, "local: kind must be \"form\" or \"operator\"");
  } else {
    const json& h = doc.at("hardy");
    only_keys(h, "hardy", {"dimension", "gamma"});
    if (!h.contains("dimension") || !h.at("dimension").is_number_integer())
      throw Error(ErrorCode::ParseError, "hardy: 'dimension' must be an integer");
    const int n = h.at("dimension").get<int>();
    local = hardy_form_bound(n, num(h, "gamma", "hardy"));
    const HardyEvidence ev = hardy_quadrature_evidence(n, num(h, "gamma", "hardy"));
    r["hardy_evidence"] = {{"profiles", ev.profiles}, {"max_ratio", real(ev.max_ratio)}, {"bound", real(ev.bound)}};
  }
  validate(local);
  r["local"] = {{"a", real(local.a)}, {"b", real(local.b)}, {"kind", std::string(to_string(local.kind))}};

  if (doc.contains("partition") && doc.contains("commutator"))
    throw Error(ErrorCode::ParseError, "root: 'partition' and 'commutator' are exclusive");
  PartitionData p;
  if (doc.contains("partition")) {
    const json& j = doc.at("partition");
    only_keys(j, "partition", {"c", "d", "e"});
    p = {num(j, "c", "partition"), num(j, "d", "partition"), num(j, "e", "partition")};
  } else if (doc.contains("commutator")) {
    const json& j = doc.at("commutator");
    only_keys(j, "commutator", {"c", "e_tilde", "eps"});
    const double eps = num(j, "eps", "commutator"), e_tilde = num(j, "e_tilde", "commutator");
    const auto [d, e] = commutator_to_iii(e_tilde, eps);
    const auto [coef_t, coef_i] = operator_commutator_gate(eps, e_tilde);
    p = {num(j, "c", "commutator"), d, e};
    r["commutator"] = {{"d", real(d)}, {"e", real(e)}, {"operator_gate", {real(coef_t), real(coef_i)}}};
  }
  validate(p);
  r["partition"] = {{"c", real(p.c)}, {"d", real(p.d)}, {"e", real(p.e)}};

  const RelativeBound global =
      local.kind == BoundKind::Form ? morgan_form_bound(local, p) : morgan_operator_bound(local, p);
  const bool gate = defect_invariance_gate(global);
  r["global"] = {{"a", real(global.a)}, {"b", real(global.b)}, {"kind", std::string(to_string(global.kind))}};
  r["leading_below_one"] = gate;
  bool pass = gate;

  if (doc.contains("lp_check")) {
    const json& j = doc.at("lp_check");
    only_keys(j, "lp_check", {"table", "exponent", "cap", "stride"});
    if (!j.contains("table")) throw Error(ErrorCode::ParseError, "lp_check: 'table' is required");
    const GridTable table = table_from(j.at("table"), base, "lp_check.table");
    LpCheckOptions lo;
    lo.threads = std::max(1u, o.threads);
    if (j.contains("stride")) lo.stride = j.at("stride").get<std::size_t>();
    const LpCheckResult lp = loc_unif_Lp_check(table, num(j, "exponent", "lp_check"), num(j, "cap", "lp_check"), lo);
    r["lp_check"] = {{"exponent", real(lp.exponent)}, {"sup_norm", real(lp.sup_norm)}, {"argmax", point(lp.argmax)},
                     {"balls", lp.balls},             {"cap", real(lp.cap)},           {"pass", lp.pass}};
    pass = pass && lp.pass;
  }
  r["pass"] = pass;
  out.report = std::move(r);
  out.code = pass ? kOk : kFailed;
  return out;
}

Outcome cmd_support(const Options& o) {
  const json doc = read_document(require_config(o), {"version", "f", "g", "tolerance", "F"});
  const fs::path base = fs::path(o.config).parent_path();
  if (!doc.contains("f") || !doc.contains("g")) throw Error(ErrorCode::ParseError, "root: 'f' and 'g' are required");
  const double tol = doc.contains("tolerance") ? num(doc, "tolerance", "root") : 0.0;
  const GridFunction f = grid_function(table_from(doc.at("f"), base, "f"), tol);
  const GridFunction g = grid_function(table_from(doc.at("g"), base, "g"), tol);
  std::optional<CellSet> F;
  if (doc.contains("F")) {
    F = CellSet(f.size(), false);
    for (const auto& k : doc.at("F")) {
      if (!k.is_number_unsigned() || k.get<std::size_t>() >= f.size())
        throw Error(ErrorCode::ParseError, "F: expected flat cell indices inside the grid");
      (*F)[k.get<std::size_t>()] = true;
    }
  }
  const LawReport report = check_support_laws(f, g, F);
  GridTable geometry;
  geometry.dimension = f.dimension();
  geometry.lo = f.lo;
  geometry.spacing = f.spacing;
  geometry.shape = f.shape;
  json laws = json::object();
  for (const auto& law : report.laws) {
    json cex = json::array();
    for (auto c : law.counterexamples) cex.push_back({{"cell", c}, {"center", point(geometry.center(c))}});
    laws[law.name] = {{"pass", law.pass}, {"counterexamples", std::move(cex)}};
  }
  const auto count = [](const CellSet& s) { return cells(s).size(); };
  Outcome out;
  out.report = {{"dimension", f.dimension()},
                {"cells", f.size()},
                {"domain_cells", count(f.mask)},
                {"plus_set_cells", count(plus_set(f.mask, f.shape))},
                {"support_f_cells", count(essential_support(f))},
                {"support_g_cells", count(essential_support(g))},
                {"tolerance", real(tol)},
                {"laws", std::move(laws)},
                {"pass", report.pass()}};
  out.code = report.pass() ? kOk : kFailed;
  return out;
}

void flatten_text(const json& j, const std::string& prefix, std::ostream& os) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      flatten_text(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), os);
  } else if (j.is_array() && !j.empty() && (j.front().is_object() || j.front().is_array())) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten_text(j[i], prefix + "[" + std::to_string(i) + "]", os);
  } else {
    os << prefix << ": " << (j.is_string() ? j.get<std::string>() : j.dump()) << "\n";
  }
}

}  // namespace

std::string strip_timing(const std::string& report) {
  json j = json::parse(report);
  j.erase("timing");
  return j.dump(2) + "\n";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deficiency indices of Schroedinger operators with separated singularities", "defidx"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", DEFIDX_VERSION);
  Options o;
  app.add_option("--config", o.config, "Input document (JSON)");
  app.add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "text"}));
  app.add_option("--tolerance-band", o.band, "Indeterminate band of the Weyl classifier");
  app.add_option("--lmax", o.lmax, "Channel truncation override");
  app.add_option("--threads", o.threads, "Worker threads")->check(CLI::Range(1u, 1024u));

  std::map<std::string, Outcome (*)(const Options&)> handlers{
      {"defect", cmd_defect},       {"certify", cmd_certify}, {"classify", cmd_classify},
      {"partition", cmd_partition}, {"bounds", cmd_bounds},   {"support-check", cmd_support}};
  std::map<std::string, std::string> help{
      {"defect", "Full defect certificate for a configuration"},
      {"certify", "Essential self-adjointness verdict only"},
      {"classify", "Weyl classification of one inverse-square channel or a channel table"},
      {"partition", "Build and verify the localizing cutoff family"},
      {"bounds", "Relative-bound localization and Hardy arithmetic"},
      {"support-check", "Essential-support laws on grid functions"}};
  for (const auto& [name, _] : handlers) {
    CLI::App* sub = app.add_subcommand(name, help[name]);
    if (name == "classify") {
      sub->add_option("--q0", o.q0, "Coefficient of 1/r^2");
      sub->add_option("--dimension", o.dimension, "Ambient dimension");
      sub->add_option("--coupling", o.coupling, "Point coupling c");
      sub->add_option("--ell", o.ell, "Angular momentum channel");
    }
    if (name == "partition") sub->add_option("--export", o.export_path, "Write phi of the first member as a grid table");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalid;
  }
  const std::string subcommand = app.get_subcommands().front()->get_name();

  std::string input;
  try {
    input = o.config.empty() ? "" : read_text_file(o.config);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInvalid;
  }
  if (o.config.empty()) {
    for (const auto& a : args) input += a + "\n";
  }

  json report = {{"tool", "defidx"},
                 {"version", DEFIDX_VERSION},
                 {"subcommand", subcommand},
                 {"input_sha256", sha256_hex(input)}};
  const auto start = std::chrono::steady_clock::now();
  int code = kOk;
  std::string text;
  try {
    Outcome r = handlers.at(subcommand)(o);
    report["report"] = std::move(r.report);
    report["warnings"] = r.warnings;
    code = r.code;
    text = std::move(r.text);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    report["error"] = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
    report["warnings"] = json::array();
    code = kInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    report["error"] = {{"code", "InternalError"}, {"message", e.what()}};
    report["warnings"] = json::array();
    code = kInvalid;
  }
  report["exit_code"] = code;
  report["timing"] = {{"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};

  if (o.format == "json") {
    out << report.dump(2) << "\n";
  } else {
    out << "defidx " << DEFIDX_VERSION << " " << subcommand << "\n";
    if (report.contains("error")) {
      out << "error: " << report["error"]["message"].get<std::string>() << "\n";
    } else if (!text.empty()) {
      out << text;
      if (text.back() != '\n') out << "\n";
    } else {
      flatten_text(report["report"], "", out);
    }
    for (const auto& w : report["warnings"]) out << "warning: " << w.get<std::string>() << "\n";
  }
  return code;
}

}  // namespace defidx::cli
