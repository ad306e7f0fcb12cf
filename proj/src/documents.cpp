#include "dacrank/documents.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "dacrank/errors.hpp"
#include "dacrank/pipeline.hpp"
#include "overloaded.hpp"

namespace dacrank {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

const json& field(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw ValidationError(path + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw ValidationError(path + "." + key + ": missing field");
  return *it;
}

double number_field(const json& j, const char* key, const std::string& path) {
  return number_from_json(field(j, key, path), path + "." + key);
}

std::string string_field(const json& j, const char* key, const std::string& path) {
  const auto& v = field(j, key, path);
  if (!v.is_string()) throw ValidationError(path + "." + key + ": expected a string");
  return v.get<std::string>();
}

bool bool_field(const json& j, const char* key, const std::string& path) {
  const auto& v = field(j, key, path);
  if (!v.is_boolean()) throw ValidationError(path + "." + key + ": expected a boolean");
  return v.get<bool>();
}

std::uint64_t uint_field(const json& j, const char* key, const std::string& path) {
  const auto& v = field(j, key, path);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    throw ValidationError(path + "." + key + ": expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::vector<std::string> string_list(const json& j, const std::string& path) {
  if (!j.is_array()) throw ValidationError(path + ": expected an array");
  std::vector<std::string> out;
  for (const auto& s : j) {
    if (!s.is_string()) throw ValidationError(path + ": expected strings");
    out.push_back(s.get<std::string>());
  }
  return out;
}

std::string method_name(PosteriorMethod m) { return m == PosteriorMethod::mcmc ? "mcmc" : "analytic"; }

std::string fixed(double v, int precision) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

}  // namespace

DistributionSpec parse_inline_spec(std::string_view text) {
  text = trim(text);
  const auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw ValidationError("spec '" + std::string(text) + "': expected family:p1,p2[,p3]");
  const auto family = trim(text.substr(0, colon));
  std::vector<double> params;
  std::string_view rest = text.substr(colon + 1);
  while (true) {
    const auto comma = rest.find(',');
    double v = 0.0;
    if (!parse_double(rest.substr(0, comma), v))
      throw ValidationError("spec '" + std::string(text) + "': malformed number");
    params.push_back(v);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  auto need = [&](std::size_t k) {
    if (params.size() != k)
      throw ValidationError("spec '" + std::string(text) + "': " + std::string(family) + " takes " +
                            std::to_string(k) + " parameters");
  };
  DistributionSpec spec;
  if (family == "normal") {
    need(2);
    spec = Normal{params[0], params[1]};
  } else if (family == "uniform") {
    need(2);
    spec = Uniform{params[0], params[1]};
  } else if (family == "skew_normal") {
    need(3);
    spec = SkewNormal{params[0], params[1], params[2]};
  } else {
    throw ValidationError("spec '" + std::string(text) + "': unknown family '" + std::string(family) + "'");
  }
  validate(spec);
  return spec;
}

json number_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return v;
}

double number_from_json(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw ValidationError(path + ": expected a number");
}

json spec_to_json(const DistributionSpec& spec) {
  json params = std::visit(overloaded{
                               [](const Normal& d) { return json{{"mean", d.mean}, {"sd", d.sd}}; },
                               [](const Uniform& d) { return json{{"lower", d.lower}, {"upper", d.upper}}; },
                               [](const SkewNormal& d) {
                                 return json{{"location", d.location}, {"scale", d.scale}, {"shape", d.shape}};
                               },
                           },
                           spec);
  return json{{"family", family_name(spec)}, {"parameters", std::move(params)}};
}

DistributionSpec spec_from_json(const json& j, const std::string& path) {
  const auto family = string_field(j, "family", path);
  const auto& p = field(j, "parameters", path);
  const auto pp = path + ".parameters";
  if (!p.is_object()) throw ValidationError(pp + ": expected an object");
  auto check_keys = [&](std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : p.items())
      if (std::none_of(keys.begin(), keys.end(), [&](const char* key) { return k == key; }))
        throw ValidationError(pp + "." + k + ": unknown parameter for " + family);
  };
  DistributionSpec spec;
  if (family == "normal") {
    check_keys({"mean", "sd"});
    spec = Normal{number_field(p, "mean", pp), number_field(p, "sd", pp)};
  } else if (family == "uniform") {
    check_keys({"lower", "upper"});
    spec = Uniform{number_field(p, "lower", pp), number_field(p, "upper", pp)};
  } else if (family == "skew_normal") {
    check_keys({"location", "scale", "shape"});
    spec = SkewNormal{number_field(p, "location", pp), number_field(p, "scale", pp),
                      number_field(p, "shape", pp)};
  } else {
    throw ValidationError(path + ".family: unknown family '" + family + "'");
  }
  try {
    validate(spec);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return spec;
}

json to_json(const KlResult& r) {
  return json{{"value", number_to_json(r.value)},
              {"estimated_error", number_to_json(r.estimated_error)},
              {"truncated_mass", r.truncated_mass},
              {"infinite", r.infinite},
              {"warning", r.warning},
              {"floor_applied", r.floor_applied},
              {"note", r.note}};
}

KlResult kl_result_from_json(const json& j, const std::string& path) {
  KlResult r;
  r.value = number_field(j, "value", path);
  r.estimated_error = number_field(j, "estimated_error", path);
  r.truncated_mass = number_field(j, "truncated_mass", path);
  r.infinite = bool_field(j, "infinite", path);
  r.warning = bool_field(j, "warning", path);
  r.floor_applied = bool_field(j, "floor_applied", path);
  r.note = string_field(j, "note", path);
  return r;
}

json to_json(const QuadratureConfig& cfg) {
  json j{{"relative_tolerance", cfg.relative_tolerance},
         {"max_subdivisions", cfg.max_subdivisions},
         {"support_epsilon", cfg.support_epsilon},
         {"density_floor_policy", cfg.floor_policy == DensityFloorPolicy::floor ? "floor" : "infinite"}};
  if (cfg.floor_policy == DensityFloorPolicy::floor) j["floor_value"] = cfg.floor_value;
  return j;
}

QuadratureConfig quadrature_from_json(const json& j, const std::string& path) {
  QuadratureConfig cfg;
  if (!j.is_object()) throw ValidationError(path + ": expected an object");
  if (j.contains("relative_tolerance")) cfg.relative_tolerance = number_field(j, "relative_tolerance", path);
  if (j.contains("max_subdivisions")) {
    const auto& v = j.at("max_subdivisions");
    if (!v.is_number_integer()) throw ValidationError(path + ".max_subdivisions: expected an integer");
    cfg.max_subdivisions = v.get<int>();
  }
  if (j.contains("support_epsilon")) cfg.support_epsilon = number_field(j, "support_epsilon", path);
  if (j.contains("density_floor_policy")) {
    const auto policy = string_field(j, "density_floor_policy", path);
    if (policy == "floor")
      cfg.floor_policy = DensityFloorPolicy::floor;
    else if (policy != "infinite")
      throw ValidationError(path + ".density_floor_policy: expected 'infinite' or 'floor'");
  }
  if (j.contains("floor_value")) cfg.floor_value = number_field(j, "floor_value", path);
  try {
    cfg.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return cfg;
}

json to_json(const PosteriorSummary& p) {
  json j{{"summary", spec_to_json(p.summary)}, {"method", method_name(p.method)}, {"warnings", p.warnings}};
  if (p.diagnostics) {
    const auto& d = *p.diagnostics;
    j["diagnostics"] = json{{"r_hat", d.r_hat},
                            {"chains", d.chains},
                            {"iterations", d.iterations},
                            {"burn_in", d.burn_in},
                            {"seed", d.seed},
                            {"acceptance_rate", d.acceptance_rate},
                            {"converged", d.converged},
                            {"tuning_warning", d.tuning_warning}};
  } else {
    j["diagnostics"] = nullptr;
  }
  return j;
}

PosteriorSummary posterior_from_json(const json& j, const std::string& path) {
  PosteriorSummary p;
  const auto spec = spec_from_json(field(j, "summary", path), path + ".summary");
  if (!std::holds_alternative<Normal>(spec)) throw ValidationError(path + ".summary: must be normal");
  p.summary = std::get<Normal>(spec);
  const auto method = string_field(j, "method", path);
  if (method == "mcmc")
    p.method = PosteriorMethod::mcmc;
  else if (method != "analytic")
    throw ValidationError(path + ".method: expected 'analytic' or 'mcmc'");
  if (j.contains("warnings")) p.warnings = string_list(j.at("warnings"), path + ".warnings");
  if (j.contains("diagnostics") && !j.at("diagnostics").is_null()) {
    const auto& d = j.at("diagnostics");
    const auto dp = path + ".diagnostics";
    McmcDiagnostics diag;
    diag.r_hat = number_field(d, "r_hat", dp);
    diag.chains = uint_field(d, "chains", dp);
    diag.iterations = uint_field(d, "iterations", dp);
    diag.burn_in = uint_field(d, "burn_in", dp);
    diag.seed = uint_field(d, "seed", dp);
    diag.acceptance_rate = number_field(d, "acceptance_rate", dp);
    diag.converged = bool_field(d, "converged", dp);
    diag.tuning_warning = bool_field(d, "tuning_warning", dp);
    p.diagnostics = diag;
  }
  return p;
}

json to_json(const ExpertPrior& e) {
  auto j = spec_to_json(e.spec);
  j["id"] = e.id;
  j["label"] = e.label;
  return j;
}

ExpertPrior expert_from_json(const json& j, const std::string& path) {
  ExpertPrior e;
  e.id = string_field(j, "id", path);
  if (e.id.empty()) throw ValidationError(path + ".id: must not be empty");
  e.label = j.contains("label") ? string_field(j, "label", path) : e.id;
  e.spec = spec_from_json(j, path);
  return e;
}

json to_json(const PriorSetDocument& doc) {
  json experts = json::array();
  for (const auto& e : doc.experts) experts.push_back(to_json(e));
  return json{{"format_version", doc.format_version},
              {"parameterization_note", doc.parameterization_note},
              {"experts", std::move(experts)}};
}

PriorSetDocument prior_set_from_json(const json& j) {
  PriorSetDocument doc;
  const auto& version = field(j, "format_version", "priors");
  if (!version.is_number_integer() || version.get<int>() != kFormatVersion)
    throw ValidationError("priors.format_version: unsupported version");
  doc.format_version = version.get<int>();
  doc.parameterization_note =
      j.contains("parameterization_note") ? string_field(j, "parameterization_note", "priors") : "";
  const auto& experts = field(j, "experts", "priors");
  if (!experts.is_array()) throw ValidationError("priors.experts: expected an array");
  if (experts.empty()) throw ValidationError("priors.experts: at least one expert is required");
  for (std::size_t i = 0; i < experts.size(); ++i)
    doc.experts.push_back(expert_from_json(experts[i], "priors.experts[" + std::to_string(i) + "]"));
  for (std::size_t i = 0; i < doc.experts.size(); ++i)
    for (std::size_t k = 0; k < i; ++k)
      if (doc.experts[i].id == doc.experts[k].id)
        throw ValidationError("priors.experts[" + std::to_string(i) + "].id: duplicate id '" +
                              doc.experts[i].id + "'");
  return doc;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PriorSetDocument read_prior_set(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": invalid JSON: " + e.what());
  }
  return prior_set_from_json(j);
}

Dataset parse_dataset_csv(std::string_view text) {
  std::vector<double> values;
  std::size_t line_no = 0;
  bool seen_content = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    if (!seen_content) {
      seen_content = true;
      if (line == "y" || line == "\"y\"") continue;
    }
    double v = 0.0;
    if (!parse_double(line, v) || !std::isfinite(v))
      throw ValidationError("data line " + std::to_string(line_no) + ": expected one finite number, got '" +
                            std::string(line) + "'");
    values.push_back(v);
  }
  Dataset d{std::span<const double>(values)};
  d.validate();
  return d;
}

Dataset read_dataset_csv(const std::filesystem::path& path) { return parse_dataset_csv(read_file(path)); }

json report_document(const DacReport& report, const std::map<std::string, std::string>& input_digests) {
  json experts = json::array();
  for (const auto& e : report.experts) experts.push_back(to_json(e));
  json entries = json::array();
  for (const auto& e : report.entries)
    entries.push_back(json{{"expert_id", e.expert_id},
                           {"kl", to_json(e.kl)},
                           {"kl_value", number_to_json(e.kl_value)},
                           {"dac_value", number_to_json(e.dac_value)},
                           {"conflict", e.conflict},
                           {"rank", e.rank}});
  json provenance{{"parameterization_note", report.provenance.parameterization_note},
                  {"tie_rule", report.provenance.tie_rule},
                  {"warnings", report.provenance.warnings}};
  provenance["seed"] = report.provenance.seed ? json(*report.provenance.seed) : json(nullptr);
  if (!report.provenance.timestamp.empty()) provenance["timestamp"] = report.provenance.timestamp;

  return json{{"format_version", kFormatVersion},
              {"tool", "dacrank"},
              {"tool_version", kToolVersion},
              {"input_digests", input_digests},
              {"posterior", to_json(report.posterior)},
              {"benchmark", spec_to_json(report.benchmark)},
              {"benchmark_kl", to_json(report.benchmark_kl_result)},
              {"experts", std::move(experts)},
              {"entries", std::move(entries)},
              {"quadrature", to_json(report.quadrature)},
              {"provenance", std::move(provenance)},
              {"rank_stability", rank_stability_note(report)}};
}

DacReport report_from_document(const json& doc) {
  DacReport r;
  r.posterior = posterior_from_json(field(doc, "posterior", "report"), "report.posterior");
  r.benchmark = spec_from_json(field(doc, "benchmark", "report"), "report.benchmark");
  r.benchmark_kl_result = kl_result_from_json(field(doc, "benchmark_kl", "report"), "report.benchmark_kl");
  r.benchmark_kl = r.benchmark_kl_result.value;
  const auto& experts = field(doc, "experts", "report");
  if (!experts.is_array()) throw ValidationError("report.experts: expected an array");
  for (std::size_t i = 0; i < experts.size(); ++i)
    r.experts.push_back(expert_from_json(experts[i], "report.experts[" + std::to_string(i) + "]"));
  const auto& entries = field(doc, "entries", "report");
  if (!entries.is_array()) throw ValidationError("report.entries: expected an array");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto path = "report.entries[" + std::to_string(i) + "]";
    const auto& e = entries[i];
    DacEntry entry;
    entry.expert_id = string_field(e, "expert_id", path);
    entry.kl = kl_result_from_json(field(e, "kl", path), path + ".kl");
    entry.kl_value = number_field(e, "kl_value", path);
    entry.dac_value = number_field(e, "dac_value", path);
    entry.conflict = bool_field(e, "conflict", path);
    entry.rank = uint_field(e, "rank", path);
    r.entries.push_back(std::move(entry));
  }
  r.quadrature = quadrature_from_json(field(doc, "quadrature", "report"), "report.quadrature");
  const auto& prov = field(doc, "provenance", "report");
  r.provenance.parameterization_note = string_field(prov, "parameterization_note", "report.provenance");
  r.provenance.tie_rule = string_field(prov, "tie_rule", "report.provenance");
  r.provenance.warnings = string_list(field(prov, "warnings", "report.provenance"), "report.provenance.warnings");
  if (prov.contains("seed") && !prov.at("seed").is_null())
    r.provenance.seed = uint_field(prov, "seed", "report.provenance");
  if (prov.contains("timestamp")) r.provenance.timestamp = string_field(prov, "timestamp", "report.provenance");
  return r;
}

DacReport reevaluate_report_document(const json& doc) {
  const auto stored = report_from_document(doc);
  return evaluate(stored.posterior, stored.benchmark, stored.experts, stored.quadrature);
}

std::string format_report_table(const DacReport& report) {
  std::size_t width = std::string_view("benchmark").size();
  for (const auto& e : report.experts) width = std::max(width, e.label.size());

  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-*s %10s %10s %9s %5s\n", static_cast<int>(width), "expert", "KL", "DAC",
                "conflict", "rank");
  os << line;
  for (const auto& expert : report.experts) {
    const auto it = std::find_if(report.entries.begin(), report.entries.end(),
                                 [&](const DacEntry& e) { return e.expert_id == expert.id; });
    std::snprintf(line, sizeof line, "%-*s %10s %10s %9s %5zu\n", static_cast<int>(width), expert.label.c_str(),
                  fixed(it->kl_value, 4).c_str(), fixed(it->dac_value, 4).c_str(), it->conflict ? "yes" : "no",
                  it->rank);
    os << line;
  }
  std::snprintf(line, sizeof line, "%-*s %10s %10s %9s %5s\n", static_cast<int>(width), "benchmark",
                fixed(report.benchmark_kl, 4).c_str(), "-", "-", "-");
  os << line;
  return os.str();
}

void write_heatmap_csv(std::ostream& os, const GridResult& grid, const GridPanel& panel) {
  os << "mean,sd,benchmark_id,dac\n";
  char buf[128];
  for (Eigen::Index r = 0; r < grid.means.size(); ++r)
    for (Eigen::Index c = 0; c < grid.sds.size(); ++c) {
      const double v = panel.dac(r, c);
      if (std::isinf(v))
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%s,inf\n", grid.means(r), grid.sds(c), panel.id.c_str());
      else
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%s,%.17g\n", grid.means(r), grid.sds(c), panel.id.c_str(), v);
      os << buf;
    }
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw NumericalError("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace dacrank
