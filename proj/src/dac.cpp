#include "dacrank/dac.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "dacrank/errors.hpp"

namespace dacrank {

namespace {

constexpr double kZeroKl = 1e-14;
constexpr double kInformativeFactor = 10.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

DacReport evaluate(const PosteriorSummary& posterior, const DistributionSpec& benchmark,
                   std::span<const ExpertPrior> experts, const QuadratureConfig& cfg) {
  if (experts.empty()) throw ValidationError("evaluate: need at least one expert");
  std::set<std::string> ids;
  for (const auto& e : experts) {
    if (e.id.empty()) throw ValidationError("evaluate: expert id must not be empty");
    if (!ids.insert(e.id).second) throw ValidationError("evaluate: duplicate expert id '" + e.id + "'");
    validate(e.spec);
  }
  validate(benchmark);
  cfg.validate();

  DacReport report;
  report.posterior = posterior;
  report.benchmark = benchmark;
  report.experts.assign(experts.begin(), experts.end());
  report.quadrature = cfg;
  report.provenance.parameterization_note = kSkewNormalParameterizationNote;
  report.provenance.tie_rule = kTieRuleNote;
  report.provenance.warnings = posterior.warnings;
  if (posterior.diagnostics) report.provenance.seed = posterior.diagnostics->seed;

  report.benchmark_kl_result = kl(posterior.summary, benchmark, cfg);
  report.benchmark_kl = report.benchmark_kl_result.value;
  if (report.benchmark_kl_result.infinite || !std::isfinite(report.benchmark_kl))
    throw BenchmarkRatioError("benchmark KL is infinite: the benchmark excludes posterior mass",
                              report.benchmark_kl_result);
  if (report.benchmark_kl <= kZeroKl)
    throw BenchmarkRatioError("benchmark KL is zero: the benchmark coincides with the posterior",
                              report.benchmark_kl_result);
  if (report.benchmark_kl_result.warning)
    report.provenance.warnings.push_back("benchmark KL: " + report.benchmark_kl_result.note);

  std::vector<DacEntry> entries;
  entries.reserve(experts.size());
  for (const auto& e : experts) {
    DacEntry entry;
    entry.expert_id = e.id;
    entry.kl = kl(posterior.summary, e.spec, cfg);
    entry.kl_value = entry.kl.value;
    entry.dac_value = entry.kl_value / report.benchmark_kl;
    entry.conflict = entry.dac_value > 1.0;
    if (entry.kl.warning || entry.kl.floor_applied)
      report.provenance.warnings.push_back("expert " + e.id + " KL: " + entry.kl.note);
    entries.push_back(std::move(entry));
  }

  std::vector<std::size_t> order(entries.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return entries[a].dac_value < entries[b].dac_value;
  });
  report.entries.reserve(entries.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    auto entry = std::move(entries[order[r]]);
    entry.rank = r + 1;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

bool benchmark_is_uninformative(const Normal& posterior, const DistributionSpec& benchmark) {
  if (const auto* n = std::get_if<Normal>(&benchmark))
    return n->sd >= kInformativeFactor * posterior.sd;
  if (const auto* u = std::get_if<Uniform>(&benchmark))
    return u->lower <= posterior.mean - kInformativeFactor * posterior.sd &&
           u->upper >= posterior.mean + kInformativeFactor * posterior.sd;
  const auto& s = std::get<SkewNormal>(benchmark);
  return std::min(s.scale * s.shape, s.scale / s.shape) >= kInformativeFactor * posterior.sd;
}

std::string rank_stability_note(const DacReport& report) {
  const auto& post = report.posterior.summary;
  const bool flat = benchmark_is_uninformative(post, report.benchmark);
  std::string note = "benchmark " + to_inline(report.benchmark) + " uninformative: " + (flat ? "yes" : "no");
  if (std::holds_alternative<Uniform>(report.benchmark)) {
    note += " (needs support covering [" + fmt(post.mean - kInformativeFactor * post.sd) + ", " +
            fmt(post.mean + kInformativeFactor * post.sd) + "])";
  } else {
    note += " (needs scale >= " + fmt(kInformativeFactor * post.sd) + ")";
  }
  if (!flat) note += "; rankings may depend on the benchmark choice";
  return note;
}

}  // namespace dacrank
