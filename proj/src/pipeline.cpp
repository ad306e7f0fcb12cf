#include "dacrank/pipeline.hpp"

#include "dacrank/documents.hpp"
#include "dacrank/errors.hpp"

namespace dacrank {

DacReport run_rank(const RankRequest& request) {
  if (request.experts.empty()) throw ValidationError("rank: at least one expert is required");
  validate(request.benchmark);

  PosteriorSummary posterior;
  if (const auto* data = std::get_if<Dataset>(&request.source)) {
    if (request.method == PosteriorMethod::mcmc) {
      const auto* u = std::get_if<Uniform>(&request.benchmark);
      if (!u) throw ValidationError("rank: mcmc fitting requires a uniform benchmark");
      posterior = fit_posterior_mcmc(*data, *u, request.mcmc);
    } else {
      posterior = fit_posterior(*data, request.benchmark);
    }
  } else {
    posterior.summary = std::get<Normal>(request.source);
    validate(posterior.summary);
    posterior.method = PosteriorMethod::analytic;
    posterior.warnings.push_back("posterior supplied directly, not fitted");
  }
  auto report = evaluate(posterior, request.benchmark, request.experts, request.quadrature);
  if (request.method == PosteriorMethod::mcmc) report.provenance.seed = request.mcmc.seed;
  return report;
}

RankRequest rank_request_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("request: expected an object");
  RankRequest req;
  const bool has_obs = j.contains("observations");
  const bool has_post = j.contains("posterior");
  if (has_obs == has_post) throw ValidationError("request: exactly one of 'observations' or 'posterior' is required");
  if (has_obs) {
    const auto& obs = j.at("observations");
    if (!obs.is_array()) throw ValidationError("request.observations: expected an array of numbers");
    std::vector<double> y;
    for (std::size_t i = 0; i < obs.size(); ++i)
      y.push_back(number_from_json(obs[i], "request.observations[" + std::to_string(i) + "]"));
    Dataset d{std::span<const double>(y)};
    try {
      d.validate();
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("request.observations: ") + e.what());
    }
    req.source = std::move(d);
  } else {
    const auto spec = spec_from_json(j.at("posterior"), "request.posterior");
    if (!std::holds_alternative<Normal>(spec)) throw ValidationError("request.posterior: must be normal");
    req.source = std::get<Normal>(spec);
  }
  if (!j.contains("benchmark")) throw ValidationError("request.benchmark: missing field");
  req.benchmark = spec_from_json(j.at("benchmark"), "request.benchmark");

  if (!j.contains("experts")) throw ValidationError("request.experts: missing field");
  const auto& experts = j.at("experts");
  if (!experts.is_array() || experts.empty())
    throw ValidationError("request.experts: expected a non-empty array");
  for (std::size_t i = 0; i < experts.size(); ++i)
    req.experts.push_back(expert_from_json(experts[i], "request.experts[" + std::to_string(i) + "]"));

  if (j.contains("method")) {
    const auto& m = j.at("method");
    if (m == "mcmc")
      req.method = PosteriorMethod::mcmc;
    else if (m != "analytic")
      throw ValidationError("request.method: expected 'analytic' or 'mcmc'");
  }
  if (j.contains("seed")) {
    const auto& s = j.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      throw ValidationError("request.seed: expected a non-negative integer");
    req.mcmc.seed = s.get<std::uint64_t>();
  }
  if (j.contains("quadrature")) req.quadrature = quadrature_from_json(j.at("quadrature"), "request.quadrature");
  return req;
}

json rank_request_inputs(const RankRequest& request) {
  json j;
  if (const auto* d = std::get_if<Dataset>(&request.source)) {
    json obs = json::array();
    for (double v : d->observations) obs.push_back(v);
    j["observations"] = std::move(obs);
  } else {
    j["posterior"] = spec_to_json(std::get<Normal>(request.source));
  }
  j["benchmark"] = spec_to_json(request.benchmark);
  json experts = json::array();
  for (const auto& e : request.experts) experts.push_back(to_json(e));
  j["experts"] = std::move(experts);
  j["method"] = request.method == PosteriorMethod::mcmc ? "mcmc" : "analytic";
  j["seed"] = request.mcmc.seed;
  j["quadrature"] = to_json(request.quadrature);
  return j;
}

}  // namespace dacrank
