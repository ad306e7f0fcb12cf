#pragma once

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dacrank/dac.hpp"

namespace dacrank {

inline constexpr const char* kToolVersion = "0.1.0";

/// Everything needed to score a set of experts. The posterior comes either
/// from observations (fitted under the benchmark) or is supplied directly.
struct RankRequest {
  std::variant<Dataset, Normal> source;
  DistributionSpec benchmark = Uniform{0.0, 5.0};
  std::vector<ExpertPrior> experts;
  PosteriorMethod method = PosteriorMethod::analytic;
  McmcConfig mcmc;
  QuadratureConfig quadrature;
};

/// Fits the posterior (unless supplied) and evaluates every expert. MCMC
/// requires a uniform benchmark.
DacReport run_rank(const RankRequest& request);

/// Parses the wire form used by POST /api/rank:
///   {"observations": [...] | "posterior": spec, "benchmark": spec,
///    "experts": [...], "method": "analytic"|"mcmc", "seed": n,
///    "quadrature": {...}}
RankRequest rank_request_from_json(const nlohmann::json& j);

/// Canonical JSON of the request inputs, used for digests.
nlohmann::json rank_request_inputs(const RankRequest& request);

}  // namespace dacrank
