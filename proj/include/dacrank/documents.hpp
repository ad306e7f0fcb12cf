#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dacrank/dac.hpp"
#include "dacrank/sensitivity.hpp"

namespace dacrank {

using json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

/// Parses "family:p1,p2[,p3]" with families normal (mean, sd),
/// uniform (lower, upper) and skew_normal (location, scale, shape).
DistributionSpec parse_inline_spec(std::string_view text);

/// {"family": ..., "parameters": {...}}
json spec_to_json(const DistributionSpec& spec);
/// Throws ValidationError naming the offending field. `path` prefixes it.
DistributionSpec spec_from_json(const json& j, const std::string& path = "spec");

/// +-inf become the strings "inf" / "-inf".
json number_to_json(double v);
double number_from_json(const json& j, const std::string& path);

json to_json(const KlResult& r);
KlResult kl_result_from_json(const json& j, const std::string& path = "kl");
json to_json(const QuadratureConfig& cfg);
QuadratureConfig quadrature_from_json(const json& j, const std::string& path = "quadrature");
json to_json(const PosteriorSummary& p);
PosteriorSummary posterior_from_json(const json& j, const std::string& path = "posterior");

json to_json(const ExpertPrior& e);
ExpertPrior expert_from_json(const json& j, const std::string& path = "expert");

struct PriorSetDocument {
  int format_version = kFormatVersion;
  std::string parameterization_note = kSkewNormalParameterizationNote;
  std::vector<ExpertPrior> experts;
};

json to_json(const PriorSetDocument& doc);
/// Rejects unknown families and empty expert lists.
PriorSetDocument prior_set_from_json(const json& j);
PriorSetDocument read_prior_set(const std::filesystem::path& path);

/// One numeric column, optional "y" header, blank lines skipped, '.' decimal
/// point regardless of locale.
Dataset parse_dataset_csv(std::string_view text);
Dataset read_dataset_csv(const std::filesystem::path& path);

/// Serialized report with tool version and input digests. The embedded
/// posterior, benchmark, experts and quadrature settings are enough to
/// recompute every DAC value.
json report_document(const DacReport& report, const std::map<std::string, std::string>& input_digests);
DacReport report_from_document(const json& doc);
/// Re-runs `evaluate` on the inputs embedded in a report document.
DacReport reevaluate_report_document(const json& doc);

/// Aligned text table: expert, KL, DAC, conflict, rank.
std::string format_report_table(const DacReport& report);

/// Header "mean,sd,benchmark_id,dac", then one row per cell, mean-major.
void write_heatmap_csv(std::ostream& os, const GridResult& grid, const GridPanel& panel);

std::string sha256_hex(std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

/// Pretty-printed JSON with a trailing newline.
std::string dump(const json& j);

}  // namespace dacrank
