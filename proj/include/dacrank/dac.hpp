#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dacrank/distribution.hpp"
#include "dacrank/errors.hpp"
#include "dacrank/divergence.hpp"
#include "dacrank/posterior.hpp"

namespace dacrank {

struct ExpertPrior {
  std::string id;
  std::string label;
  DistributionSpec spec;
};

struct DacEntry {
  std::string expert_id;
  KlResult kl;
  double kl_value = 0.0;
  double dac_value = 0.0;
  bool conflict = false;
  std::size_t rank = 0;
};

struct Provenance {
  std::string parameterization_note;
  std::string tie_rule;
  std::vector<std::string> warnings;
  std::optional<std::uint64_t> seed;
  /// Empty unless the caller asked for a timestamp; reports are otherwise
  /// reproducible byte for byte.
  std::string timestamp;
};

struct DacReport {
  PosteriorSummary posterior;
  DistributionSpec benchmark;
  KlResult benchmark_kl_result;
  double benchmark_kl = 0.0;
  /// The scored experts in input order.
  std::vector<ExpertPrior> experts;
  /// Sorted by rank.
  std::vector<DacEntry> entries;
  QuadratureConfig quadrature;
  Provenance provenance;
};

/// Raised by `evaluate` when the benchmark divergence cannot serve as a
/// denominator. Carries the offending KL result.
class BenchmarkRatioError : public UndefinedRatioError {
 public:
  BenchmarkRatioError(const std::string& what, KlResult kl) : UndefinedRatioError(what), kl_(std::move(kl)) {}
  const KlResult& kl() const noexcept { return kl_; }

 private:
  KlResult kl_;
};

inline constexpr const char* kSkewNormalParameterizationNote =
    "skew_normal parameters are the location and scale of the base normal before two-piece "
    "skewing (not the mean and sd of the skewed distribution); shape > 1 moves mass above the "
    "location, P(X < location) = 1 / (1 + shape^2)";

inline constexpr const char* kTieRuleNote =
    "equal DAC values are ranked by expert input order; infinite KL ranks last";

/// Scores every expert against the benchmark posterior:
///   DAC_d = KL(posterior || expert_d) / KL(posterior || benchmark).
/// DAC_d > 1 (strict) flags prior-data conflict. Ranks ascend with DAC.
/// Throws UndefinedRatioError when the benchmark divergence is zero or not
/// finite, ValidationError when `experts` is empty or ids repeat.
DacReport evaluate(const PosteriorSummary& posterior, const DistributionSpec& benchmark,
                   std::span<const ExpertPrior> experts, const QuadratureConfig& cfg = {});

/// Uninformative means: a normal benchmark has sd >= 10 posterior sd; a
/// uniform benchmark covers posterior mean +- 10 posterior sd.
bool benchmark_is_uninformative(const Normal& posterior, const DistributionSpec& benchmark);

/// One-line annotation on whether the benchmark is uninformative enough for
/// the ranking to be insensitive to its choice.
std::string rank_stability_note(const DacReport& report);

}  // namespace dacrank
