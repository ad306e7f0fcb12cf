#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dacrank/distribution.hpp"

namespace dacrank {

/// Observations y_1..y_N, all finite.
struct Dataset {
  Eigen::VectorXd observations;

  Dataset() = default;
  explicit Dataset(Eigen::VectorXd y) : observations(std::move(y)) {}
  explicit Dataset(std::span<const double> y)
      : observations(Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()))) {}

  std::size_t size() const { return static_cast<std::size_t>(observations.size()); }
  double mean() const { return observations.mean(); }
  /// Sample standard deviation, denominator N - 1.
  double sd() const;
  /// Throws ValidationError on non-finite values or N < 2 or zero spread.
  void validate() const;
};

enum class PosteriorMethod { analytic, mcmc };

struct McmcDiagnostics {
  double r_hat = 1.0;
  std::size_t chains = 0;
  std::size_t iterations = 0;
  std::size_t burn_in = 0;
  std::uint64_t seed = 0;
  double acceptance_rate = 0.0;
  bool converged = true;
  bool tuning_warning = false;
};

/// Normal summary of the benchmark posterior.
struct PosteriorSummary {
  Normal summary;
  PosteriorMethod method = PosteriorMethod::analytic;
  std::optional<McmcDiagnostics> diagnostics;
  std::vector<std::string> warnings;
};

struct McmcConfig {
  std::size_t chains = 4;
  /// Retained draws per chain, after burn-in.
  std::size_t iterations_per_chain = 25000;
  std::size_t burn_in = 1000;
  /// Random-walk step for theta; defaults to data sd / sqrt(N).
  std::optional<double> proposal_sd;
  std::uint64_t seed = 0;
  /// Common starting value for theta. When unset, chains start spread
  /// +-2 posterior sd around the sample mean.
  std::optional<double> start;

  void validate() const;
};

/// Pooled theta draws: one column per chain.
struct McmcDraws {
  Eigen::MatrixXd theta;
  Eigen::VectorXd acceptance_rate;
};

inline constexpr double kRhatThreshold = 1.05;

/// Flat benchmark: N(ybar, s / sqrt(N)). If more than 1e-12 of that normal
/// falls outside the benchmark support, the truncated normal's moments are
/// returned instead, with a warning.
PosteriorSummary fit_posterior_analytic(const Dataset& data, const Uniform& benchmark);

/// Normal benchmark: conjugate update with the likelihood variance fixed at
/// the sample variance.
PosteriorSummary fit_posterior_conjugate(const Dataset& data, const Normal& benchmark);

/// Dispatches to the analytic (uniform) or conjugate (normal) fit. Skew-normal
/// benchmarks are rejected.
PosteriorSummary fit_posterior(const Dataset& data, const DistributionSpec& benchmark);

/// Random-walk Metropolis on (theta, log sigma): y_i ~ N(theta, sigma),
/// theta ~ benchmark, p(sigma) proportional to 1 / sigma.
McmcDraws sample_posterior_mcmc(const Dataset& data, const Uniform& benchmark, const McmcConfig& cfg);

/// Moment-matches the pooled draws of `sample_posterior_mcmc`.
PosteriorSummary fit_posterior_mcmc(const Dataset& data, const Uniform& benchmark, const McmcConfig& cfg);

/// Potential scale reduction factor; columns are chains. Values below 1 are
/// reported as 1.
double gelman_rubin(const Eigen::Ref<const Eigen::MatrixXd>& chains);
double gelman_rubin(std::span<const std::vector<double>> chains);

}  // namespace dacrank
