#include "dacrank/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "dacrank/errors.hpp"
#include "dacrank/random.hpp"

namespace dacrank {

namespace {

constexpr double kSupportMassTolerance = 1e-12;

// Mean and sd of N(mu, sigma) restricted to [a, b].
Normal truncated_normal_moments(double mu, double sigma, double a, double b) {
  const double alpha = (a - mu) / sigma;
  const double beta = (b - mu) / sigma;
  // Work in whichever tail keeps the mass difference away from cancellation.
  const double z = alpha > 0.0 ? stdnormal::ccdf(alpha) - stdnormal::ccdf(beta)
                               : stdnormal::cdf(beta) - stdnormal::cdf(alpha);
  if (!(z > 0.0)) throw NumericalError("posterior: benchmark support holds no posterior mass");
  const double pa = stdnormal::pdf(alpha);
  const double pb = stdnormal::pdf(beta);
  const double shift = (pa - pb) / z;
  const double var = 1.0 + (alpha * pa - beta * pb) / z - shift * shift;
  return {mu + sigma * shift, sigma * std::sqrt(std::max(var, 0.0))};
}

double variance(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double m = v.mean();
  return (v.array() - m).square().sum() / static_cast<double>(v.size() - 1);
}

}  // namespace

double Dataset::sd() const {
  if (observations.size() < 2) throw ValidationError("dataset: need at least 2 observations");
  return std::sqrt(variance(observations));
}

void Dataset::validate() const {
  if (observations.size() < 2) throw ValidationError("dataset: need at least 2 observations");
  if (!observations.allFinite()) throw ValidationError("dataset: observations must be finite");
  if (!(sd() > 0.0)) throw ValidationError("dataset: observations have zero variance");
}

void McmcConfig::validate() const {
  if (chains < 2) throw ValidationError("mcmc: need at least 2 chains");
  if (iterations_per_chain < 10) throw ValidationError("mcmc: need at least 10 iterations per chain");
  if (burn_in >= iterations_per_chain) throw ValidationError("mcmc: burn_in must be < iterations_per_chain");
  if (proposal_sd && !(*proposal_sd > 0.0)) throw ValidationError("mcmc: proposal_sd must be > 0");
  if (start && !std::isfinite(*start)) throw ValidationError("mcmc: start must be finite");
}

PosteriorSummary fit_posterior_analytic(const Dataset& data, const Uniform& benchmark) {
  data.validate();
  validate(benchmark);
  const double n = static_cast<double>(data.size());
  const double mu = data.mean();
  const double sigma = data.sd() / std::sqrt(n);

  PosteriorSummary out;
  out.method = PosteriorMethod::analytic;
  const double outside = stdnormal::cdf((benchmark.lower - mu) / sigma) +
                         stdnormal::ccdf((benchmark.upper - mu) / sigma);
  if (outside < kSupportMassTolerance) {
    out.summary = {mu, sigma};
    return out;
  }
  out.summary = truncated_normal_moments(mu, sigma, benchmark.lower, benchmark.upper);
  out.warnings.push_back("posterior truncated by benchmark support; summary is the renormalized truncated normal");
  return out;
}

PosteriorSummary fit_posterior_conjugate(const Dataset& data, const Normal& benchmark) {
  data.validate();
  validate(benchmark);
  const double n = static_cast<double>(data.size());
  const double s2 = variance(data.observations);
  const double prior_precision = 1.0 / (benchmark.sd * benchmark.sd);
  const double data_precision = n / s2;
  const double precision = prior_precision + data_precision;
  PosteriorSummary out;
  out.method = PosteriorMethod::analytic;
  out.summary = {(benchmark.mean * prior_precision + data.mean() * data_precision) / precision,
                 1.0 / std::sqrt(precision)};
  return out;
}

PosteriorSummary fit_posterior(const Dataset& data, const DistributionSpec& benchmark) {
  if (const auto* u = std::get_if<Uniform>(&benchmark)) return fit_posterior_analytic(data, *u);
  if (const auto* n = std::get_if<Normal>(&benchmark)) return fit_posterior_conjugate(data, *n);
  throw ValidationError("posterior: benchmark must be uniform or normal");
}

McmcDraws sample_posterior_mcmc(const Dataset& data, const Uniform& benchmark, const McmcConfig& cfg) {
  data.validate();
  validate(benchmark);
  cfg.validate();

  const double n = static_cast<double>(data.size());
  const double ybar = data.mean();
  const double s = data.sd();
  const double ss = (data.observations.array() - ybar).square().sum();
  const double theta_step = cfg.proposal_sd.value_or(s / std::sqrt(n));
  const double log_sigma_step = 1.0 / std::sqrt(2.0 * n);

  auto log_target = [&](double theta, double log_sigma) {
    if (theta < benchmark.lower || theta > benchmark.upper)
      return -std::numeric_limits<double>::infinity();
    const double d = ybar - theta;
    return -n * log_sigma - (ss + n * d * d) * 0.5 * std::exp(-2.0 * log_sigma);
  };

  const auto chains = static_cast<Eigen::Index>(cfg.chains);
  const auto kept = static_cast<Eigen::Index>(cfg.iterations_per_chain);
  McmcDraws out;
  out.theta.resize(kept, chains);
  out.acceptance_rate.resize(chains);

  const double width = benchmark.upper - benchmark.lower;
  auto start_for = [&](Eigen::Index c) {
    double theta = ybar;
    if (cfg.start) {
      theta = *cfg.start;
    } else if (chains > 1) {
      const double frac = static_cast<double>(c) / static_cast<double>(chains - 1);
      theta = ybar + (4.0 * frac - 2.0) * s / std::sqrt(n);
    }
    return std::clamp(theta, benchmark.lower + 1e-9 * width, benchmark.upper - 1e-9 * width);
  };

  auto run_chain = [&](Eigen::Index c) {
    Rng rng = make_rng(cfg.seed, static_cast<std::uint64_t>(c));
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double theta = start_for(c);
    double log_sigma = std::log(s);
    double current = log_target(theta, log_sigma);
    std::size_t accepted = 0;
    const std::size_t total = cfg.burn_in + cfg.iterations_per_chain;
    for (std::size_t it = 0; it < total; ++it) {
      const double theta_new = theta + theta_step * z(rng);
      const double log_sigma_new = log_sigma + log_sigma_step * z(rng);
      const double proposed = log_target(theta_new, log_sigma_new);
      if (std::log(u(rng)) < proposed - current) {
        theta = theta_new;
        log_sigma = log_sigma_new;
        current = proposed;
        if (it >= cfg.burn_in) ++accepted;
      }
      if (it >= cfg.burn_in) out.theta(static_cast<Eigen::Index>(it - cfg.burn_in), c) = theta;
    }
    out.acceptance_rate(c) = static_cast<double>(accepted) / static_cast<double>(cfg.iterations_per_chain);
  };

  if (!std::isfinite(log_target(start_for(0), std::log(s))))
    throw ValidationError("mcmc: starting point lies outside the benchmark support");

  std::vector<std::thread> workers;
  workers.reserve(cfg.chains);
  for (Eigen::Index c = 0; c < chains; ++c) workers.emplace_back(run_chain, c);
  for (auto& w : workers) w.join();
  return out;
}

PosteriorSummary fit_posterior_mcmc(const Dataset& data, const Uniform& benchmark, const McmcConfig& cfg) {
  const auto draws = sample_posterior_mcmc(data, benchmark, cfg);
  const Eigen::Map<const Eigen::VectorXd> pooled(draws.theta.data(), draws.theta.size());

  PosteriorSummary out;
  out.method = PosteriorMethod::mcmc;
  out.summary = {pooled.mean(), std::sqrt(variance(pooled))};

  McmcDiagnostics diag;
  diag.r_hat = gelman_rubin(draws.theta);
  diag.chains = cfg.chains;
  diag.iterations = cfg.iterations_per_chain;
  diag.burn_in = cfg.burn_in;
  diag.seed = cfg.seed;
  diag.acceptance_rate = draws.acceptance_rate.mean();
  diag.converged = diag.r_hat <= kRhatThreshold;
  diag.tuning_warning = diag.acceptance_rate < 0.1 || diag.acceptance_rate > 0.7;
  if (!diag.converged) out.warnings.push_back("mcmc: r_hat above 1.05, chains not converged");
  if (diag.tuning_warning) out.warnings.push_back("mcmc: acceptance rate outside [0.1, 0.7]");
  out.diagnostics = diag;
  return out;
}

double gelman_rubin(const Eigen::Ref<const Eigen::MatrixXd>& chains) {
  const Eigen::Index n = chains.rows();
  const Eigen::Index m = chains.cols();
  if (m < 2) throw ValidationError("gelman_rubin: need at least 2 chains");
  if (n < 10) throw ValidationError("gelman_rubin: need at least 10 draws per chain");

  const Eigen::VectorXd means = chains.colwise().mean().transpose();
  double within = 0.0;
  for (Eigen::Index c = 0; c < m; ++c) within += variance(chains.col(c));
  within /= static_cast<double>(m);
  if (!(within > 0.0)) throw ValidationError("gelman_rubin: chains have zero within-chain variance");

  const double nd = static_cast<double>(n);
  const double between = nd * variance(means);
  const double pooled = within * (nd - 1.0) / nd + between / nd;
  return std::max(1.0, std::sqrt(pooled / within));
}

double gelman_rubin(std::span<const std::vector<double>> chains) {
  if (chains.size() < 2) throw ValidationError("gelman_rubin: need at least 2 chains");
  const std::size_t n = chains.front().size();
  for (const auto& c : chains)
    if (c.size() != n) throw ValidationError("gelman_rubin: chains must have equal lengths");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(chains.size()));
  for (std::size_t c = 0; c < chains.size(); ++c)
    m.col(static_cast<Eigen::Index>(c)) =
        Eigen::Map<const Eigen::VectorXd>(chains[c].data(), static_cast<Eigen::Index>(n));
  return gelman_rubin(m);
}

}  // namespace dacrank
