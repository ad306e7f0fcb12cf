#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "dacrank/errors.hpp"
#include "dacrank/posterior.hpp"
#include "test_support.hpp"

using namespace dacrank;
using dacrank::testing::standard_normal_data;

namespace {

McmcConfig quick_mcmc(std::uint64_t seed) {
  McmcConfig cfg;
  cfg.iterations_per_chain = 5000;
  cfg.burn_in = 500;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("analytic fit is the sample mean and s / sqrt(N)") {
  const auto data = standard_normal_data(100, 7);
  const auto post = fit_posterior_analytic(data, Uniform{-50, 50});
  CHECK(post.summary.mean == data.mean());
  CHECK(post.summary.sd == data.sd() / 10.0);
  CHECK(post.method == PosteriorMethod::analytic);
  CHECK_FALSE(post.diagnostics);
  CHECK(post.warnings.empty());
}

TEST_CASE("analytic fit on empirical-shaped data") {
  std::vector<double> y;
  const auto z = sample(Normal{0, 1}, 104, 3);
  const double zm = z.mean();
  const double zs = std::sqrt((z.array() - zm).square().sum() / 103.0);
  for (double v : z) y.push_back(2.29 + 0.957 * (v - zm) / zs);
  const Dataset data{std::span<const double>(y)};
  const auto post = fit_posterior_analytic(data, Uniform{0, 5});
  CHECK(post.summary.mean == doctest::Approx(2.29).epsilon(1e-12));
  CHECK(post.summary.sd == doctest::Approx(0.957 / std::sqrt(104.0)).epsilon(1e-12));
  CHECK(std::abs(post.summary.sd - 0.094) < 0.001);
}

TEST_CASE("truncated posterior matches quadrature moments") {
  std::vector<double> y;
  const auto z = sample(Normal{0, 1}, 104, 3);
  for (double v : z) y.push_back(2.29 + 0.957 * v);
  const Dataset data{std::span<const double>(y)};
  const Uniform narrow{2.2898, 2.2902};
  const auto post = fit_posterior_analytic(data, narrow);
  REQUIRE_FALSE(post.warnings.empty());

  const Normal full{data.mean(), data.sd() / std::sqrt(104.0)};
  auto dens = [&](double x) { return density(full, x); };
  const double mass = testing::simpson(dens, narrow.lower, narrow.upper);
  const double mean = testing::simpson([&](double x) { return x * dens(x); }, narrow.lower, narrow.upper) / mass;
  const double var =
      testing::simpson([&](double x) { return (x - mean) * (x - mean) * dens(x); }, narrow.lower, narrow.upper) / mass;
  CHECK(post.summary.mean == doctest::Approx(mean).epsilon(1e-10));
  CHECK(post.summary.sd == doctest::Approx(std::sqrt(var)).epsilon(1e-6));
}

TEST_CASE("dataset validation") {
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(fit_posterior_analytic(Dataset{std::span<const double>(one)}, Uniform{0, 5}), ValidationError);
  const std::vector<double> flat{2.0, 2.0, 2.0};
  CHECK_THROWS_AS(fit_posterior_analytic(Dataset{std::span<const double>(flat)}, Uniform{0, 5}), ValidationError);
  const std::vector<double> nan{1.0, std::nan("")};
  CHECK_THROWS_AS(Dataset{std::span<const double>(nan)}.validate(), ValidationError);
}

TEST_CASE("conjugate update and flat-prior dominance") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto data = standard_normal_data(100, seed);
    const double s = data.sd();
    const double se = s / 10.0;
    for (const DistributionSpec& b : {DistributionSpec{Uniform{-50, 50}}, DistributionSpec{Normal{0, 100 * s}},
                                      DistributionSpec{Normal{3, 1000 * s}}}) {
      const auto post = fit_posterior(data, b);
      CHECK(std::abs(post.summary.mean - data.mean()) < 0.001 * s);
      CHECK(std::abs(post.summary.sd - se) < 0.01 * se);
    }
  }
  // Informative benchmark: precision-weighted average.
  const auto data = standard_normal_data(100, 1);
  const double s2 = data.sd() * data.sd();
  const auto post = fit_posterior_conjugate(data, Normal{5, std::sqrt(0.5)});
  const double precision = 2.0 + 100.0 / s2;
  CHECK(post.summary.sd == doctest::Approx(1.0 / std::sqrt(precision)));
  CHECK(post.summary.mean == doctest::Approx((10.0 + 100.0 * data.mean() / s2) / precision));
  CHECK_THROWS_AS(fit_posterior(data, SkewNormal{0, 1, 1}), ValidationError);
}

TEST_CASE("gelman_rubin examples") {
  const auto a = sample(Normal{0, 1}, 1000, 1);
  Eigen::MatrixXd same(1000, 2);
  same << a, a;
  CHECK(gelman_rubin(same) == 1.0);

  Eigen::MatrixXd mixed(10000, 4);
  for (int c = 0; c < 4; ++c) mixed.col(c) = sample(Normal{0, 1}, 10000, 10 + c);
  const double r = gelman_rubin(mixed);
  CHECK(r >= 1.0);
  CHECK(r <= 1.01);

  Eigen::MatrixXd apart(1000, 2);
  apart << sample(Normal{0, 1}, 1000, 1), sample(Normal{10, 1}, 1000, 2);
  CHECK(gelman_rubin(apart) > 1.1);

  const std::vector<std::vector<double>> uneven{std::vector<double>(20, 0.0), std::vector<double>(21, 0.0)};
  CHECK_THROWS_AS(gelman_rubin(std::span<const std::vector<double>>(uneven)), ValidationError);
  CHECK_THROWS_AS(gelman_rubin(Eigen::MatrixXd::Random(5, 2)), ValidationError);
  CHECK_THROWS_AS(gelman_rubin(Eigen::MatrixXd::Random(50, 1)), ValidationError);
}

TEST_CASE("gelman_rubin classic formula on a small example") {
  // Two chains of length 10: W = mean within variance, B = n var(means).
  Eigen::MatrixXd m(10, 2);
  for (int i = 0; i < 10; ++i) {
    m(i, 0) = i;
    m(i, 1) = i + 3;
  }
  const double w = 110.0 / 12.0;  // var(0..9) = 9.1667
  const double b = 10.0 * 4.5;    // means 4.5, 7.5 -> var 4.5
  CHECK(gelman_rubin(m) == doctest::Approx(std::sqrt((w * 0.9 + b / 10.0) / w)));
}

TEST_CASE("mcmc agrees with the analytic fit") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto data = standard_normal_data(100, 1000 + seed);
    const auto analytic = fit_posterior_analytic(data, Uniform{-50, 50});
    const auto mcmc = fit_posterior_mcmc(data, Uniform{-50, 50}, quick_mcmc(seed));
    CHECK(std::abs(mcmc.summary.mean - analytic.summary.mean) < 0.01);
    CHECK(std::abs(mcmc.summary.sd / analytic.summary.sd - 1.0) < 0.1);
    REQUIRE(mcmc.diagnostics);
    CHECK(mcmc.diagnostics->acceptance_rate > 0.1);
    CHECK(mcmc.diagnostics->acceptance_rate < 0.7);
    CHECK(mcmc.method == PosteriorMethod::mcmc);
  }
}

TEST_CASE("mcmc started at the posterior mean converges") {
  const auto data = standard_normal_data(100, 77);
  McmcConfig cfg;
  cfg.seed = 5;
  cfg.start = data.mean();
  const auto post = fit_posterior_mcmc(data, Uniform{-50, 50}, cfg);
  REQUIRE(post.diagnostics);
  CHECK(post.diagnostics->r_hat < 1.01);
  CHECK(post.diagnostics->converged);
  CHECK(post.diagnostics->chains == 4);
  CHECK(post.diagnostics->iterations == 25000);
  CHECK(post.diagnostics->burn_in == 1000);
}

TEST_CASE("mcmc on empirical-shaped data shrinks by sqrt(N)") {
  std::vector<double> y;
  for (double v : sample(Normal{0, 1}, 104, 8)) y.push_back(2.29 + 0.957 * v);
  const Dataset data{std::span<const double>(y)};
  const auto post = fit_posterior_mcmc(data, Uniform{0, 5}, quick_mcmc(3));
  CHECK(std::abs(post.summary.sd / (data.sd() / std::sqrt(104.0)) - 1.0) < 0.1);
}

TEST_CASE("mcmc draws are deterministic and chains differ") {
  const auto data = standard_normal_data(50, 2);
  const auto a = sample_posterior_mcmc(data, Uniform{-10, 10}, quick_mcmc(9));
  const auto b = sample_posterior_mcmc(data, Uniform{-10, 10}, quick_mcmc(9));
  CHECK(a.theta == b.theta);
  CHECK(a.theta.col(0) != a.theta.col(1));
  const auto c = sample_posterior_mcmc(data, Uniform{-10, 10}, quick_mcmc(10));
  CHECK(a.theta != c.theta);
}

TEST_CASE("mcmc respects the benchmark support") {
  const auto data = standard_normal_data(100, 4);
  const Uniform b{0.0, 10.0};
  const auto draws = sample_posterior_mcmc(data, b, quick_mcmc(1));
  CHECK(draws.theta.minCoeff() >= 0.0);
}

TEST_CASE("poor tuning and non-convergence are flagged") {
  const auto data = standard_normal_data(100, 4);
  McmcConfig cfg = quick_mcmc(2);
  cfg.proposal_sd = 50.0;  // nearly every proposal rejected
  const auto post = fit_posterior_mcmc(data, Uniform{-50, 50}, cfg);
  REQUIRE(post.diagnostics);
  CHECK(post.diagnostics->tuning_warning);
  CHECK_FALSE(post.warnings.empty());

  McmcConfig stuck = quick_mcmc(2);
  stuck.iterations_per_chain = 200;
  stuck.burn_in = 0;
  stuck.proposal_sd = 1e-4;
  const auto slow = fit_posterior_mcmc(data, Uniform{-50, 50}, stuck);
  CHECK(slow.diagnostics->r_hat > 1.05);
  CHECK_FALSE(slow.diagnostics->converged);
}

TEST_CASE("mcmc config validation") {
  const auto data = standard_normal_data(20, 1);
  McmcConfig cfg;
  cfg.chains = 1;
  CHECK_THROWS_AS(fit_posterior_mcmc(data, Uniform{-5, 5}, cfg), ValidationError);
  cfg = {};
  cfg.burn_in = cfg.iterations_per_chain;
  CHECK_THROWS_AS(fit_posterior_mcmc(data, Uniform{-5, 5}, cfg), ValidationError);
  cfg = {};
  cfg.proposal_sd = 0.0;
  CHECK_THROWS_AS(fit_posterior_mcmc(data, Uniform{-5, 5}, cfg), ValidationError);
}
