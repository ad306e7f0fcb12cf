#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dacrank/divergence.hpp"
#include "dacrank/errors.hpp"
#include "dacrank/sensitivity.hpp"

using namespace dacrank;

namespace {

GridConfig small_grid() {
  GridConfig cfg;
  cfg.data = GeneratedData{Normal{0, 1}, 100, 3};
  cfg.mean_offsets = {-2, 2, 9};
  cfg.sds = {0.2, 2.0, 7};
  cfg.benchmarks = default_benchmarks();
  cfg.threads = 1;
  return cfg;
}

}  // namespace

TEST_CASE("default benchmarks") {
  const auto b = default_benchmarks();
  REQUIRE(b.size() == 4);
  CHECK(b[0].id == "A");
  CHECK(std::get<Normal>(b[0].spec) == Normal{0, 100});
  CHECK(std::get<Normal>(b[1].spec) == Normal{0, 1});
  CHECK(std::get<Uniform>(b[2].spec) == Uniform{-50, 50});
  CHECK(std::get<Normal>(b[3].spec).sd == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("grid shape and cell independence") {
  const auto cfg = small_grid();
  const auto g = run_grid(cfg);
  CHECK(g.n == 100);
  REQUIRE(g.panels.size() == 4);
  CHECK(g.means.size() == 9);
  CHECK(g.sds.size() == 7);
  for (const auto& p : g.panels) {
    REQUIRE(p.ok());
    CHECK(p.dac.rows() == 9);
    CHECK(p.dac.cols() == 7);
    // Any one cell equals an isolated evaluation.
    for (int i : {0, 4, 8})
      for (int j : {0, 3, 6}) {
        const double alone = score_cell(p.posterior->summary, p.benchmark_kl, g.means(i), g.sds(j), cfg.quadrature);
        CHECK(p.dac(i, j) == alone);
      }
  }
  CHECK(g.means(4) == doctest::Approx(g.data_mean).epsilon(1e-14));
}

TEST_CASE("scaling law: DAC ratios across benchmarks equal inverse KL ratios") {
  const auto g = run_grid(small_grid());
  const auto& a = g.panels[0];
  const auto& c = g.panels[2];
  // A and C share the same posterior (both effectively flat) up to tiny shrinkage.
  for (Eigen::Index i = 0; i < a.dac.rows(); ++i)
    for (Eigen::Index j = 0; j < a.dac.cols(); ++j) {
      const double kl_a = a.dac(i, j) * a.benchmark_kl;
      const double kl_c = c.dac(i, j) * c.benchmark_kl;
      CHECK(kl_a == doctest::Approx(kl_c).epsilon(1e-2));
    }
}

TEST_CASE("rank agreement statistics") {
  Eigen::MatrixXd x(4, 1), y(4, 1);
  x << 1, 2, 3, 4;
  y << 1, 3, 2, 4;
  const auto r = compare_rank_stability(x, y);
  CHECK(r.kendall_tau == doctest::Approx(2.0 / 3.0));
  CHECK(r.spearman_rho == doctest::Approx(0.8));

  const auto same = compare_rank_stability(x, x);
  CHECK(same.kendall_tau == doctest::Approx(1.0));
  CHECK(same.spearman_rho == doctest::Approx(1.0));
  const Eigen::MatrixXd neg = -x;
  const auto opposite = compare_rank_stability(x, neg);
  CHECK(opposite.kendall_tau == doctest::Approx(-1.0));
  CHECK(opposite.spearman_rho == doctest::Approx(-1.0));

  // Tied values use tau-b and averaged ranks.
  Eigen::MatrixXd t(4, 1);
  t << 1, 1, 2, 3;
  const auto tied = compare_rank_stability(x, t);
  CHECK(tied.kendall_tau == doctest::Approx(5.0 / std::sqrt(6.0 * 5.0)));

  CHECK_THROWS_AS(compare_rank_stability(x, Eigen::MatrixXd::Zero(3, 1)), ValidationError);
}

TEST_CASE("conflict fraction") {
  CHECK(conflict_fraction(Eigen::MatrixXd::Constant(3, 3, 0.5)) == 0.0);
  CHECK(conflict_fraction(Eigen::MatrixXd::Constant(3, 3, 2.0)) == 1.0);
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 1.0000001, 0.2, 5.0;
  CHECK(conflict_fraction(m) == 0.5);
}

TEST_CASE("a broken benchmark is isolated to its panel") {
  auto cfg = small_grid();
  cfg.benchmarks.push_back({"far", Uniform{100, 101}});
  const auto g = run_grid(cfg);
  REQUIRE(g.panels.size() == 5);
  CHECK_FALSE(g.panels[4].ok());
  for (int k = 0; k < 4; ++k) CHECK(g.panels[k].ok());
}

TEST_CASE("results are identical for any thread count") {
  auto cfg = small_grid();
  const auto one = run_grid(cfg);
  cfg.threads = 3;
  const auto three = run_grid(cfg);
  for (std::size_t k = 0; k < one.panels.size(); ++k) CHECK(one.panels[k].dac == three.panels[k].dac);
}

TEST_CASE("explicit datasets and validation") {
  GridConfig cfg = small_grid();
  cfg.data = Dataset{sample(Normal{3, 2}, 50, 1)};
  const auto g = run_grid(cfg);
  CHECK(g.n == 50);
  CHECK(g.data_mean == doctest::Approx(std::get<Dataset>(cfg.data).mean()));

  cfg.benchmarks.clear();
  CHECK_THROWS_AS(run_grid(cfg), ValidationError);
  cfg = small_grid();
  cfg.sds = {0.0, 1.0, 3};
  CHECK_THROWS_AS(run_grid(cfg), ValidationError);
  cfg = small_grid();
  cfg.mean_offsets.steps = 0;
  CHECK_THROWS_AS(run_grid(cfg), ValidationError);
}
