#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "dacrank/distribution.hpp"
#include "dacrank/divergence.hpp"
#include "dacrank/posterior.hpp"

namespace dacrank {

struct GeneratedData {
  DistributionSpec spec = Normal{0.0, 1.0};
  std::size_t n = 100;
  std::uint64_t seed = 0;
};

using DataSource = std::variant<GeneratedData, Dataset>;

struct AxisRange {
  double lower = 0.0;
  double upper = 1.0;
  std::size_t steps = 2;

  Eigen::VectorXd values() const {
    return Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(steps), lower, upper);
  }
};

struct NamedBenchmark {
  std::string id;
  DistributionSpec spec;
};

struct GridConfig {
  DataSource data = GeneratedData{};
  /// Expert means, as offsets from the sample mean.
  AxisRange mean_offsets{-4.0, 4.0, 81};
  AxisRange sds{0.1, 3.0, 30};
  std::vector<NamedBenchmark> benchmarks;
  QuadratureConfig quadrature;
  /// Worker threads; 0 picks the hardware concurrency.
  std::size_t threads = 0;

  void validate() const;
};

/// Four benchmark conditions, normal second parameters given as variances:
/// A N(0, var 10000), B N(0, var 1), C U(-50, 50), D N(5, var 0.5).
std::vector<NamedBenchmark> default_benchmarks();

struct GridPanel {
  std::string id;
  DistributionSpec benchmark;
  std::optional<PosteriorSummary> posterior;
  double benchmark_kl = 0.0;
  /// Rows follow mean offsets, columns follow sds.
  Eigen::MatrixXd dac;
  /// Non-empty when this panel could not be computed.
  std::string error;

  bool ok() const { return error.empty(); }
};

struct GridResult {
  Eigen::VectorXd mean_offsets;
  /// Absolute expert means: sample mean + offset.
  Eigen::VectorXd means;
  Eigen::VectorXd sds;
  std::size_t n = 0;
  double data_mean = 0.0;
  double data_sd = 0.0;
  std::vector<GridPanel> panels;
};

Dataset materialize(const DataSource& source);

/// DAC of a Normal(mean, sd) expert against `posterior`.
double score_cell(const Normal& posterior, double benchmark_kl, double mean, double sd,
                  const QuadratureConfig& cfg);

/// Sweeps the (mean, sd) lattice of normal experts against every benchmark.
/// A benchmark whose KL is zero or infinite gets an error entry; the other
/// panels are unaffected.
GridResult run_grid(const GridConfig& cfg);

struct RankAgreement {
  double kendall_tau = 0.0;
  double spearman_rho = 0.0;
};

/// Kendall tau-b and Spearman rho (average ranks) over flattened cells.
RankAgreement compare_rank_stability(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                     const Eigen::Ref<const Eigen::MatrixXd>& b);

/// Share of cells with DAC > 1.
double conflict_fraction(const Eigen::Ref<const Eigen::MatrixXd>& dac);

}  // namespace dacrank
