#include "dacrank/sensitivity.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "dacrank/errors.hpp"

namespace dacrank {

namespace {

constexpr double kZeroKl = 1e-14;

Eigen::VectorXd average_ranks(const Eigen::VectorXd& v) {
  const auto n = v.size();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v(a) < v(b); });
  Eigen::VectorXd ranks(n);
  for (Eigen::Index i = 0; i < n;) {
    Eigen::Index j = i;
    while (j + 1 < n && v(idx[j + 1]) == v(idx[i])) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Eigen::Index k = i; k <= j; ++k) ranks(idx[k]) = r;
    i = j + 1;
  }
  return ranks;
}

int sign(double x) { return (x > 0.0) - (x < 0.0); }

int compare(double a, double b) {
  if (a == b) return 0;
  return a < b ? -1 : 1;
}

}  // namespace

void GridConfig::validate() const {
  if (mean_offsets.steps < 2 || sds.steps < 2) throw ValidationError("grid: steps must be >= 2");
  if (!(sds.lower > 0.0)) throw ValidationError("grid: sd range lower bound must be > 0");
  if (!(mean_offsets.lower < mean_offsets.upper) || !(sds.lower < sds.upper))
    throw ValidationError("grid: ranges must be increasing");
  if (benchmarks.empty()) throw ValidationError("grid: need at least one benchmark");
  for (const auto& b : benchmarks) dacrank::validate(b.spec);
  quadrature.validate();
}

std::vector<NamedBenchmark> default_benchmarks() {
  return {
      {"A", Normal{0.0, 100.0}},
      {"B", Normal{0.0, 1.0}},
      {"C", Uniform{-50.0, 50.0}},
      {"D", Normal{5.0, std::sqrt(0.5)}},
  };
}

Dataset materialize(const DataSource& source) {
  if (const auto* g = std::get_if<GeneratedData>(&source)) return Dataset{sample(g->spec, g->n, g->seed)};
  return std::get<Dataset>(source);
}

double score_cell(const Normal& posterior, double benchmark_kl, double mean, double sd,
                  const QuadratureConfig& cfg) {
  return kl(posterior, Normal{mean, sd}, cfg).value / benchmark_kl;
}

GridResult run_grid(const GridConfig& cfg) {
  cfg.validate();
  const Dataset data = materialize(cfg.data);
  data.validate();

  GridResult result;
  result.n = data.size();
  result.data_mean = data.mean();
  result.data_sd = data.sd();
  result.mean_offsets = cfg.mean_offsets.values();
  result.means = result.mean_offsets.array() + result.data_mean;
  result.sds = cfg.sds.values();

  const Eigen::Index rows = result.means.size();
  const Eigen::Index cols = result.sds.size();
  for (const auto& b : cfg.benchmarks) {
    GridPanel panel;
    panel.id = b.id;
    panel.benchmark = b.spec;
    try {
      panel.posterior = fit_posterior(data, b.spec);
      const auto bkl = kl(panel.posterior->summary, b.spec, cfg.quadrature);
      panel.benchmark_kl = bkl.value;
      if (bkl.infinite || !std::isfinite(bkl.value))
        panel.error = "benchmark KL is infinite";
      else if (bkl.value <= kZeroKl)
        panel.error = "benchmark KL is zero";
    } catch (const std::exception& e) {
      panel.error = e.what();
    }
    if (panel.ok()) panel.dac.resize(rows, cols);
    result.panels.push_back(std::move(panel));
  }

  // Flatten (panel, row, col) into one work list; each slot is written once.
  std::vector<std::size_t> live;
  for (std::size_t p = 0; p < result.panels.size(); ++p)
    if (result.panels[p].ok()) live.push_back(p);
  const std::size_t cells = static_cast<std::size_t>(rows * cols);
  const std::size_t total = live.size() * cells;

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < total; i = next.fetch_add(1)) {
      auto& panel = result.panels[live[i / cells]];
      const auto cell = static_cast<Eigen::Index>(i % cells);
      const Eigen::Index r = cell / cols;
      const Eigen::Index c = cell % cols;
      panel.dac(r, c) = score_cell(panel.posterior->summary, panel.benchmark_kl, result.means(r),
                                   result.sds(c), cfg.quadrature);
    }
  };
  std::size_t threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(total, 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return result;
}

RankAgreement compare_rank_stability(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                     const Eigen::Ref<const Eigen::MatrixXd>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ValidationError("compare_rank_stability: matrices differ in shape");
  if (a.size() < 2) throw ValidationError("compare_rank_stability: need at least 2 cells");

  // Row-major flattening, matching the CSV layout.
  Eigen::VectorXd x(a.size());
  Eigen::VectorXd y(b.size());
  for (Eigen::Index r = 0, k = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c, ++k) {
      x(k) = a(r, c);
      y(k) = b(r, c);
    }

  long long concordant_minus_discordant = 0;
  long long ties_x = 0;
  long long ties_y = 0;
  long long pairs = 0;
  const Eigen::Index n = x.size();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const int sx = compare(x(i), x(j));
      const int sy = compare(y(i), y(j));
      ++pairs;
      if (sx == 0) ++ties_x;
      if (sy == 0) ++ties_y;
      concordant_minus_discordant += sign(static_cast<double>(sx * sy));
    }
  RankAgreement out;
  const double denom = std::sqrt(static_cast<double>(pairs - ties_x) * static_cast<double>(pairs - ties_y));
  out.kendall_tau = denom > 0.0 ? static_cast<double>(concordant_minus_discordant) / denom : 0.0;

  const Eigen::VectorXd rx = average_ranks(x);
  const Eigen::VectorXd ry = average_ranks(y);
  const Eigen::VectorXd dx = rx.array() - rx.mean();
  const Eigen::VectorXd dy = ry.array() - ry.mean();
  const double norm = std::sqrt(dx.squaredNorm() * dy.squaredNorm());
  out.spearman_rho = norm > 0.0 ? dx.dot(dy) / norm : 0.0;
  return out;
}

double conflict_fraction(const Eigen::Ref<const Eigen::MatrixXd>& dac) {
  if (dac.size() == 0) throw ValidationError("conflict_fraction: empty matrix");
  return static_cast<double>((dac.array() > 1.0).count()) / static_cast<double>(dac.size());
}

}  // namespace dacrank
