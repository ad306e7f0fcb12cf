// dacrank: score and rank expert priors with the Data Agreement Criterion.
//
//   dacrank rank --data y.csv --priors experts.json --benchmark uniform:0,5 --out report.json
//   dacrank sensitivity --out-dir grids/ --seed 1
//   dacrank kl --p normal:0,1 --q normal:0.5,1
//   dacrank serve --port 8080
//   dacrank verify --report report.json

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "dacrank/dac.hpp"
#include "dacrank/documents.hpp"
#include "dacrank/errors.hpp"
#include "dacrank/pipeline.hpp"
#include "dacrank/sensitivity.hpp"
#include "dacrank/service.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

using namespace dacrank;

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << text;
}

struct RankArgs {
  std::string data;
  std::string posterior;
  std::string priors;
  std::string benchmark = "uniform:0,5";
  std::string method = "analytic";
  std::uint64_t seed = 0;
  std::string out;
  double quad_tol = 1e-8;
  bool timestamp = false;
};

int run_rank_command(const RankArgs& args) {
  RankRequest req;
  std::map<std::string, std::string> digests;
  if (!args.data.empty()) {
    const auto bytes = read_file(args.data);
    req.source = parse_dataset_csv(bytes);
    digests["data"] = sha256_hex(bytes);
  } else {
    const auto spec = parse_inline_spec(args.posterior);
    if (!std::holds_alternative<Normal>(spec)) throw ValidationError("--posterior must be a normal spec");
    req.source = std::get<Normal>(spec);
    digests["posterior"] = sha256_hex(to_inline(spec));
  }
  const auto prior_bytes = read_file(args.priors);
  json prior_json;
  try {
    prior_json = json::parse(prior_bytes);
  } catch (const json::parse_error& e) {
    throw ValidationError(args.priors + ": invalid JSON: " + e.what());
  }
  req.experts = prior_set_from_json(prior_json).experts;
  digests["priors"] = sha256_hex(prior_bytes);
  req.benchmark = parse_inline_spec(args.benchmark);
  req.method = args.method == "mcmc" ? PosteriorMethod::mcmc : PosteriorMethod::analytic;
  req.mcmc.seed = args.seed;
  req.quadrature.relative_tolerance = args.quad_tol;

  auto report = run_rank(req);
  if (args.timestamp) report.provenance.timestamp = utc_timestamp();

  std::cout << format_report_table(report);
  std::cout << rank_stability_note(report) << "\n";
  const auto& post = report.posterior;
  if (post.diagnostics && !post.diagnostics->converged)
    std::cout << "warning: MCMC did not converge (r_hat = " << post.diagnostics->r_hat << ")\n";
  for (const auto& w : report.provenance.warnings) std::cout << "warning: " << w << "\n";
  if (!args.out.empty()) write_text(args.out, dump(report_document(report, digests)));
  return 0;
}

struct SensitivityArgs {
  std::string out_dir;
  std::uint64_t seed = 0;
  std::size_t n = 100;
  std::optional<std::size_t> steps;
  std::size_t mean_steps = 81;
  std::size_t sd_steps = 30;
  std::size_t threads = 0;
  double quad_tol = 1e-8;
};

int run_sensitivity_command(const SensitivityArgs& args) {
  GridConfig cfg;
  cfg.data = GeneratedData{Normal{0.0, 1.0}, args.n, args.seed};
  cfg.mean_offsets.steps = args.steps.value_or(args.mean_steps);
  cfg.sds.steps = args.steps.value_or(args.sd_steps);
  cfg.benchmarks = default_benchmarks();
  cfg.threads = args.threads;
  cfg.quadrature.relative_tolerance = args.quad_tol;
  const auto grid = run_grid(cfg);

  std::filesystem::create_directories(args.out_dir);
  json panels = json::array();
  int status = 0;
  for (const auto& panel : grid.panels) {
    json meta{{"id", panel.id}, {"benchmark", spec_to_json(panel.benchmark)}};
    if (!panel.ok()) {
      meta["error"] = panel.error;
      std::cout << "panel " << panel.id << ": error: " << panel.error << "\n";
      status = kExitNumerical;
      panels.push_back(std::move(meta));
      continue;
    }
    const auto file = "panel_" + panel.id + ".csv";
    std::ofstream out(std::filesystem::path(args.out_dir) / file, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + file + "'");
    write_heatmap_csv(out, grid, panel);
    meta["file"] = file;
    meta["posterior"] = to_json(*panel.posterior);
    meta["benchmark_kl"] = panel.benchmark_kl;
    meta["conflict_fraction"] = conflict_fraction(panel.dac);
    panels.push_back(std::move(meta));
    std::printf("panel %s  %-28s benchmark KL %.4f  conflict fraction %.4f\n", panel.id.c_str(),
                to_inline(panel.benchmark).c_str(), panel.benchmark_kl, conflict_fraction(panel.dac));
  }
  json axes{{"mean_offsets", std::vector<double>(grid.mean_offsets.begin(), grid.mean_offsets.end())},
            {"means", std::vector<double>(grid.means.begin(), grid.means.end())},
            {"sds", std::vector<double>(grid.sds.begin(), grid.sds.end())}};
  json meta{{"tool", "dacrank"},
            {"tool_version", kToolVersion},
            {"seed", args.seed},
            {"data", {{"n", grid.n}, {"mean", grid.data_mean}, {"sd", grid.data_sd}}},
            {"axes", std::move(axes)},
            {"layout", "rows ordered by mean (outer) then sd (inner)"},
            {"benchmark_note",
             "second parameters of the original normal benchmarks read as variances: "
             "N(0,10000) -> sd 100, N(5,0.5) -> sd sqrt(0.5)"},
            {"panels", std::move(panels)}};
  write_text(std::filesystem::path(args.out_dir) / "grid.json", dump(meta));
  return status;
}

int run_kl_command(const std::string& p, const std::string& q, double quad_tol, std::optional<double> floor) {
  QuadratureConfig cfg;
  cfg.relative_tolerance = quad_tol;
  if (floor) {
    cfg.floor_policy = DensityFloorPolicy::floor;
    cfg.floor_value = *floor;
  }
  const auto r = kl(parse_inline_spec(p), parse_inline_spec(q), cfg);
  char line[256];
  if (r.infinite)
    std::snprintf(line, sizeof line, "value=inf estimated_error=0 truncated_mass=%.3g infinite=true", r.truncated_mass);
  else
    std::snprintf(line, sizeof line, "value=%.10g estimated_error=%.3g truncated_mass=%.3g infinite=false", r.value,
                  r.estimated_error, r.truncated_mass);
  std::cout << line;
  if (r.floor_applied) std::cout << " floor_applied=true";
  if (r.warning) std::cout << " warning=\"" << r.note << "\"";
  std::cout << "\n";
  return 0;
}

int run_verify_command(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": invalid JSON: " + e.what());
  }
  const auto stored = report_from_document(doc);
  const auto fresh = reevaluate_report_document(doc);
  double worst = 0.0;
  for (const auto& s : stored.entries)
    for (const auto& f : fresh.entries)
      if (s.expert_id == f.expert_id && !(std::isinf(s.dac_value) && std::isinf(f.dac_value)))
        worst = std::max(worst, std::abs(s.dac_value - f.dac_value));
  std::printf("max |DAC difference| = %.3g\n", worst);
  return worst <= 1e-9 ? 0 : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rank expert priors against data with the Data Agreement Criterion"};
  app.require_subcommand(1);

  RankArgs rank_args;
  auto* rank = app.add_subcommand("rank", "Fit the benchmark posterior and rank expert priors");
  auto* data_opt = rank->add_option("--data", rank_args.data, "CSV with one numeric column")->check(CLI::ExistingFile);
  auto* post_opt = rank->add_option("--posterior", rank_args.posterior, "Posterior supplied directly, e.g. normal:2.29,0.094");
  data_opt->excludes(post_opt);
  rank->add_option("--priors", rank_args.priors, "Prior set JSON document")->required()->check(CLI::ExistingFile);
  rank->add_option("--benchmark", rank_args.benchmark, "Benchmark prior, e.g. uniform:0,5")->capture_default_str();
  rank->add_option("--method", rank_args.method, "Posterior fit")->check(CLI::IsMember({"analytic", "mcmc"}))->capture_default_str();
  rank->add_option("--seed", rank_args.seed, "MCMC seed")->capture_default_str();
  rank->add_option("--out", rank_args.out, "Write the JSON report here");
  rank->add_option("--quad-tol", rank_args.quad_tol, "Quadrature relative tolerance")->capture_default_str();
  rank->add_flag("--timestamp", rank_args.timestamp, "Record the UTC time in the report");

  SensitivityArgs sens_args;
  auto* sens = app.add_subcommand("sensitivity", "Benchmark-influence heatmaps over a grid of normal experts");
  sens->add_option("--out-dir", sens_args.out_dir, "Directory for panel CSVs")->required();
  sens->add_option("--seed", sens_args.seed, "Data seed")->capture_default_str();
  sens->add_option("--n", sens_args.n, "Number of standard-normal observations")->capture_default_str();
  sens->add_option("--steps", sens_args.steps, "Grid steps on both axes");
  sens->add_option("--mean-steps", sens_args.mean_steps, "Grid steps over mean offsets")->capture_default_str();
  sens->add_option("--sd-steps", sens_args.sd_steps, "Grid steps over sds")->capture_default_str();
  sens->add_option("--threads", sens_args.threads, "Worker threads (0 = all cores)")->capture_default_str();
  sens->add_option("--quad-tol", sens_args.quad_tol, "Quadrature relative tolerance")->capture_default_str();

  std::string kl_p;
  std::string kl_q;
  double kl_tol = 1e-8;
  std::optional<double> kl_floor;
  auto* klc = app.add_subcommand("kl", "KL divergence of q from p");
  klc->add_option("--p", kl_p, "Reference distribution")->required();
  klc->add_option("--q", kl_q, "Approximating distribution")->required();
  klc->add_option("--quad-tol", kl_tol, "Quadrature relative tolerance")->capture_default_str();
  klc->add_option("--floor", kl_floor, "Clamp q's density from below instead of returning inf");

  std::string host = "127.0.0.1";
  int port = 8080;
  auto* srv = app.add_subcommand("serve", "Stateless HTTP+JSON service");
  srv->add_option("--host", host)->capture_default_str();
  srv->add_option("--port", port)->capture_default_str();

  std::string report_path;
  auto* verify = app.add_subcommand("verify", "Re-evaluate a report from its embedded inputs");
  verify->add_option("--report", report_path)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (rank->parsed()) {
      if (rank_args.data.empty() && rank_args.posterior.empty())
        throw ValidationError("rank: one of --data or --posterior is required");
      return run_rank_command(rank_args);
    }
    if (sens->parsed()) return run_sensitivity_command(sens_args);
    if (klc->parsed()) return run_kl_command(kl_p, kl_q, kl_tol, kl_floor);
    if (srv->parsed()) {
      std::cerr << "listening on " << host << ":" << port << "\n";
      if (!serve(host, port)) {
        std::cerr << "error: cannot bind " << host << ":" << port << "\n";
        return kExitUsage;
      }
      return 0;
    }
    if (verify->parsed()) return run_verify_command(report_path);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
