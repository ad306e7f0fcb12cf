#include "dacrank/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "dacrank/errors.hpp"
#include "dacrank/random.hpp"
#include "overloaded.hpp"

namespace dacrank {

namespace stdnormal {

double pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }
double log_pdf(double z) { return -kLogSqrt2Pi - 0.5 * z * z; }
double cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double ccdf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace stdnormal

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// 2 / (shape + 1/shape)
double skew_norm_const(double shape) { return 2.0 / (shape + 1.0 / shape); }

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Bisection for a decreasing-in-x tail function (upper tail) or an
// increasing one (lower tail).
double bisect_tail(const DistributionSpec& spec, double target, bool upper) {
  const double loc = location_of(spec);
  const double scale = scale_of(spec);
  auto tail = [&](double x) { return upper ? ccdf(spec, x) : cdf(spec, x); };

  // Bracket [lo, hi] with tail(lo) on one side of target and tail(hi) on the other.
  double step = scale;
  double lo = loc - step;
  double hi = loc + step;
  for (int i = 0; i < 200; ++i) {
    const bool lo_ok = upper ? tail(lo) >= target : tail(lo) <= target;
    const bool hi_ok = upper ? tail(hi) <= target : tail(hi) >= target;
    if (lo_ok && hi_ok) break;
    step *= 2.0;
    if (!lo_ok) lo = loc - step;
    if (!hi_ok) hi = loc + step;
  }

  const double tol = 1e-10 * scale;
  for (int i = 0; i < 400 && hi - lo > tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double t = tail(mid);
    const bool go_right = upper ? t > target : t < target;
    (go_right ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

void validate(const DistributionSpec& spec) {
  std::visit(overloaded{
                 [](const Normal& d) {
                   if (!std::isfinite(d.mean) || !std::isfinite(d.sd))
                     throw ValidationError("normal: parameters must be finite");
                   if (!(d.sd > 0.0)) throw ValidationError("normal: sd must be > 0");
                 },
                 [](const Uniform& d) {
                   if (!std::isfinite(d.lower) || !std::isfinite(d.upper))
                     throw ValidationError("uniform: bounds must be finite");
                   if (!(d.lower < d.upper))
                     throw ValidationError("uniform: lower must be < upper");
                 },
                 [](const SkewNormal& d) {
                   if (!std::isfinite(d.location) || !std::isfinite(d.scale) ||
                       !std::isfinite(d.shape))
                     throw ValidationError("skew_normal: parameters must be finite");
                   if (!(d.scale > 0.0)) throw ValidationError("skew_normal: scale must be > 0");
                   if (!(d.shape > 0.0)) throw ValidationError("skew_normal: shape must be > 0");
                 },
             },
             spec);
}

std::string family_name(const DistributionSpec& spec) {
  return std::visit(overloaded{
                        [](const Normal&) { return std::string("normal"); },
                        [](const Uniform&) { return std::string("uniform"); },
                        [](const SkewNormal&) { return std::string("skew_normal"); },
                    },
                    spec);
}

std::string to_inline(const DistributionSpec& spec) {
  return std::visit(
      overloaded{
          [](const Normal& d) { return "normal:" + fmt17(d.mean) + "," + fmt17(d.sd); },
          [](const Uniform& d) { return "uniform:" + fmt17(d.lower) + "," + fmt17(d.upper); },
          [](const SkewNormal& d) {
            return "skew_normal:" + fmt17(d.location) + "," + fmt17(d.scale) + "," +
                   fmt17(d.shape);
          },
      },
      spec);
}

double location_of(const DistributionSpec& spec) {
  return std::visit(overloaded{
                        [](const Normal& d) { return d.mean; },
                        [](const Uniform& d) { return 0.5 * (d.lower + d.upper); },
                        [](const SkewNormal& d) { return d.location; },
                    },
                    spec);
}

double scale_of(const DistributionSpec& spec) {
  return std::visit(overloaded{
                        [](const Normal& d) { return d.sd; },
                        [](const Uniform& d) { return d.upper - d.lower; },
                        [](const SkewNormal& d) { return d.scale * std::max(d.shape, 1.0 / d.shape); },
                    },
                    spec);
}

double log_density(const DistributionSpec& spec, double x) {
  validate(spec);
  return std::visit(overloaded{
                        [x](const Normal& d) {
                          return stdnormal::log_pdf((x - d.mean) / d.sd) - std::log(d.sd);
                        },
                        [x](const Uniform& d) {
                          if (x < d.lower || x > d.upper) return kNegInf;
                          return -std::log(d.upper - d.lower);
                        },
                        [x](const SkewNormal& d) {
                          const double z = (x - d.location) / d.scale;
                          const double u = z >= 0.0 ? z / d.shape : z * d.shape;
                          return std::log(skew_norm_const(d.shape)) - std::log(d.scale) +
                                 stdnormal::log_pdf(u);
                        },
                    },
                    spec);
}

double density(const DistributionSpec& spec, double x) {
  validate(spec);
  return std::visit(overloaded{
                        [x](const Normal& d) { return stdnormal::pdf((x - d.mean) / d.sd) / d.sd; },
                        [x](const Uniform& d) {
                          if (x < d.lower || x > d.upper) return 0.0;
                          return 1.0 / (d.upper - d.lower);
                        },
                        [x](const SkewNormal& d) {
                          const double z = (x - d.location) / d.scale;
                          const double u = z >= 0.0 ? z / d.shape : z * d.shape;
                          return skew_norm_const(d.shape) / d.scale * stdnormal::pdf(u);
                        },
                    },
                    spec);
}

Eigen::ArrayXd density(const DistributionSpec& spec, const Eigen::Ref<const Eigen::ArrayXd>& xs) {
  return xs.unaryExpr([&spec](double x) { return density(spec, x); });
}

Eigen::ArrayXd log_density(const DistributionSpec& spec,
                           const Eigen::Ref<const Eigen::ArrayXd>& xs) {
  return xs.unaryExpr([&spec](double x) { return log_density(spec, x); });
}

double cdf(const DistributionSpec& spec, double x) {
  validate(spec);
  return std::visit(overloaded{
                        [x](const Normal& d) { return stdnormal::cdf((x - d.mean) / d.sd); },
                        [x](const Uniform& d) {
                          return std::clamp((x - d.lower) / (d.upper - d.lower), 0.0, 1.0);
                        },
                        [x](const SkewNormal& d) {
                          const double z = (x - d.location) / d.scale;
                          const double c = skew_norm_const(d.shape);
                          if (z < 0.0) return c / d.shape * stdnormal::cdf(d.shape * z);
                          return 1.0 - c * d.shape * stdnormal::ccdf(z / d.shape);
                        },
                    },
                    spec);
}

double ccdf(const DistributionSpec& spec, double x) {
  validate(spec);
  return std::visit(overloaded{
                        [x](const Normal& d) { return stdnormal::ccdf((x - d.mean) / d.sd); },
                        [x](const Uniform& d) {
                          return std::clamp((d.upper - x) / (d.upper - d.lower), 0.0, 1.0);
                        },
                        [x](const SkewNormal& d) {
                          const double z = (x - d.location) / d.scale;
                          const double c = skew_norm_const(d.shape);
                          if (z >= 0.0) return c * d.shape * stdnormal::ccdf(z / d.shape);
                          return 1.0 - c / d.shape * stdnormal::cdf(d.shape * z);
                        },
                    },
                    spec);
}

double tail_quantile(const DistributionSpec& spec, double tail, bool upper) {
  validate(spec);
  if (!(tail > 0.0 && tail < 1.0)) throw DomainError("tail probability must lie in (0, 1)");
  if (const auto* u = std::get_if<Uniform>(&spec)) {
    const double w = u->upper - u->lower;
    return upper ? u->upper - tail * w : u->lower + tail * w;
  }
  return bisect_tail(spec, tail, upper);
}

double quantile(const DistributionSpec& spec, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: p must lie strictly inside (0, 1)");
  return p <= 0.5 ? tail_quantile(spec, p, false) : tail_quantile(spec, 1.0 - p, true);
}

Eigen::VectorXd sample(const DistributionSpec& spec, std::size_t n, std::uint64_t seed) {
  validate(spec);
  if (n == 0) throw ValidationError("sample: n must be >= 1");
  Rng rng = make_rng(seed);
  Eigen::VectorXd out(static_cast<Eigen::Index>(n));
  std::visit(overloaded{
                 [&](const Normal& d) {
                   std::normal_distribution<double> z(0.0, 1.0);
                   for (auto& v : out) v = d.mean + d.sd * z(rng);
                 },
                 [&](const Uniform& d) {
                   std::uniform_real_distribution<double> u(d.lower, d.upper);
                   for (auto& v : out) v = u(rng);
                 },
                 [&](const SkewNormal& d) {
                   const double g2 = d.shape * d.shape;
                   std::bernoulli_distribution above(g2 / (1.0 + g2));
                   std::normal_distribution<double> z(0.0, 1.0);
                   for (auto& v : out) {
                     const bool up = above(rng);
                     const double mag = std::abs(z(rng));
                     v = up ? d.location + d.scale * d.shape * mag
                            : d.location - d.scale * mag / d.shape;
                   }
                 },
             },
             spec);
  return out;
}

EffectiveSupport effective_support(const DistributionSpec& spec, double epsilon) {
  validate(spec);
  if (!(epsilon > 0.0 && epsilon < 0.5))
    throw ValidationError("effective_support: epsilon must lie in (0, 0.5)");
  if (const auto* u = std::get_if<Uniform>(&spec)) return {u->lower, u->upper, 1.0};

  double loc = 0.0;
  double below = 1.0;  // scale of the lower branch
  double above = 1.0;  // scale of the upper branch
  if (const auto* n = std::get_if<Normal>(&spec)) {
    loc = n->mean;
    below = above = n->sd;
  } else {
    const auto& s = std::get<SkewNormal>(spec);
    loc = s.location;
    below = s.scale / s.shape;
    above = s.scale * s.shape;
  }
  const double q_lo = tail_quantile(spec, 0.5 * epsilon, false);
  const double q_hi = tail_quantile(spec, 0.5 * epsilon, true);
  EffectiveSupport out;
  out.lower = loc + std::floor((q_lo - loc) / below) * below;
  out.upper = loc + std::ceil((q_hi - loc) / above) * above;
  out.covered_mass = 1.0 - cdf(spec, out.lower) - ccdf(spec, out.upper);
  return out;
}

}  // namespace dacrank
