#include "dacrank/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dacrank/errors.hpp"
#include "dacrank/quadrature.hpp"

namespace dacrank {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNegativeSlack = 1e-10;

// Points where the density has a kink or jump.
void add_breaks(const DistributionSpec& spec, std::vector<double>& out) {
  if (const auto* s = std::get_if<SkewNormal>(&spec)) out.push_back(s->location);
  if (const auto* u = std::get_if<Uniform>(&spec)) {
    out.push_back(u->lower);
    out.push_back(u->upper);
  }
}

}  // namespace

void QuadratureConfig::validate() const {
  if (!(relative_tolerance > 0.0)) throw ValidationError("quadrature: relative_tolerance must be > 0");
  if (max_subdivisions < 1) throw ValidationError("quadrature: max_subdivisions must be >= 1");
  if (!(support_epsilon > 0.0 && support_epsilon < 0.5))
    throw ValidationError("quadrature: support_epsilon must lie in (0, 0.5)");
  if (floor_policy == DensityFloorPolicy::floor && !(floor_value > 0.0))
    throw ValidationError("quadrature: floor_value must be > 0");
}

KlResult kl(const DistributionSpec& p, const DistributionSpec& q, const QuadratureConfig& cfg) {
  validate(p);
  validate(q);
  cfg.validate();

  KlResult result;
  const auto support = effective_support(p, cfg.support_epsilon);
  double lo = support.lower;
  double hi = support.upper;
  result.truncated_mass = std::max(0.0, 1.0 - support.covered_mass);

  double log_floor = -kInf;
  if (const auto* u = std::get_if<Uniform>(&q)) {
    const double outside = (lo < u->lower ? cdf(p, u->lower) : 0.0) +
                           (hi > u->upper ? ccdf(p, u->upper) : 0.0);
    if (outside > cfg.support_epsilon) {
      if (cfg.floor_policy == DensityFloorPolicy::infinite) {
        result.value = kInf;
        result.infinite = true;
        result.note = "q has zero density where p has mass";
        return result;
      }
      log_floor = std::log(cfg.floor_value);
      result.floor_applied = true;
      result.note = "q clamped below by floor value";
    } else {
      lo = std::max(lo, u->lower);
      hi = std::min(hi, u->upper);
      result.truncated_mass += outside;
    }
  }

  std::vector<double> breaks{lo, hi};
  add_breaks(p, breaks);
  add_breaks(q, breaks);
  std::erase_if(breaks, [&](double b) { return b < lo || b > hi; });

  auto integrand = [&](double x) {
    const double lp = log_density(p, x);
    if (lp == -kInf) return 0.0;
    const double lq = std::max(log_density(q, x), log_floor);
    return std::exp(lp) * (lp - lq);
  };
  const auto quad = integrate_adaptive(integrand, breaks, cfg.relative_tolerance,
                                       cfg.max_subdivisions);

  result.value = quad.value;
  result.estimated_error = quad.error;
  if (!quad.converged) {
    result.warning = true;
    if (!result.note.empty()) result.note += "; ";
    result.note += quad.roundoff_limited ? "error estimate limited by rounding"
                                         : "max_subdivisions exhausted before tolerance";
  }
  if (result.value < 0.0) {
    if (result.value < -kNegativeSlack) {
      result.warning = true;
      if (!result.note.empty()) result.note += "; ";
      result.note += "negative quadrature result clamped";
    }
    result.value = 0.0;
  }
  return result;
}

double kl_closed_normal(const Normal& p, const Normal& q) {
  validate(p);
  validate(q);
  const double d = p.mean - q.mean;
  return std::log(q.sd / p.sd) + (p.sd * p.sd + d * d) / (2.0 * q.sd * q.sd) - 0.5;
}

double kl_closed_normal(const DistributionSpec& p, const DistributionSpec& q) {
  const auto* pn = std::get_if<Normal>(&p);
  const auto* qn = std::get_if<Normal>(&q);
  if (!pn || !qn) throw DomainError("kl_closed_normal: both distributions must be normal");
  return kl_closed_normal(*pn, *qn);
}

double kl_closed_normal_uniform(const Normal& p, const Uniform& q, double support_epsilon) {
  validate(p);
  validate(q);
  const double outside = stdnormal::cdf((q.lower - p.mean) / p.sd) +
                         stdnormal::ccdf((q.upper - p.mean) / p.sd);
  if (outside >= support_epsilon) return kInf;
  constexpr double kTwoPiE = 2.0 * 3.14159265358979323846 * 2.71828182845904523536;
  return std::log(q.upper - q.lower) - 0.5 * std::log(kTwoPiE * p.sd * p.sd);
}

double kl_closed_normal_uniform(const DistributionSpec& p, const DistributionSpec& q,
                                double support_epsilon) {
  const auto* pn = std::get_if<Normal>(&p);
  const auto* qu = std::get_if<Uniform>(&q);
  if (!pn || !qu) throw DomainError("kl_closed_normal_uniform: expects (normal, uniform)");
  return kl_closed_normal_uniform(*pn, *qu, support_epsilon);
}

}  // namespace dacrank
