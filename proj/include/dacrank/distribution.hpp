#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>

#include <Eigen/Core>

namespace dacrank {

struct Normal {
  double mean = 0.0;
  double sd = 1.0;
  friend bool operator==(const Normal&, const Normal&) = default;
};

struct Uniform {
  double lower = 0.0;
  double upper = 1.0;
  friend bool operator==(const Uniform&, const Uniform&) = default;
};

/// Two-piece skew normal. With z = (x - location) / scale the density is
///
///   2 / (shape + 1/shape) / scale * phi(z / shape)   for z >= 0
///   2 / (shape + 1/shape) / scale * phi(shape * z)   for z <  0
///
/// so shape > 1 moves mass above `location` and P(X < location) is
/// 1 / (1 + shape^2). `location` and `scale` belong to the base normal
/// before skewing; they are not the moments of the result.
struct SkewNormal {
  double location = 0.0;
  double scale = 1.0;
  double shape = 1.0;
  friend bool operator==(const SkewNormal&, const SkewNormal&) = default;
};

using DistributionSpec = std::variant<Normal, Uniform, SkewNormal>;

/// Finite interval holding at least `covered_mass` of a distribution.
struct EffectiveSupport {
  double lower = 0.0;
  double upper = 0.0;
  double covered_mass = 1.0;
};

/// Throws ValidationError unless every parameter is finite, scales and shapes
/// are strictly positive, and uniform bounds satisfy lower < upper.
void validate(const DistributionSpec& spec);

/// "normal", "uniform" or "skew_normal".
std::string family_name(const DistributionSpec& spec);

/// Inline form "family:p1,p2[,p3]", parameters printed with 17 significant
/// digits.
std::string to_inline(const DistributionSpec& spec);

/// Centre and spread used for root bracketing and grid placement.
double location_of(const DistributionSpec& spec);
double scale_of(const DistributionSpec& spec);

double density(const DistributionSpec& spec, double x);
double log_density(const DistributionSpec& spec, double x);

Eigen::ArrayXd density(const DistributionSpec& spec, const Eigen::Ref<const Eigen::ArrayXd>& xs);
Eigen::ArrayXd log_density(const DistributionSpec& spec, const Eigen::Ref<const Eigen::ArrayXd>& xs);

double cdf(const DistributionSpec& spec, double x);
/// Upper tail 1 - cdf, evaluated without cancellation.
double ccdf(const DistributionSpec& spec, double x);

/// Inverse cdf by bisection. Throws DomainError unless 0 < p < 1.
double quantile(const DistributionSpec& spec, double p);

/// Point with `tail` probability above it (upper = true) or below it.
/// Accurate for tiny tail masses where 1 - tail rounds.
double tail_quantile(const DistributionSpec& spec, double tail, bool upper);

/// `n` seeded draws. Throws ValidationError when n == 0.
Eigen::VectorXd sample(const DistributionSpec& spec, std::size_t n, std::uint64_t seed);

/// Interval with at least 1 - epsilon of the mass. Normal and skew-normal
/// endpoints are pushed outwards to whole multiples of the branch scale, so a
/// skew normal with shape 1 gets exactly the normal's interval.
EffectiveSupport effective_support(const DistributionSpec& spec, double epsilon);

namespace stdnormal {

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
inline constexpr double kLogSqrt2Pi = 0.918938533204672741780329736406;

double pdf(double z);
double log_pdf(double z);
double cdf(double z);
double ccdf(double z);

}  // namespace stdnormal

}  // namespace dacrank
