#pragma once

#include <string>

#include "dacrank/distribution.hpp"

namespace dacrank {

enum class DensityFloorPolicy {
  /// Any region where q vanishes under non-negligible p mass makes KL infinite.
  infinite,
  /// q is clamped from below by `floor_value`. Exploratory use only; results
  /// carry `floor_applied`.
  floor,
};

struct QuadratureConfig {
  double relative_tolerance = 1e-8;
  int max_subdivisions = 2000;
  double support_epsilon = 1e-12;
  DensityFloorPolicy floor_policy = DensityFloorPolicy::infinite;
  double floor_value = 1e-300;

  void validate() const;
  friend bool operator==(const QuadratureConfig&, const QuadratureConfig&) = default;
};

struct KlResult {
  double value = 0.0;
  double estimated_error = 0.0;
  /// Mass of p left outside the integration domain.
  double truncated_mass = 0.0;
  bool infinite = false;
  /// Set when the quadrature stopped short of the requested tolerance.
  bool warning = false;
  bool floor_applied = false;
  std::string note;
};

/// Kullback-Leibler divergence of q from p: the integral of
/// p(x) log(p(x) / q(x)) over p's effective support. p is the reference
/// (preferred) distribution, q the approximation being scored.
KlResult kl(const DistributionSpec& p, const DistributionSpec& q, const QuadratureConfig& cfg = {});

/// Closed form for two normals.
double kl_closed_normal(const Normal& p, const Normal& q);
/// Throws DomainError unless both specs are normal.
double kl_closed_normal(const DistributionSpec& p, const DistributionSpec& q);

/// Closed form for a normal reference against a uniform. +inf when more than
/// `support_epsilon` of p lies outside the uniform's support.
double kl_closed_normal_uniform(const Normal& p, const Uniform& q, double support_epsilon = 1e-12);
double kl_closed_normal_uniform(const DistributionSpec& p, const DistributionSpec& q,
                                double support_epsilon = 1e-12);

}  // namespace dacrank
