#pragma once

// Test-only oracles and generators. Nothing here calls into the library's
// quadrature, so these can check it independently.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "dacrank/distribution.hpp"
#include "dacrank/posterior.hpp"

namespace dacrank::testing {

/// Composite Simpson on [a, b] with `panels` (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels = 20000) {
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  double sum = f(a) + f(b);
  for (int i = 1; i < panels; ++i) sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

/// Simpson over [a, b] split at interior breakpoints (kinks).
inline double simpson_split(const std::function<double(double)>& f, double a, double b,
                            std::vector<double> breaks, int panels = 20000) {
  breaks.push_back(a);
  breaks.push_back(b);
  std::erase_if(breaks, [&](double x) { return x < a || x > b; });
  std::sort(breaks.begin(), breaks.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
    if (breaks[i + 1] > breaks[i]) total += simpson(f, breaks[i], breaks[i + 1], panels);
  return total;
}

inline Normal random_normal(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mean(-5.0, 5.0);
  std::uniform_real_distribution<double> log_sd(std::log(0.05), std::log(10.0));
  return {mean(rng), std::exp(log_sd(rng))};
}

inline SkewNormal random_skew_normal(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> loc(-5.0, 5.0);
  std::uniform_real_distribution<double> log_scale(std::log(0.05), std::log(10.0));
  std::uniform_real_distribution<double> log_shape(std::log(0.3), std::log(3.0));
  return {loc(rng), std::exp(log_scale(rng)), std::exp(log_shape(rng))};
}

inline Uniform random_uniform(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> lo(-10.0, 10.0);
  std::uniform_real_distribution<double> width(0.1, 20.0);
  const double a = lo(rng);
  return {a, a + width(rng)};
}

inline DistributionSpec random_spec(std::mt19937_64& rng) {
  switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
    case 0: return random_normal(rng);
    case 1: return random_uniform(rng);
    default: return random_skew_normal(rng);
  }
}

/// Seeded standard-normal sample of size n.
inline Dataset standard_normal_data(std::size_t n, std::uint64_t seed) {
  return Dataset{sample(Normal{0.0, 1.0}, n, seed)};
}

/// Posterior sd for which KL(N(m, sd) || U(0, 5)) is 2.55.
inline double reference_posterior_sd() {
  return std::exp(std::log(5.0) - 2.55) / std::sqrt(2.0 * M_PI * M_E);
}

}  // namespace dacrank::testing
