#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <vector>

namespace dacrank {

struct QuadratureOutcome {
  double value = 0.0;
  double error = 0.0;
  int subdivisions = 0;
  bool converged = false;
  /// Stopped because the error estimate reached the rounding floor of the
  /// integrand rather than the requested relative tolerance.
  bool roundoff_limited = false;
};

namespace detail {

// Gauss-Kronrod 7/15 pair on [-1, 1].
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a = 0.0;
  double b = 0.0;
  double value = 0.0;
  double error = 0.0;
  double abs_value = 0.0;
  friend bool operator<(const Segment& l, const Segment& r) { return l.error < r.error; }
};

template <class F>
Segment gauss_kronrod15(F& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(centre);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  double abs_sum = std::abs(kronrod);
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double f1 = f(centre - dx);
    const double f2 = f(centre + dx);
    kronrod += kKronrodWeights[i] * (f1 + f2);
    abs_sum += kKronrodWeights[i] * (std::abs(f1) + std::abs(f2));
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * (f1 + f2);
  }
  Segment s;
  s.a = a;
  s.b = b;
  s.value = kronrod * half;
  s.error = std::abs((kronrod - gauss) * half);
  s.abs_value = abs_sum * std::abs(half);
  return s;
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod integration over [breaks.front(), breaks.back()].
/// Interior breakpoints seed the initial partition (kinks, support edges).
/// The interval with the largest error estimate is halved until the summed
/// error is at most `relative_tolerance * |value|` or `max_subdivisions`
/// halvings have been spent.
template <class F>
QuadratureOutcome integrate_adaptive(F&& f, std::span<const double> breaks,
                                     double relative_tolerance, int max_subdivisions) {
  QuadratureOutcome out;
  std::vector<double> pts(breaks.begin(), breaks.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 2) {
    out.converged = true;
    return out;
  }

  std::priority_queue<detail::Segment> heap;
  double value = 0.0;
  double error = 0.0;
  double abs_value = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    auto s = detail::gauss_kronrod15(f, pts[i], pts[i + 1]);
    value += s.value;
    error += s.error;
    abs_value += s.abs_value;
    heap.push(s);
  }

  constexpr double kEps = std::numeric_limits<double>::epsilon();
  auto done = [&] { return error <= relative_tolerance * std::abs(value); };
  auto at_roundoff = [&] { return error <= 50.0 * kEps * abs_value; };

  while (!done() && !at_roundoff() && out.subdivisions < max_subdivisions) {
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push(worst);
      break;
    }
    const auto left = detail::gauss_kronrod15(f, worst.a, mid);
    const auto right = detail::gauss_kronrod15(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    abs_value += left.abs_value + right.abs_value - worst.abs_value;
    heap.push(left);
    heap.push(right);
    ++out.subdivisions;
  }

  // Re-sum to shed drift from the running updates.
  value = error = 0.0;
  while (!heap.empty()) {
    value += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  out.value = value;
  out.error = error;
  out.converged = error <= relative_tolerance * std::abs(value);
  out.roundoff_limited = !out.converged && error <= 50.0 * kEps * abs_value;
  return out;
}

}  // namespace dacrank
