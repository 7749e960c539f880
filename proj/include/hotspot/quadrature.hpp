#pragma once

#include <array>
#include <cmath>
#include <queue>
#include <vector>

namespace hotspot::quadrature {

struct Result {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
  bool converged = false;
};

namespace detail {

// Kronrod 15-point nodes; odd indices (1,3,5) and the centre are shared
// with the embedded 7-point Gauss rule.
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
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gauss_kronrod_15(const F& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(centre);
  double kronrod = kKronrodWeights[7] * fc;
  double gauss = kGaussWeights[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double pair = f(centre - dx) + f(centre + dx);
    kronrod += kKronrodWeights[i] * pair;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * pair;
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.
/// The segment with the largest error estimate is bisected until the summed
/// estimate drops below max(abs_tol, rel_tol*|value|).
template <class F>
Result integrate(const F& f, double a, double b, double abs_tol,
                 double rel_tol = 1e-12, int max_segments = 2000) {
  Result out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  std::priority_queue<detail::Segment> work;
  auto first = detail::gauss_kronrod_15(f, a, b);
  out.evaluations = 15;
  double value = first.value;
  double error = first.error;
  work.push(first);

  while (static_cast<int>(work.size()) < max_segments) {
    if (error <= std::max(abs_tol, rel_tol * std::abs(value))) {
      out.converged = true;
      break;
    }
    auto worst = work.top();
    work.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    auto left = detail::gauss_kronrod_15(f, worst.a, mid);
    auto right = detail::gauss_kronrod_15(f, mid, worst.b);
    out.evaluations += 30;
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    work.push(left);
    work.push(right);
  }
  if (!out.converged)
    out.converged = error <= std::max(abs_tol, rel_tol * std::abs(value));

  // Re-sum from the segments to shed the running-sum rounding drift.
  value = 0.0;
  error = 0.0;
  while (!work.empty()) {
    value += work.top().value;
    error += work.top().error;
    work.pop();
  }
  out.value = value;
  out.error = error;
  return out;
}

}  // namespace hotspot::quadrature
