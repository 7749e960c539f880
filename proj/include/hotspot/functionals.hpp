#pragma once

#include <cmath>
#include <vector>

#include "hotspot/dynamics.hpp"
#include "hotspot/grid.hpp"
#include "hotspot/material.hpp"

namespace hotspot {

struct FunctionalSnapshot {
  double t = 0.0;
  double psi_integral = 0.0;  // int psi(theta)
  double grad_u_sq = 0.0;     // int |u_x|^2
  double grad_ut_sq = 0.0;    // int |u_xt|^2
  double y_energy = 0.0;      // 1/2 int v^2 + a^2/2 int u^2
  double l2_u = 0.0;          // int u^2
  double l2_v = 0.0;          // int v^2
  double gamma0_so_far = 0.0; // gamma(running min of theta)
};

inline double l2_sq(std::span<const double> w, const Grid1D& grid) {
  std::vector<double> sq(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) sq[i] = w[i] * w[i];
  return integrate(sq, grid);
}

/// int psi(theta) by direct quadrature at every node.
inline double psi_integral(const Field& theta, const Grid1D& grid, const CoefficientLaw& law) {
  std::vector<double> psi(theta.size());
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = psi_eval(law, std::max(theta[i], 0.0));
  return integrate(psi, grid);
}

/// Throws DivergentIntegral when 1/gamma is not integrable.
inline FunctionalSnapshot snapshot(const State& s, const Params& p) {
  FunctionalSnapshot out;
  out.t = s.t;
  if (!psi_converges(p.law)) throw DivergentIntegral("psi undefined: 1/gamma not integrable");
  const PsiTable table(p.law, 10.0 * p.theta_blowup_threshold);
  std::vector<double> psi(s.theta.size());
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = table(std::max(s.theta[i], 0.0));
  out.psi_integral = integrate(psi, s.grid);
  out.grad_u_sq = grad_sq_integral(s.u.values, s.grid);
  out.grad_ut_sq = grad_sq_integral(s.u_t(p.a), s.grid);
  out.l2_u = l2_sq(s.u.values, s.grid);
  out.l2_v = l2_sq(s.v.values, s.grid);
  out.y_energy = 0.5 * out.l2_v + 0.5 * p.a * p.a * out.l2_u;
  out.gamma0_so_far = p.law.gamma(std::max(s.theta_running_min, 0.0));
  return out;
}

/// Integrals of the initial data entering the blow-up criteria.
struct InitialSummary {
  double psi_integral = 0.0;  // int psi(theta0); +inf if psi is undefined
  double l2_u0 = 0.0;         // int u0^2
  double l2_u0t = 0.0;        // int u0t^2
  double grad_u0_sq = 0.0;    // int |u0_x|^2
  double theta0_inf = 0.0;    // min theta0
  double omega = 1.0;         // |Omega|
};

inline InitialSummary summarize_initial(const State& s0, const CoefficientLaw& law, double a) {
  InitialSummary d;
  d.psi_integral = psi_converges(law) ? psi_integral(s0.theta, s0.grid, law)
                                      : std::numeric_limits<double>::infinity();
  d.l2_u0 = l2_sq(s0.u.values, s0.grid);
  d.l2_u0t = l2_sq(s0.u_t(a), s0.grid);
  d.grad_u0_sq = grad_sq_integral(s0.u.values, s0.grid);
  d.theta0_inf = s0.theta.min();
  d.omega = s0.grid.measure();
  return d;
}

/// Right-hand side of the necessary condition for existence up to time T:
///   {8/(a^2 T) + 4T} int psi(theta0) + 12 e^{2aT}/(T g0) int u0^2
///   + 8 e^{2aT}/(a^2 T g0) int u0t^2 + 2 L |O| e^{2aT}/(a^3 T g0)
///   + 8 L |O|/(a^2 g0) + 2 L |O| T^2 / g0
inline double lemma64_rhs(const InitialSummary& d, double gamma0, double a, double lambda,
                          double T) {
  if (!std::isfinite(lambda)) throw InfiniteLambda();
  if (!(T > 0.0) || !(gamma0 > 0.0))
    throw ValidationError("lemma64_rhs", "need T > 0 and gamma0 > 0");
  const double e = std::exp(2.0 * a * T);
  const double a2 = a * a;
  const double lo = lambda * d.omega;
  return (8.0 / (a2 * T) + 4.0 * T) * d.psi_integral + 12.0 * e / (T * gamma0) * d.l2_u0 +
         8.0 * e / (a2 * T * gamma0) * d.l2_u0t + 2.0 * lo * e / (a2 * a * T * gamma0) +
         8.0 * lo / (a2 * gamma0) + 2.0 * lo * T * T / gamma0;
}

inline double lemma64_rhs(const InitialSummary& d, double gamma0, const Params& p, double T) {
  return lemma64_rhs(d, gamma0, p.a, lambda_bound(p.law), T);
}

/// {4/(a^2 T) + 2T} int psi(theta0)
///   + 4 e^{2aT}/(a^2 T) / gamma(inf theta0) * {(3a^2/2) int u0^2 + int u0t^2}
inline double remark_i_threshold(const InitialSummary& d, double theta0_inf, const Params& p,
                                 double T) {
  if (!(T > 0.0)) throw ValidationError("remark_i_threshold", "need T > 0");
  const double a2 = p.a * p.a;
  const double g = p.law.gamma(std::max(theta0_inf, 0.0));
  return (4.0 / (a2 * T) + 2.0 * T) * d.psi_integral +
         4.0 * std::exp(2.0 * p.a * T) / (a2 * T) / g * (1.5 * a2 * d.l2_u0 + d.l2_u0t);
}

}  // namespace hotspot
