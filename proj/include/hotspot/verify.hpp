#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "hotspot/dynamics.hpp"
#include "hotspot/functionals.hpp"
#include "hotspot/material.hpp"

namespace hotspot {

enum class InequalityId { L601, L63, L61, L62, L64, L99 };

inline const char* to_string(InequalityId id) {
  switch (id) {
    case InequalityId::L601: return "L601";
    case InequalityId::L63: return "L63";
    case InequalityId::L61: return "L61";
    case InequalityId::L62: return "L62";
    case InequalityId::L64: return "L64";
    case InequalityId::L99: return "L99";
  }
  return "?";
}

inline constexpr double kDefaultAuditTol = 0.02;

struct AuditResult {
  InequalityId inequality_id = InequalityId::L601;
  std::vector<double> times_checked;
  /// min over checked times of (RHS - LHS) / max(|RHS|, 1).
  double worst_margin = std::numeric_limits<double>::infinity();
  double worst_time = std::numeric_limits<double>::quiet_NaN();
  bool pass = true;
  bool available = true;
  std::string note;
};

/// What the audits need beyond the trajectory itself.
struct AuditContext {
  InitialSummary initial;
  double a = 1.0;
  double lambda = 0.0;
  double step_rel_tol = 1e-5;
  CoefficientLaw law = CoefficientLaw::power_law(1.0, 2.0, 0.0);
  double audit_tol = kDefaultAuditTol;
};

inline AuditContext make_audit_context(const State& s0, const Params& p,
                                       double audit_tol = kDefaultAuditTol) {
  return AuditContext{summarize_initial(s0, p.law, p.a), p.a, lambda_bound(p.law),
                      p.step_rel_tol, p.law, audit_tol};
}

namespace detail {

class AuditBuilder {
 public:
  AuditBuilder(InequalityId id, double tol) { r_.inequality_id = id; tol_ = tol; }

  void check(double t, double lhs, double rhs) {
    r_.times_checked.push_back(t);
    const double margin = (rhs - lhs) / std::max(std::abs(rhs), 1.0);
    if (margin < r_.worst_margin || std::isnan(margin)) {
      r_.worst_margin = std::isnan(margin) ? -std::numeric_limits<double>::infinity() : margin;
      r_.worst_time = t;
    }
  }

  AuditResult finish() {
    r_.pass = r_.worst_margin >= -tol_;
    return std::move(r_);
  }

  AuditResult unavailable(std::string why) {
    r_.available = false;
    r_.note = std::move(why);
    r_.worst_margin = std::numeric_limits<double>::quiet_NaN();
    r_.pass = true;
    return std::move(r_);
  }

 private:
  AuditResult r_;
  double tol_ = kDefaultAuditTol;
};

inline double gamma0_of(const AuditContext& c, const TraceRow& row) {
  return c.law.gamma(std::max(row.theta_running_min, 0.0));
}

}  // namespace detail

/// int_0^T int |u_xt|^2 <= 2 int psi(theta0) + Lambda |O| T / gamma0(T)
inline AuditResult audit_lemma601(const Trajectory& traj, const AuditContext& c) {
  detail::AuditBuilder b(InequalityId::L601, c.audit_tol);
  if (!std::isfinite(c.lambda)) return b.unavailable("Lambda is infinite");
  if (!std::isfinite(c.initial.psi_integral)) return b.unavailable("psi is undefined");
  const double lo = c.lambda * c.initial.omega;
  for (const auto& row : traj.rows) {
    const double rhs = 2.0 * c.initial.psi_integral + lo * row.t / detail::gamma0_of(c, row);
    b.check(row.t, row.accum.int_grad_ut_sq, rhs);
  }
  return b.finish();
}

/// int |u0_x|^2 <= 2 int |u_x(t)|^2 + 2t int_0^t int |u_xt|^2, at checkpoints.
inline AuditResult audit_lemma63(const Trajectory& traj, const AuditContext& c) {
  detail::AuditBuilder b(InequalityId::L63, c.audit_tol);
  for (const auto& cp : traj.checkpoints) {
    const auto& row = traj.rows.at(cp.row);
    const double rhs = 2.0 * grad_sq_integral(cp.state.u.values, cp.state.grid) +
                       2.0 * row.t * row.accum.int_grad_ut_sq;
    b.check(row.t, c.initial.grad_u0_sq, rhs);
  }
  return b.finish();
}

/// int_0^T int |u_xt + a u_x|^2 <= 3a^2 e^{2aT}/g0 int u0^2 + 2 e^{2aT}/g0 int u0t^2
///                                 + L|O| e^{2aT}/(2a g0) + L|O| T/g0
inline AuditResult audit_lemma61(const Trajectory& traj, const AuditContext& c) {
  detail::AuditBuilder b(InequalityId::L61, c.audit_tol);
  if (!std::isfinite(c.lambda)) return b.unavailable("Lambda is infinite");
  const double lo = c.lambda * c.initial.omega;
  const double a = c.a;
  for (const auto& row : traj.rows) {
    const double g0 = detail::gamma0_of(c, row);
    const double e = std::exp(2.0 * a * row.t);
    const double rhs = 3.0 * a * a * e / g0 * c.initial.l2_u0 + 2.0 * e / g0 * c.initial.l2_u0t +
                       lo * e / (2.0 * a * g0) + lo * row.t / g0;
    b.check(row.t, row.accum.int_grad_uav_sq, rhs);
  }
  return b.finish();
}

/// int_0^T int |u_x|^2 <= 4/a^2 int psi(theta0) + 6 e^{2aT}/g0 int u0^2
///   + 4 e^{2aT}/(a^2 g0) int u0t^2 + L|O| e^{2aT}/(a^3 g0) + 4 L|O| T/(a^2 g0)
inline AuditResult audit_lemma62(const Trajectory& traj, const AuditContext& c) {
  detail::AuditBuilder b(InequalityId::L62, c.audit_tol);
  if (!std::isfinite(c.lambda)) return b.unavailable("Lambda is infinite");
  if (!std::isfinite(c.initial.psi_integral)) return b.unavailable("psi is undefined");
  const double lo = c.lambda * c.initial.omega;
  const double a = c.a, a2 = a * a;
  for (const auto& row : traj.rows) {
    const double g0 = detail::gamma0_of(c, row);
    const double e = std::exp(2.0 * a * row.t);
    const double rhs = 4.0 / a2 * c.initial.psi_integral + 6.0 * e / g0 * c.initial.l2_u0 +
                       4.0 * e / (a2 * g0) * c.initial.l2_u0t + lo * e / (a2 * a * g0) +
                       4.0 * lo * row.t / (a2 * g0);
    b.check(row.t, row.accum.int_grad_u_sq, rhs);
  }
  return b.finish();
}

/// min theta(t) >= inf theta0 - Lambda t / 4, with eps_num = 10 tol (1 + inf theta0).
inline AuditResult audit_lemma99(const Trajectory& traj, const AuditContext& c) {
  detail::AuditBuilder b(InequalityId::L99, c.audit_tol);
  if (!std::isfinite(c.lambda)) return b.unavailable("Lambda is infinite");
  const double inf0 = c.initial.theta0_inf;
  const double eps = 10.0 * c.step_rel_tol * (1.0 + inf0);
  for (const auto& row : traj.rows)
    b.check(row.t, inf0 - 0.25 * c.lambda * row.t - eps, row.theta_min);
  return b.finish();
}

/// A run that completed over [0, T] must satisfy the necessary condition at T.
inline AuditResult audit_lemma64(const Trajectory& traj, const AuditContext& c, bool completed) {
  detail::AuditBuilder b(InequalityId::L64, c.audit_tol);
  if (!completed) return b.unavailable("run did not complete; no existence claim to check");
  if (!std::isfinite(c.lambda)) return b.unavailable("Lambda is infinite");
  if (!std::isfinite(c.initial.psi_integral)) return b.unavailable("psi is undefined");
  const auto& last = traj.rows.back();
  const double rhs =
      lemma64_rhs(c.initial, detail::gamma0_of(c, last), c.a, c.lambda, last.t);
  b.check(last.t, c.initial.grad_u0_sq, rhs);
  return b.finish();
}

inline std::vector<AuditResult> audit_all(const Trajectory& traj, const AuditContext& c,
                                          bool completed) {
  return {audit_lemma601(traj, c), audit_lemma63(traj, c), audit_lemma61(traj, c),
          audit_lemma62(traj, c), audit_lemma99(traj, c), audit_lemma64(traj, c, completed)};
}

inline bool all_pass(const std::vector<AuditResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
}

}  // namespace hotspot
