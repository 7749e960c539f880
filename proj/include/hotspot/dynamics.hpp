#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hotspot/error.hpp"
#include "hotspot/grid.hpp"
#include "hotspot/material.hpp"

namespace hotspot {

/// Running space-time integrals, advanced by the trapezoid rule in time.
struct Accumulators {
  double int_grad_ut_sq = 0.0;     // int_0^t int |u_xt|^2
  double int_grad_v_gamma = 0.0;   // int_0^t int gamma(theta) |v_x|^2
  double int_grad_u_sq = 0.0;      // int_0^t int |u_x|^2
  double int_grad_uav_sq = 0.0;    // int_0^t int |u_xt + a u_x|^2
};

/// The (v, u, theta) triple with v = u_t + a u.
struct State {
  State() = default;
  explicit State(Grid1D g) : grid(g) {}

  Grid1D grid;
  double t = 0.0;
  Field u, v, theta;
  double theta_running_min = std::numeric_limits<double>::infinity();
  Accumulators accum;

  /// u_t recovered from the identity u_t = v - a u.
  std::vector<double> u_t(double a) const {
    std::vector<double> w(u.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = v[i] - a * u[i];
    return w;
  }
};

struct Params {
  double a = 1.0;
  double D = 1.0;
  CoefficientLaw law = CoefficientLaw::power_law(1.0, 2.0, 0.0);
  double horizon = 1.0;
  double dt_init = 1e-4;
  double dt_min = 1e-14;
  double dt_max = 1e-2;
  double theta_blowup_threshold = 1e8;
  double step_rel_tol = 1e-5;
  /// Snapshot spacing in time; 0 selects horizon / 20.
  double checkpoint_every = 0.0;
  std::size_t max_steps = 5'000'000;

  void validate() const {
    if (!(a > 0.0)) throw ValidationError("physics.a", "must be positive");
    if (!(D > 0.0)) throw ValidationError("physics.D", "must be positive");
    if (!(horizon > 0.0)) throw ValidationError("physics.T", "must be positive");
    if (!(dt_min > 0.0 && dt_min < dt_init && dt_init <= dt_max))
      throw ValidationError("solver.dt", "need 0 < dt_min < dt_init <= dt_max");
    if (!(theta_blowup_threshold > 0.0))
      throw ValidationError("solver.theta_blowup_threshold", "must be positive");
    if (!(step_rel_tol > 0.0))
      throw ValidationError("solver.step_rel_tol", "must be positive");
    if (checkpoint_every < 0.0)
      throw ValidationError("solver.checkpoint_every", "must be nonnegative");
  }

  double checkpoint_interval() const {
    return checkpoint_every > 0.0 ? checkpoint_every : horizon / 20.0;
  }
};

class NegativeTemperature : public Error {
 public:
  using Error::Error;
};

/// Builds the initial state; v0 = u0t + a u0.
inline State make_initial_state(const Grid1D& grid, std::vector<double> u0,
                                std::vector<double> u0t, std::vector<double> theta0,
                                double a) {
  const auto n = grid.n_nodes();
  if (u0.size() != n || u0t.size() != n || theta0.size() != n)
    throw ValidationError("initial", "profile length does not match the grid");
  State s{grid};
  s.u = Field{std::move(u0), BoundaryCondition::DirichletZero};
  s.v = Field{std::vector<double>(n), BoundaryCondition::DirichletZero};
  for (std::size_t i = 0; i < n; ++i) s.v[i] = u0t[i] + a * s.u[i];
  s.u[0] = s.u[n - 1] = s.v[0] = s.v[n - 1] = 0.0;
  s.theta = Field{std::move(theta0), BoundaryCondition::NeumannZero};
  s.theta_running_min = s.theta.min();
  return s;
}

namespace detail {

inline double negativity_tolerance(const Field& theta) {
  return 1e-10 * std::max(1.0, theta.max_abs());
}

/// gamma and f at nodes, after clamping roundoff negatives of theta to 0.
struct NodalCoefficients {
  std::vector<double> gamma, f;
};

inline NodalCoefficients evaluate_coefficients(const Field& theta, const CoefficientLaw& law) {
  const double tol_neg = negativity_tolerance(theta);
  NodalCoefficients c{std::vector<double>(theta.size()), std::vector<double>(theta.size())};
  for (std::size_t i = 0; i < theta.size(); ++i) {
    double xi = theta[i];
    if (!std::isfinite(xi)) throw NonFiniteState("temperature is not finite");
    if (xi < 0.0) {
      if (xi < -tol_neg)
        throw NegativeTemperature("temperature " + std::to_string(xi) + " below zero");
      xi = 0.0;
    }
    c.gamma[i] = law.gamma(xi);
    c.f[i] = law.f(xi);
    if (!std::isfinite(c.gamma[i]) || !std::isfinite(c.f[i]))
      throw EvaluationError("coefficient not finite", xi);
    if (!(c.gamma[i] > 0.0)) throw NonpositiveCoefficient("gamma must be positive");
  }
  return c;
}

/// Nodal heat source gamma |w_x|^2 + f w_x with w = u_t. Face values are
/// averaged onto nodes (endpoint nodes take their single face) so that the
/// trapezoid integral of source/gamma reproduces the face energy exactly.
inline std::vector<double> heat_source(std::span<const double> u_t, const NodalCoefficients& c,
                                       const Grid1D& grid) {
  const auto faces = face_gradient(u_t, grid);
  const auto n = u_t.size();
  std::vector<double> src(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sq, avg;
    if (i == 0) {
      sq = faces[0] * faces[0];
      avg = faces[0];
    } else if (i + 1 == n) {
      sq = faces[n - 2] * faces[n - 2];
      avg = faces[n - 2];
    } else {
      sq = 0.5 * (faces[i - 1] * faces[i - 1] + faces[i] * faces[i]);
      avg = 0.5 * (faces[i - 1] + faces[i]);
    }
    src[i] = c.gamma[i] * sq + c.f[i] * avg;
  }
  return src;
}

/// Instantaneous integrands of the four accumulators.
inline Accumulators accumulator_rates(const State& s, std::span<const double> gamma, double a) {
  const auto ut = s.u_t(a);
  Accumulators r;
  r.int_grad_ut_sq = grad_sq_integral(ut, s.grid);
  r.int_grad_v_gamma = weighted_grad_sq_integral(s.v.values, gamma, s.grid);
  r.int_grad_u_sq = grad_sq_integral(s.u.values, s.grid);
  r.int_grad_uav_sq = grad_sq_integral(s.v.values, s.grid);
  return r;
}

}  // namespace detail

struct Derivative {
  Field dv, du, dtheta;
};

/// Right-hand side of the (v, u, theta) system:
///   v_t = (gamma v_x)_x + a v - a^2 u + f(theta)_x
///   u_t = v - a u
///   theta_t = D theta_xx + gamma |v_x - a u_x|^2 + f (v_x - a u_x)
inline Derivative rhs(const State& s, const Params& p) {
  const auto coef = detail::evaluate_coefficients(s.theta, p.law);
  const auto n = s.u.size();
  Field gamma{coef.gamma, BoundaryCondition::NeumannZero};
  Field f_field{coef.f, BoundaryCondition::NeumannZero};

  Derivative d;
  d.dv = div_gamma_grad(s.v, gamma, s.grid);
  const auto df = gradient(f_field, s.grid);
  for (std::size_t i = 1; i + 1 < n; ++i)
    d.dv[i] += p.a * s.v[i] - p.a * p.a * s.u[i] + df[i];
  d.dv[0] = d.dv[n - 1] = 0.0;

  d.du = Field{s.u_t(p.a), BoundaryCondition::DirichletZero};
  d.du[0] = d.du[n - 1] = 0.0;

  d.dtheta = laplacian_neumann(s.theta, s.grid);
  const auto src = detail::heat_source(d.du.values, coef, s.grid);
  for (std::size_t i = 0; i < n; ++i) d.dtheta[i] = p.D * d.dtheta[i] + src[i];
  return d;
}

/// One IMEX step: (gamma(theta^n) v_x)_x and D theta_xx backward Euler,
/// everything else forward Euler. Accumulators advance by the trapezoid rule.
inline State step(const State& s, double dt, const Params& p) {
  const auto n = s.u.size();
  const auto coef = detail::evaluate_coefficients(s.theta, p.law);
  Field gamma{coef.gamma, BoundaryCondition::NeumannZero};
  Field f_field{coef.f, BoundaryCondition::NeumannZero};
  const auto ut = s.u_t(p.a);

  Field v_rhs = s.v;
  const auto df = gradient(f_field, s.grid);
  for (std::size_t i = 1; i + 1 < n; ++i)
    v_rhs[i] += dt * (p.a * s.v[i] - p.a * p.a * s.u[i] + df[i]);

  State next{s.grid};
  next.t = s.t + dt;
  next.v = solve_implicit_diffusion_dirichlet(v_rhs, gamma, dt, s.grid);

  next.u = s.u;
  for (std::size_t i = 1; i + 1 < n; ++i) next.u[i] += dt * ut[i];
  next.u[0] = next.u[n - 1] = 0.0;

  const auto src = detail::heat_source(ut, coef, s.grid);
  Field theta_rhs = s.theta;
  for (std::size_t i = 0; i < n; ++i) theta_rhs[i] += dt * src[i];
  next.theta = solve_implicit_heat_neumann(theta_rhs, p.D, dt, s.grid);

  if (!next.v.all_finite() || !next.u.all_finite() || !next.theta.all_finite())
    throw NonFiniteState("non-finite value after step at t = " + std::to_string(next.t));

  const auto coef_next = detail::evaluate_coefficients(next.theta, p.law);
  const auto r0 = detail::accumulator_rates(s, coef.gamma, p.a);
  const auto r1 = detail::accumulator_rates(next, coef_next.gamma, p.a);
  const double w = 0.5 * dt;
  next.accum.int_grad_ut_sq = s.accum.int_grad_ut_sq + w * (r0.int_grad_ut_sq + r1.int_grad_ut_sq);
  next.accum.int_grad_v_gamma =
      s.accum.int_grad_v_gamma + w * (r0.int_grad_v_gamma + r1.int_grad_v_gamma);
  next.accum.int_grad_u_sq = s.accum.int_grad_u_sq + w * (r0.int_grad_u_sq + r1.int_grad_u_sq);
  next.accum.int_grad_uav_sq =
      s.accum.int_grad_uav_sq + w * (r0.int_grad_uav_sq + r1.int_grad_uav_sq);
  next.theta_running_min = std::min(s.theta_running_min, next.theta.min());
  return next;
}

/// One row of the time trace; written once per accepted step.
struct TraceRow {
  double t = 0.0;
  double dt = 0.0;
  double theta_max = 0.0;
  double theta_min = 0.0;
  double theta_running_min = 0.0;
  Accumulators accum;
  double psi_integral = 0.0;
  double y_energy = 0.0;
};

struct Checkpoint {
  std::size_t row = 0;
  State state;
};

struct Trajectory {
  std::vector<TraceRow> rows;
  std::vector<Checkpoint> checkpoints;
};

enum class OutcomeKind { Completed, BlowUpDetected, Aborted };

inline const char* to_string(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::Completed: return "Completed";
    case OutcomeKind::BlowUpDetected: return "BlowUpDetected";
    case OutcomeKind::Aborted: return "Aborted";
  }
  return "?";
}

struct RunOutcome {
  OutcomeKind kind = OutcomeKind::Completed;
  double t_detect = std::numeric_limits<double>::quiet_NaN();
  /// Diagnostic only: root of a linear fit of (1+max theta)^(1-mu) against t.
  double extrapolated_blowup_time = std::numeric_limits<double>::quiet_NaN();
  std::string reason;
  Trajectory trajectory;
  State final_state;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
};

/// int psi(theta) evaluator; empty when 1/gamma is not integrable.
class PsiIntegrator {
 public:
  PsiIntegrator(const CoefficientLaw& law, double xi_max) {
    if (psi_converges(law)) table_.emplace(law, xi_max);
  }

  double operator()(const Field& theta, const Grid1D& grid) const {
    if (!table_) return std::numeric_limits<double>::infinity();
    std::vector<double> psi(theta.size());
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = (*table_)(std::max(theta[i], 0.0));
    return integrate(psi, grid);
  }

  bool available() const noexcept { return table_.has_value(); }

 private:
  std::optional<PsiTable> table_;
};

inline double y_energy(const State& s, double a) {
  std::vector<double> w(s.u.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = 0.5 * s.v[i] * s.v[i] + 0.5 * a * a * s.u[i] * s.u[i];
  return integrate(w, s.grid);
}

inline TraceRow make_row(const State& s, double dt, const Params& p, const PsiIntegrator& psi) {
  TraceRow r;
  r.t = s.t;
  r.dt = dt;
  r.theta_max = s.theta.max();
  r.theta_min = s.theta.min();
  r.theta_running_min = s.theta_running_min;
  r.accum = s.accum;
  r.psi_integral = psi(s.theta, s.grid);
  r.y_energy = y_energy(s, p.a);
  return r;
}

namespace detail {

inline double relative_difference(const Field& coarse, const Field& fine) {
  double diff = 0.0;
  for (std::size_t i = 0; i < fine.size(); ++i)
    diff = std::max(diff, std::abs(coarse[i] - fine[i]));
  return diff / std::max(1.0, fine.max_abs());
}

/// Fits (1 + max theta)^(1 - mu) linearly in t over the last decade of growth.
inline double extrapolate_blowup(const std::vector<TraceRow>& rows, const CoefficientLaw& law) {
  if (rows.size() < 3) return std::numeric_limits<double>::quiet_NaN();
  const double top = rows.back().theta_max;
  double mu;
  if (auto pl = law.as_power_law()) {
    mu = pl->mu;
  } else {
    mu = std::log(law.gamma(2.0 * top + 1.0) / law.gamma(top)) / std::log(2.0);
  }
  if (!(mu > 1.0)) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> ts, ys;
  for (auto it = rows.rbegin(); it != rows.rend() && it->theta_max >= 0.1 * top; ++it) {
    ts.push_back(it->t);
    ys.push_back(std::pow(1.0 + it->theta_max, 1.0 - mu));
  }
  if (ts.size() < 3) return std::numeric_limits<double>::quiet_NaN();
  // Centred least squares; the times differ only in their last digits.
  const double t_ref = ts.front();
  double mt = 0, my = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i] - t_ref;
    my += ys[i];
  }
  mt /= static_cast<double>(ts.size());
  my /= static_cast<double>(ts.size());
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double dx = ts[i] - t_ref - mt;
    sxx += dx * dx;
    sxy += dx * (ys[i] - my);
  }
  if (!(sxx > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double slope = sxy / sxx;
  if (!(slope < 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return t_ref + mt - my / slope;
}

}  // namespace detail

/// Integrates to the horizon with step-doubling control. Stops early with
/// BlowUpDetected once max theta reaches the threshold, or once the
/// controller needs dt < dt_min while max theta is still increasing.
inline RunOutcome advance(const State& state0, const Params& p) {
  p.validate();
  if (state0.u[0] != 0.0 || state0.u.values.back() != 0.0 || state0.v[0] != 0.0 ||
      state0.v.values.back() != 0.0)
    throw ValidationError("initial", "u and v must vanish at the endpoints");
  if (state0.theta.min() < 0.0) throw ValidationError("initial.theta0", "must be nonnegative");

  RunOutcome out;
  const PsiIntegrator psi(p.law, 10.0 * p.theta_blowup_threshold);
  auto& traj = out.trajectory;
  State s = state0;
  traj.rows.push_back(make_row(s, 0.0, p, psi));
  traj.checkpoints.push_back({0, s});

  const double T = p.horizon;
  const double cp_dt = p.checkpoint_interval();
  const double t_eps = 1e-12 * T;
  std::size_t next_cp = 1;
  double dt = p.dt_init;

  auto theta_growing = [&traj] {
    const auto& r = traj.rows;
    return r.size() >= 2 && r.back().theta_max > r[r.size() - 2].theta_max;
  };
  auto finish = [&](OutcomeKind kind, std::string reason) {
    out.kind = kind;
    out.reason = std::move(reason);
    if (traj.checkpoints.back().row + 1 != traj.rows.size())
      traj.checkpoints.push_back({traj.rows.size() - 1, s});
    out.final_state = s;
    if (kind == OutcomeKind::BlowUpDetected) {
      out.t_detect = s.t;
      out.extrapolated_blowup_time = detail::extrapolate_blowup(traj.rows, p.law);
    }
    return out;
  };

  while (s.t < T - t_eps) {
    if (out.accepted_steps + out.rejected_steps >= p.max_steps)
      return finish(OutcomeKind::Aborted, "step budget exhausted");

    const double cp_time = std::min(T, static_cast<double>(next_cp) * cp_dt);
    double dt_try = std::min(dt, cp_time - s.t);
    const bool clipped = dt_try < dt;

    double err;
    State fine{s.grid};
    try {
      const State coarse = step(s, dt_try, p);
      const State half = step(s, 0.5 * dt_try, p);
      fine = step(half, 0.5 * dt_try, p);
      err = std::max({detail::relative_difference(coarse.v, fine.v),
                      detail::relative_difference(coarse.u, fine.u),
                      detail::relative_difference(coarse.theta, fine.theta)});
      if (!std::isfinite(err)) err = std::numeric_limits<double>::infinity();
    } catch (const NonFiniteState&) {
      err = std::numeric_limits<double>::infinity();
    } catch (const NegativeTemperature&) {
      err = std::numeric_limits<double>::infinity();
    } catch (const EvaluationError&) {
      err = std::numeric_limits<double>::infinity();
    } catch (const LinearSolveFailure&) {
      err = std::numeric_limits<double>::infinity();
    }

    const double factor =
        std::isfinite(err) ? 0.9 * std::sqrt(p.step_rel_tol / std::max(err, 1e-300)) : 0.25;

    if (err <= p.step_rel_tol) {
      // the half-step state is internal; keep the running minimum over
      // accepted states only so it can be rebuilt from the trace
      const double running = std::min(s.theta_running_min, fine.theta.min());
      s = std::move(fine);
      s.theta_running_min = running;
      ++out.accepted_steps;
      traj.rows.push_back(make_row(s, dt_try, p, psi));
      if (s.t >= cp_time - t_eps) {
        traj.checkpoints.push_back({traj.rows.size() - 1, s});
        ++next_cp;
      }
      if (traj.rows.back().theta_max >= p.theta_blowup_threshold)
        return finish(OutcomeKind::BlowUpDetected, "max theta reached the threshold");
      const double grow = std::min(factor, 5.0);
      const double proposed = clipped ? std::max(dt, dt_try * grow) : dt_try * grow;
      dt = std::clamp(proposed, p.dt_min, p.dt_max);
    } else {
      ++out.rejected_steps;
      const double proposed = dt_try * std::max(factor, 0.1);
      if (proposed < p.dt_min && !(clipped && dt_try <= p.dt_min)) {
        if (theta_growing())
          return finish(OutcomeKind::BlowUpDetected,
                        "step size below dt_min while max theta increases");
        return finish(OutcomeKind::Aborted,
                      "step size below dt_min without temperature growth");
      }
      dt = std::max(proposed, std::min(p.dt_min, dt_try * 0.5));
    }
  }
  return finish(OutcomeKind::Completed, "reached the horizon");
}

}  // namespace hotspot
