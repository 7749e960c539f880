#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "hotspot/error.hpp"
#include "hotspot/functionals.hpp"
#include "hotspot/material.hpp"

namespace hotspot {

enum class CertificateKind { Thm65, Thm66, RemarkI, Lemma64Necessary, OdeComparison };
enum class Verdict { BlowupGuaranteed, ConditionNotMet, Unavailable };

inline const char* to_string(CertificateKind k) {
  switch (k) {
    case CertificateKind::Thm65: return "Thm65";
    case CertificateKind::Thm66: return "Thm66";
    case CertificateKind::RemarkI: return "RemarkI";
    case CertificateKind::Lemma64Necessary: return "Lemma64Necessary";
    case CertificateKind::OdeComparison: return "OdeComparison";
  }
  return "?";
}

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::BlowupGuaranteed: return "BlowupGuaranteed";
    case Verdict::ConditionNotMet: return "ConditionNotMet";
    case Verdict::Unavailable: return "Unavailable";
  }
  return "?";
}

struct CertificateReport {
  CertificateKind certificate = CertificateKind::Thm65;
  std::map<std::string, double> constants;
  Verdict verdict = Verdict::Unavailable;
  std::string reason;
  /// LHS - RHS of the deciding inequality (NaN when unavailable).
  double margin = std::numeric_limits<double>::quiet_NaN();

  bool guaranteed() const noexcept { return verdict == Verdict::BlowupGuaranteed; }
};

class CertificateUnavailable : public Error {
 public:
  using Error::Error;
};

/// Relative inflation turning strict sufficient thresholds into >= checks.
inline constexpr double kStrictInflation = 1e-12;

namespace detail {

inline void require_assumptions(const DerivedScalars& m, bool need_lambda = true) {
  const auto& r = m.assumptions;
  if (!r.positive) throw CertificateUnavailable("gamma is not positive");
  if (!r.f_vanishes_at_zero) throw CertificateUnavailable("f(0) != 0");
  if (!r.monotone) throw CertificateUnavailable("gamma is not nondecreasing");
  if (!r.integrable) throw CertificateUnavailable("1/gamma is not integrable");
  if (need_lambda && !std::isfinite(m.lambda))
    throw CertificateUnavailable("Lambda = sup f^2/gamma is infinite");
}

inline CertificateReport unavailable(CertificateKind k, const std::string& why) {
  CertificateReport r;
  r.certificate = k;
  r.verdict = Verdict::Unavailable;
  r.reason = why;
  return r;
}

}  // namespace detail

/// The three lower bounds a constant C must exceed for the strain-driven
/// criterion, and their inflated maximum.
struct Theorem65Constants {
  double bound_u0 = 0.0;    // 12 e^{2aT} / (T gamma(0))
  double bound_u0t = 0.0;   // 8 e^{2aT} / (a^2 T gamma(0))
  double bound_data = 0.0;  // psi(0)- and Lambda-dependent remainder
  double C = 0.0;
};

inline Theorem65Constants theorem65_constants(const DerivedScalars& m, double a, double T,
                                              double omega) {
  detail::require_assumptions(m);
  const double e = std::exp(2.0 * a * T);
  const double g = m.gamma_at_zero;
  const double a2 = a * a;
  const double lo = m.lambda * omega;
  Theorem65Constants c;
  c.bound_u0 = 12.0 * e / (T * g);
  c.bound_u0t = 8.0 * e / (a2 * T * g);
  c.bound_data = (8.0 / (a2 * T) + 4.0 * T) * omega * m.psi_at_zero +
                 2.0 * lo * e / (a2 * a * T * g) + 8.0 * lo / (a2 * g) + 2.0 * lo * T * T / g;
  c.C = (1.0 + kStrictInflation) * std::max({c.bound_u0, c.bound_u0t, c.bound_data});
  return c;
}

inline double theorem65_constant(const CoefficientLaw& law, double a, double T, double omega) {
  return theorem65_constants(derive_scalars(law), a, T, omega).C;
}

enum class Theorem65Mode {
  Uniform,          // int |u0_x|^2 >= C (int u0^2 + int u0t^2 + 1)
  ThreeCoefficient  // separate coefficients on each data term (sharper)
};

inline CertificateReport check_theorem65(const InitialSummary& d, const DerivedScalars& m,
                                         double a, double T,
                                         Theorem65Mode mode = Theorem65Mode::Uniform) {
  Theorem65Constants c;
  try {
    c = theorem65_constants(m, a, T, d.omega);
  } catch (const CertificateUnavailable& e) {
    return detail::unavailable(CertificateKind::Thm65, e.what());
  }
  CertificateReport r;
  r.certificate = CertificateKind::Thm65;
  r.constants = {{"C", c.C},
                 {"bound_u0", c.bound_u0},
                 {"bound_u0t", c.bound_u0t},
                 {"bound_data", c.bound_data},
                 {"gamma(0)", m.gamma_at_zero},
                 {"psi(0)", m.psi_at_zero},
                 {"Lambda", m.lambda},
                 {"a", a},
                 {"T", T},
                 {"omega", d.omega},
                 {"grad_u0_sq", d.grad_u0_sq}};
  double rhs;
  if (mode == Theorem65Mode::Uniform) {
    rhs = c.C * (d.l2_u0 + d.l2_u0t + 1.0);
    r.margin = d.grad_u0_sq - rhs;
    r.verdict = r.margin >= 0.0 ? Verdict::BlowupGuaranteed : Verdict::ConditionNotMet;
  } else {
    rhs = (1.0 + kStrictInflation) *
          (c.bound_u0 * d.l2_u0 + c.bound_u0t * d.l2_u0t + c.bound_data);
    r.margin = d.grad_u0_sq - rhs;
    r.verdict = r.margin > 0.0 ? Verdict::BlowupGuaranteed : Verdict::ConditionNotMet;
    r.reason = "three-coefficient variant";
  }
  r.constants["rhs"] = rhs;
  if (r.verdict == Verdict::ConditionNotMet && r.reason.empty())
    r.reason = "initial strain too small for the horizon";
  return r;
}

/// Smallest admissible lower temperature bound for the temperature-driven
/// criterion, found by bisection on C >= Lambda T / 2.
struct Theorem66Constants {
  double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
  double C = 0.0;
};

inline Theorem66Constants theorem66_constants(const CoefficientLaw& law, const DerivedScalars& m,
                                              double a, double T, double omega, double eta,
                                              double M) {
  detail::require_assumptions(m);
  if (!(eta > 0.0) || M < 0.0)
    throw CertificateUnavailable("need eta > 0 and M >= 0");
  const double e = std::exp(2.0 * a * T);
  const double a2 = a * a;
  const double lo = m.lambda * omega;
  Theorem66Constants c;
  c.c1 = 8.0 / (a2 * T) + 4.0 * T;
  c.c2 = 12.0 * e / T;
  c.c3 = 8.0 * e / (a2 * T);
  c.c4 = 2.0 * lo * e / (a2 * a * T) + 8.0 * lo / a2 + 2.0 * lo * T * T;

  const double quarter = 0.25 * eta;
  const double psi_tol = 1e-6 * quarter / (c.c1 * omega);
  auto admissible = [&](double C) {
    const bool temperature_ok = c.c1 * omega * psi_eval(law, C, psi_tol) <= quarter;
    const bool data_ok = (c.c2 * M + c.c3 * M + c.c4) / law.gamma(0.5 * C) <= quarter;
    return temperature_ok && data_ok;
  };

  double lo_c = 0.5 * m.lambda * T;
  if (admissible(lo_c)) {
    c.C = lo_c;
    return c;
  }
  double hi_c = std::max(1.0, 2.0 * lo_c);
  while (!admissible(hi_c)) {
    lo_c = hi_c;
    hi_c *= 2.0;
    if (hi_c > 1e12) throw CertificateUnavailable("no admissible C below 1e12");
  }
  while (hi_c - lo_c > 1e-6 * hi_c) {
    const double mid = 0.5 * (lo_c + hi_c);
    (admissible(mid) ? hi_c : lo_c) = mid;
  }
  c.C = hi_c;
  return c;
}

inline CertificateReport check_theorem66(const InitialSummary& d, const CoefficientLaw& law,
                                         const DerivedScalars& m, double a, double T, double eta,
                                         double M) {
  Theorem66Constants c;
  try {
    c = theorem66_constants(law, m, a, T, d.omega, eta, M);
  } catch (const CertificateUnavailable& e) {
    return detail::unavailable(CertificateKind::Thm66, e.what());
  }
  CertificateReport r;
  r.certificate = CertificateKind::Thm66;
  r.constants = {{"C", c.C},   {"c1", c.c1},   {"c2", c.c2},   {"c3", c.c3},
                 {"c4", c.c4}, {"eta", eta},   {"M", M},       {"Lambda", m.lambda},
                 {"a", a},     {"T", T},       {"theta0_inf", d.theta0_inf}};
  r.margin = d.theta0_inf - c.C;
  if (d.grad_u0_sq < eta) {
    r.verdict = Verdict::ConditionNotMet;
    r.reason = "int |u0_x|^2 < eta";
  } else if (d.l2_u0 + d.l2_u0t > M) {
    r.verdict = Verdict::ConditionNotMet;
    r.reason = "int u0^2 + int u0t^2 > M";
  } else if (r.margin >= 0.0) {
    r.verdict = Verdict::BlowupGuaranteed;
  } else {
    r.verdict = Verdict::ConditionNotMet;
    r.reason = "initial temperature below C";
  }
  return r;
}

/// eta and M taken as tight as the data allow.
inline CertificateReport check_theorem66(const InitialSummary& d, const CoefficientLaw& law,
                                         const DerivedScalars& m, double a, double T) {
  return check_theorem66(d, law, m, a, T, d.grad_u0_sq, d.l2_u0 + d.l2_u0t);
}

/// Contrapositive of the necessary condition, with gamma_0(T) replaced by the
/// lower bound gamma(max{inf theta0 - Lambda T/4, 0}).
inline CertificateReport check_lemma64(const InitialSummary& d, const DerivedScalars& m,
                                       const CoefficientLaw& law, double a, double T) {
  try {
    detail::require_assumptions(m);
  } catch (const CertificateUnavailable& e) {
    return detail::unavailable(CertificateKind::Lemma64Necessary, e.what());
  }
  const double theta_floor = std::max(d.theta0_inf - 0.25 * m.lambda * T, 0.0);
  const double gamma0 = law.gamma(theta_floor);
  const double rhs = lemma64_rhs(d, gamma0, a, m.lambda, T);
  CertificateReport r;
  r.certificate = CertificateKind::Lemma64Necessary;
  r.constants = {{"rhs", rhs},        {"gamma0_lower", gamma0}, {"theta_floor", theta_floor},
                 {"Lambda", m.lambda}, {"a", a},                {"T", T},
                 {"grad_u0_sq", d.grad_u0_sq}};
  r.margin = d.grad_u0_sq - rhs;
  r.verdict = d.grad_u0_sq > rhs * (1.0 + kStrictInflation) ? Verdict::BlowupGuaranteed
                                                             : Verdict::ConditionNotMet;
  if (!r.guaranteed()) r.reason = "necessary condition for existence up to T is satisfied";
  return r;
}

inline CertificateReport check_remark_i(const InitialSummary& d, const DerivedScalars& m,
                                        const Params& p, double T) {
  try {
    detail::require_assumptions(m, false);
  } catch (const CertificateUnavailable& e) {
    return detail::unavailable(CertificateKind::RemarkI, e.what());
  }
  const double rhs = remark_i_threshold(d, d.theta0_inf, p, T);
  CertificateReport r;
  r.certificate = CertificateKind::RemarkI;
  r.constants = {{"rhs", rhs}, {"a", p.a}, {"T", T}, {"grad_u0_sq", d.grad_u0_sq}};
  r.margin = d.grad_u0_sq - rhs;
  r.verdict = d.grad_u0_sq > rhs * (1.0 + kStrictInflation) ? Verdict::BlowupGuaranteed
                                                             : Verdict::ConditionNotMet;
  return r;
}

/// Blow-up time of theta' = c gamma(theta), theta(0) = theta0: psi(theta0)/c,
/// or +inf when 1/gamma is not integrable.
inline double ode_blowup_time(const CoefficientLaw& law, double c, double theta0) {
  if (!(c > 0.0) || theta0 < 0.0)
    throw ValidationError("ode", "need c > 0 and theta0 >= 0");
  try {
    return psi_eval(law, theta0) / c;
  } catch (const DivergentIntegral&) {
    return std::numeric_limits<double>::infinity();
  }
}

struct OdeIntegration {
  bool crossed = false;
  double crossing_time = std::numeric_limits<double>::infinity();
  /// crossing_time plus the local power-law estimate of the remaining time.
  double extrapolated_time = std::numeric_limits<double>::infinity();
  double level = 1e10;
  int steps = 0;
};

/// Integrates theta' = c gamma(theta) with adaptive Dormand-Prince until theta
/// reaches `level`, independently of the psi quadrature.
inline OdeIntegration ode_blowup_integration(const CoefficientLaw& law, double c, double theta0,
                                             double level = 1e10, double t_max = 1e6) {
  namespace ode = boost::numeric::odeint;
  using Stepper = ode::runge_kutta_dopri5<double>;
  auto system = [&](const double& x, double& dxdt, double) {
    dxdt = c * law.gamma(std::max(x, 0.0));
  };
  auto controlled = ode::make_controlled(1e-13, 1e-13, Stepper());
  Stepper plain;

  OdeIntegration out;
  out.level = level;
  double x = theta0, t = 0.0;
  double dt = 1e-3 / (c * law.gamma(theta0));
  while (t < t_max && out.steps < 1'000'000) {
    // Cap the growth per step so the crossing can be bracketed cleanly.
    const double cap = 0.05 * (1.0 + x) / (c * law.gamma(x));
    dt = std::min(dt, cap);
    double x_try = x, t_try = t, dt_try = dt;
    if (controlled.try_step(system, x_try, t_try, dt_try) == ode::fail) {
      dt = dt_try;
      continue;
    }
    ++out.steps;
    if (x_try >= level) {
      // Bisect the last step length so the plain step lands on the level.
      double lo = 0.0, hi = t_try - t;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * (t + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        double xm = x;
        plain.do_step(system, xm, t, mid);
        (xm >= level ? hi : lo) = mid;
      }
      out.crossed = true;
      out.crossing_time = t + hi;
      const double mu_eff =
          std::log(law.gamma(2.0 * level + 1.0) / law.gamma(level)) / std::log(2.0);
      out.extrapolated_time =
          mu_eff > 1.0 ? out.crossing_time + (1.0 + level) / (c * law.gamma(level) * (mu_eff - 1.0))
                       : std::numeric_limits<double>::infinity();
      return out;
    }
    x = x_try;
    t = t_try;
    dt = dt_try;
  }
  return out;
}

inline CertificateReport check_ode(const CoefficientLaw& law, double c, double theta0) {
  CertificateReport r;
  r.certificate = CertificateKind::OdeComparison;
  const double t_star = ode_blowup_time(law, c, theta0);
  const auto integ = ode_blowup_integration(law, c, theta0);
  r.constants = {{"c", c},
                 {"theta0", theta0},
                 {"T_star_quadrature", t_star},
                 {"T_crossing_integration", integ.crossing_time},
                 {"T_star_integration", integ.extrapolated_time},
                 {"crossing_level", integ.level}};
  if (std::isfinite(t_star)) {
    r.verdict = Verdict::BlowupGuaranteed;
    r.margin = t_star;
    const double rel = std::abs(integ.extrapolated_time - t_star) / t_star;
    r.constants["relative_disagreement"] = rel;
  } else {
    r.verdict = Verdict::ConditionNotMet;
    r.reason = "1/gamma is not integrable; the comparison ODE exists globally";
  }
  return r;
}

}  // namespace hotspot
