#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hotspot/error.hpp"
#include "hotspot/quadrature.hpp"

namespace hotspot {

/// gamma(xi) = gamma_star * (xi + 1)^mu,  f(xi) = f_star * xi.
struct PowerLaw {
  double gamma_star = 1.0;
  double mu = 2.0;
  double f_star = 0.0;
};

/// Piecewise-linear (xi, gamma, f) table. Beyond the last row gamma keeps the
/// log-log slope of the final segment in (1 + xi) and f is held constant.
struct TabulatedLaw {
  std::vector<double> xi, gamma, f;
};

/// Arbitrary closed-form handles; derivatives by centred differences.
struct ClosedFormLaw {
  std::function<double(double)> gamma;
  std::function<double(double)> f;
  std::string label = "closed-form";
};

/// Temperature-dependent viscosity gamma and thermal dilation f.
class CoefficientLaw {
 public:
  using Kind = std::variant<PowerLaw, std::shared_ptr<const TabulatedLaw>,
                            ClosedFormLaw>;

  static CoefficientLaw power_law(double gamma_star, double mu, double f_star) {
    return CoefficientLaw(PowerLaw{gamma_star, mu, f_star});
  }

  static CoefficientLaw tabulated(TabulatedLaw table) {
    const auto n = table.xi.size();
    if (n < 2 || table.gamma.size() != n || table.f.size() != n)
      throw ValidationError("material.table",
                            "need at least two rows with xi, gamma, f");
    for (std::size_t i = 1; i < n; ++i)
      if (!(table.xi[i] > table.xi[i - 1]))
        throw ValidationError("material.table", "xi must be strictly increasing");
    if (table.xi.front() > 0.0)
      throw ValidationError("material.table", "table must start at xi = 0");
    return CoefficientLaw(std::make_shared<const TabulatedLaw>(std::move(table)));
  }

  static CoefficientLaw closed_form(std::function<double(double)> gamma,
                                    std::function<double(double)> f,
                                    std::string label = "closed-form") {
    return CoefficientLaw(ClosedFormLaw{std::move(gamma), std::move(f),
                                        std::move(label)});
  }

  const Kind& kind() const noexcept { return kind_; }

  const PowerLaw* as_power_law() const noexcept {
    return std::get_if<PowerLaw>(&kind_);
  }

  double gamma(double xi) const {
    return std::visit(
        [xi](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, PowerLaw>) {
            return k.gamma_star * std::pow(xi + 1.0, k.mu);
          } else if constexpr (std::is_same_v<K, ClosedFormLaw>) {
            return k.gamma(xi);
          } else {
            return table_gamma(*k, xi);
          }
        },
        kind_);
  }

  double f(double xi) const {
    return std::visit(
        [xi](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, PowerLaw>) {
            return k.f_star * xi;
          } else if constexpr (std::is_same_v<K, ClosedFormLaw>) {
            return k.f(xi);
          } else {
            return table_f(*k, xi);
          }
        },
        kind_);
  }

  double gamma_prime(double xi) const {
    if (auto p = as_power_law())
      return p->gamma_star * p->mu * std::pow(xi + 1.0, p->mu - 1.0);
    return centred_difference([this](double s) { return gamma(s); }, xi);
  }

  double f_prime(double xi) const {
    if (auto p = as_power_law()) return p->f_star;
    return centred_difference([this](double s) { return f(s); }, xi);
  }

  std::string describe() const {
    if (auto p = as_power_law())
      return "power_law(gamma_star=" + std::to_string(p->gamma_star) +
             ", mu=" + std::to_string(p->mu) +
             ", f_star=" + std::to_string(p->f_star) + ")";
    if (auto c = std::get_if<ClosedFormLaw>(&kind_)) return c->label;
    return "tabulated";
  }

 private:
  explicit CoefficientLaw(Kind k) : kind_(std::move(k)) {}

  template <class G>
  static double centred_difference(const G& g, double xi) {
    const double step = 1e-6 * (1.0 + std::abs(xi));
    // The coefficients live on [0, inf); fall back to a forward difference.
    if (xi - step < 0.0) return (g(xi + step) - g(xi)) / step;
    return (g(xi + step) - g(xi - step)) / (2.0 * step);
  }

  static std::size_t segment(const TabulatedLaw& t, double xi) {
    auto it = std::upper_bound(t.xi.begin(), t.xi.end(), xi);
    auto i = static_cast<std::size_t>(std::distance(t.xi.begin(), it));
    return std::clamp<std::size_t>(i, 1, t.xi.size() - 1) - 1;
  }

  static double table_gamma(const TabulatedLaw& t, double xi) {
    const auto n = t.xi.size();
    if (xi >= t.xi.back()) {
      const double slope =
          std::log(t.gamma[n - 1] / t.gamma[n - 2]) /
          std::log((1.0 + t.xi[n - 1]) / (1.0 + t.xi[n - 2]));
      return t.gamma[n - 1] * std::pow((1.0 + xi) / (1.0 + t.xi[n - 1]), slope);
    }
    const auto i = segment(t, xi);
    const double w = (xi - t.xi[i]) / (t.xi[i + 1] - t.xi[i]);
    return (1.0 - w) * t.gamma[i] + w * t.gamma[i + 1];
  }

  static double table_f(const TabulatedLaw& t, double xi) {
    if (xi >= t.xi.back()) return t.f.back();
    const auto i = segment(t, xi);
    const double w = (xi - t.xi[i]) / (t.xi[i + 1] - t.xi[i]);
    return (1.0 - w) * t.f[i] + w * t.f[i + 1];
  }

  Kind kind_;
};

struct AssumptionReport {
  bool positive = true;   // gamma > 0
  bool f_vanishes_at_zero = true;
  bool monotone = true;   // gamma' >= 0
  bool integrable = true; // 1/gamma integrable at infinity
  std::optional<double> positive_fail_xi;
  std::optional<double> monotone_fail_xi;
  std::string integrable_reason;

  bool all() const noexcept {
    return positive && f_vanishes_at_zero && monotone && integrable;
  }
};

struct PsiQuadrature {
  double value = 0.0;
  double tail_estimate = 0.0;
  double cutoff = 0.0;
  int blocks = 0;
};

namespace detail {

inline double checked_gamma(const CoefficientLaw& law, double xi) {
  const double g = law.gamma(xi);
  if (!std::isfinite(g)) throw EvaluationError("gamma is not finite", xi);
  return g;
}

inline double checked_f(const CoefficientLaw& law, double xi) {
  const double v = law.f(xi);
  if (!std::isfinite(v)) throw EvaluationError("f is not finite", xi);
  return v;
}

}  // namespace detail

/// psi(xi) = int_xi^inf dsigma / gamma(sigma) by adaptive quadrature over
/// doubling blocks [s, 2s+1] and a geometric tail estimate.
///
/// The loop stops once (cut+1)/gamma(cut) * r/(1-r) < abs_tol/2, where r is
/// the ratio of the last two block integrals.
inline PsiQuadrature psi_quadrature(const CoefficientLaw& law, double xi,
                                    double abs_tol) {
  constexpr int kMaxBlocks = 1100;
  constexpr int kMaxStalled = 40;
  auto inv_gamma = [&law](double s) {
    return 1.0 / detail::checked_gamma(law, s);
  };

  PsiQuadrature out;
  double start = xi;
  double previous = std::numeric_limits<double>::quiet_NaN();
  int stalled = 0;
  for (int k = 0; k < kMaxBlocks; ++k) {
    const double end = 2.0 * start + 1.0;
    if (!std::isfinite(end)) break;
    const double block_tol = 0.25 * abs_tol * std::ldexp(1.0, -std::min(k + 1, 60));
    auto block = quadrature::integrate(inv_gamma, start, end, block_tol);
    out.value += block.value;
    out.blocks = k + 1;
    out.cutoff = end;
    if (k > 0 && previous > 0.0) {
      const double r = block.value / previous;
      if (r < 1.0) {
        stalled = 0;
        const double bound = (end + 1.0) * inv_gamma(end) * r / (1.0 - r);
        if (bound < 0.5 * abs_tol) {
          out.tail_estimate = block.value * r / (1.0 - r);
          out.value += out.tail_estimate;
          return out;
        }
      } else if (++stalled >= kMaxStalled) {
        throw DivergentIntegral("integral of 1/gamma diverges: block ratio " +
                                std::to_string(r) + " near xi = " +
                                std::to_string(end));
      }
    } else if (block.value == 0.0) {
      return out;
    }
    previous = block.value;
    start = end;
  }
  throw DivergentIntegral("tail of 1/gamma not shrinking below tolerance up to xi = " +
                          std::to_string(out.cutoff));
}

/// psi(xi) = int_xi^inf dsigma / gamma(sigma).
inline double psi_eval(const CoefficientLaw& law, double xi,
                       double abs_tol = 1e-10) {
  if (auto p = law.as_power_law()) {
    if (p->mu <= 1.0)
      throw DivergentIntegral("power law with mu <= 1 has non-integrable 1/gamma");
    return std::pow(xi + 1.0, 1.0 - p->mu) / (p->gamma_star * (p->mu - 1.0));
  }
  return psi_quadrature(law, xi, abs_tol).value;
}

inline bool psi_converges(const CoefficientLaw& law, std::string* reason = nullptr) {
  try {
    psi_eval(law, 0.0);
    return true;
  } catch (const DivergentIntegral& e) {
    if (reason) *reason = e.what();
    return false;
  }
}

inline AssumptionReport validate_assumptions(const CoefficientLaw& law,
                                             const std::vector<double>& sample_grid) {
  if (sample_grid.empty())
    throw ValidationError("sample_grid", "must not be empty");
  if (!std::is_sorted(sample_grid.begin(), sample_grid.end()) ||
      sample_grid.front() < 0.0)
    throw ValidationError("sample_grid", "must be sorted and nonnegative");

  AssumptionReport report;
  for (double xi : sample_grid) {
    const double g = detail::checked_gamma(law, xi);
    detail::checked_f(law, xi);
    if (g <= 0.0 && report.positive) {
      report.positive = false;
      report.positive_fail_xi = xi;
    }
    const double gp = law.gamma_prime(xi);
    if (!std::isfinite(gp)) throw EvaluationError("gamma' is not finite", xi);
    if (xi > 0.0 && gp < -1e-9 * std::max(1.0, std::abs(g)) && report.monotone) {
      report.monotone = false;
      report.monotone_fail_xi = xi;
    }
  }
  report.f_vanishes_at_zero = detail::checked_f(law, 0.0) == 0.0;
  if (report.positive)
    report.integrable = psi_converges(law, &report.integrable_reason);
  else {
    report.integrable = false;
    report.integrable_reason = "gamma not positive";
  }
  return report;
}

/// Log-spaced samples 0, ..., xi_max with dense coverage near zero.
inline std::vector<double> default_sample_grid(double xi_max = 1e6, int n = 400) {
  std::vector<double> out;
  out.reserve(n);
  const double top = std::log1p(xi_max);
  for (int i = 0; i < n; ++i) out.push_back(std::expm1(top * i / (n - 1)));
  out.back() = xi_max;
  return out;
}

/// Lambda = sup_{xi >= 0} f(xi)^2 / gamma(xi); +inf when unbounded.
inline double lambda_bound(const CoefficientLaw& law, double xi_max = 1e4,
                           int n_samples = 20001) {
  if (!(xi_max > 0.0) || n_samples < 2)
    throw ValidationError("lambda_bound", "need xi_max > 0 and n_samples >= 2");
  constexpr double kInf = std::numeric_limits<double>::infinity();

  if (auto p = law.as_power_law()) {
    if (p->f_star == 0.0) return 0.0;
    if (p->mu < 2.0) return kInf;
    if (p->mu == 2.0) return p->f_star * p->f_star / p->gamma_star;
  }

  auto ratio = [&law](double xi) {
    const double fv = detail::checked_f(law, xi);
    return fv * fv / detail::checked_gamma(law, xi);
  };

  // Half the budget uniform, half geometric, so narrow peaks near zero are seen.
  std::vector<double> xs;
  xs.reserve(n_samples + 1);
  const int n_uniform = std::max(2, n_samples / 2);
  const int n_geometric = std::max(2, n_samples - n_uniform);
  for (int i = 0; i < n_uniform; ++i) xs.push_back(xi_max * i / (n_uniform - 1));
  const double top = std::log1p(xi_max);
  for (int i = 0; i < n_geometric; ++i)
    xs.push_back(std::min(xi_max, std::expm1(top * i / (n_geometric - 1))));
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  std::size_t best = 0;
  double best_value = -1.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ratio(xs[i]);
    if (r > best_value) {
      best_value = r;
      best = i;
    }
  }

  if (best + 1 == xs.size()) {
    const double probe = xi_max * (1.0 - 1e-3);
    if (ratio(xi_max) > ratio(probe)) return kInf;
    return best_value;
  }

  // Golden-section refinement on the bracket around the sampled argmax.
  double lo = xs[best == 0 ? 0 : best - 1];
  double hi = xs[best + 1];
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - phi * (hi - lo);
  double x2 = lo + phi * (hi - lo);
  double r1 = ratio(x1), r2 = ratio(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + std::abs(hi)); ++it) {
    if (r1 > r2) {
      hi = x2;
      x2 = x1;
      r2 = r1;
      x1 = hi - phi * (hi - lo);
      r1 = ratio(x1);
    } else {
      lo = x1;
      x1 = x2;
      r1 = r2;
      x2 = lo + phi * (hi - lo);
      r2 = ratio(x2);
    }
  }
  return std::max({best_value, r1, r2});
}

/// Scalars derived from a law once per run.
struct DerivedScalars {
  double gamma_at_zero = 0.0;
  double psi_at_zero = 0.0;  // +inf when 1/gamma is not integrable
  double lambda = 0.0;
  bool integrable = false;
  AssumptionReport assumptions;
};

inline DerivedScalars derive_scalars(const CoefficientLaw& law) {
  DerivedScalars d;
  d.assumptions = validate_assumptions(law, default_sample_grid());
  d.gamma_at_zero = law.gamma(0.0);
  d.integrable = d.assumptions.integrable;
  d.psi_at_zero = d.integrable ? psi_eval(law, 0.0)
                               : std::numeric_limits<double>::infinity();
  d.lambda = lambda_bound(law);
  return d;
}

/// Memoised psi on a log-spaced table over [0, xi_max]. Interpolation is
/// linear in (log(1+xi), log psi), which is monotone and exact for power laws.
/// Arguments beyond the table fall back to direct evaluation.
class PsiTable {
 public:
  PsiTable(CoefficientLaw law, double xi_max, int points = 2048)
      : law_(std::move(law)), xi_max_(xi_max) {
    log_top_ = std::log1p(xi_max_);
    std::vector<double> xs(points);
    for (int i = 0; i < points; ++i)
      xs[i] = i + 1 == points ? xi_max_ : std::expm1(log_top_ * i / (points - 1));
    log_psi_.assign(points, 0.0);
    if (law_.as_power_law()) {
      for (int i = 0; i < points; ++i) log_psi_[i] = std::log(psi_eval(law_, xs[i]));
      return;
    }
    // One tail evaluation, then accumulate segment integrals downwards.
    auto inv_gamma = [this](double s) { return 1.0 / detail::checked_gamma(law_, s); };
    double psi = psi_eval(law_, xi_max_);
    log_psi_[points - 1] = std::log(psi);
    for (int i = points - 2; i >= 0; --i) {
      psi += quadrature::integrate(inv_gamma, xs[i], xs[i + 1], 1e-14 * psi, 1e-13).value;
      log_psi_[i] = std::log(psi);
    }
  }

  double operator()(double xi) const {
    if (xi >= xi_max_ || xi < 0.0) return psi_eval(law_, std::max(xi, 0.0));
    const double s = std::log1p(xi) / log_top_ * static_cast<double>(log_psi_.size() - 1);
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(s), log_psi_.size() - 2);
    const double w = s - static_cast<double>(i);
    return std::exp((1.0 - w) * log_psi_[i] + w * log_psi_[i + 1]);
  }

  const CoefficientLaw& law() const noexcept { return law_; }
  double xi_max() const noexcept { return xi_max_; }

 private:
  CoefficientLaw law_;
  double xi_max_;
  double log_top_;
  std::vector<double> log_psi_;
};

}  // namespace hotspot
