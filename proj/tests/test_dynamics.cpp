#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "hotspot/dynamics.hpp"
#include "hotspot/functionals.hpp"

using namespace hotspot;
using std::numbers::pi;

namespace {

constexpr auto Dir = BoundaryCondition::DirichletZero;

std::vector<double> constant(const Grid1D& g, double c) { return std::vector<double>(g.n_nodes(), c); }

std::vector<double> hat(const Grid1D& g, double height, double half_width) {
  return Field::sample(g, Dir, [&](double x) {
           return height * std::max(0.0, 1.0 - std::abs(x - 0.5) / half_width);
         }).values;
}

Params quadratic(double f_star = 0.0) {
  Params p;
  p.law = CoefficientLaw::power_law(1.0, 2.0, f_star);
  return p;
}

}  // namespace

TEST(Rhs, EquilibriumIsFixed) {
  Grid1D g(0, 1, 32);
  auto s = make_initial_state(g, constant(g, 0), constant(g, 0), constant(g, 3.0), 1.0);
  auto d = rhs(s, quadratic());
  for (std::size_t i = 0; i < s.u.size(); ++i) {
    EXPECT_EQ(d.dv[i], 0.0);
    EXPECT_EQ(d.du[i], 0.0);
    EXPECT_EQ(d.dtheta[i], 0.0);
  }
}

TEST(Rhs, HeatSourceIsViscousDissipation) {
  // u = 0, gamma = 1, f = 0: theta_t = D theta_xx + |v_x|^2
  Grid1D g(0, 1, 256);
  Params p;
  p.law = CoefficientLaw::power_law(1.0, 0.0, 0.0);
  p.D = 0.5;
  auto v = Field::sample(g, Dir, [](double x) { return std::sin(pi * x); }).values;
  auto th = Field::sample(g, BoundaryCondition::NeumannZero, [](double x) { return 1 + x * x; }).values;
  auto s = make_initial_state(g, constant(g, 0), v, th, p.a);
  auto d = rhs(s, p);
  auto lap = laplacian_neumann(s.theta, g);
  for (std::size_t i = 0; i < s.u.size(); ++i) {
    const double vx = pi * std::cos(pi * g.node(i));
    EXPECT_NEAR(d.dtheta[i], p.D * lap[i] + vx * vx, 2e-3) << i;
  }
}

TEST(Rhs, ManufacturedSolutionResidualIsSecondOrder) {
  // u = e^{-t} sin(pi x), a = 2: v = u_t + a u = e^{-t} sin(pi x).
  // The spatial part of the v equation is v_xx + a v - a^2 u.
  double prev = 0.0;
  for (int n : {32, 64, 128, 256}) {
    Grid1D g(0, 1, n);
    Params p;
    p.a = 2.0;
    p.law = CoefficientLaw::power_law(1.0, 0.0, 0.0);
    auto sine = Field::sample(g, Dir, [](double x) { return std::sin(pi * x); }).values;
    std::vector<double> u0t(sine.size());
    for (std::size_t i = 0; i < sine.size(); ++i) u0t[i] = -sine[i];
    auto s = make_initial_state(g, sine, u0t, constant(g, 0.0), p.a);
    auto d = rhs(s, p);
    double e = 0.0;
    for (std::size_t i = 1; i + 1 < sine.size(); ++i) {
      const double exact = (-pi * pi + p.a - p.a * p.a) * sine[i];
      e = std::max(e, std::abs(d.dv[i] - exact));
      EXPECT_NEAR(d.du[i], -sine[i], 1e-14);
    }
    if (prev > 0.0) {
      EXPECT_GT(std::log2(prev / e), 1.9) << n;
    }
    prev = e;
  }
}

TEST(Step, EquilibriumUnchanged) {
  Grid1D g(0, 1, 64);
  auto s = make_initial_state(g, constant(g, 0), constant(g, 0), constant(g, 2.5), 1.0);
  auto next = step(s, 1e-3, quadratic(1.0));
  for (std::size_t i = 0; i < s.u.size(); ++i) {
    EXPECT_NEAR(next.theta[i], 2.5, 1e-14);
    EXPECT_EQ(next.u[i], 0.0);
    EXPECT_EQ(next.v[i], 0.0);
  }
  EXPECT_DOUBLE_EQ(next.t, 1e-3);
}

TEST(Step, HeatModeDecaysAtAnalyticRate) {
  Grid1D g(0, 1, 256);
  Params p = quadratic();
  p.D = 1.0;
  p.horizon = 0.05;
  p.step_rel_tol = 1e-7;
  auto th = Field::sample(g, BoundaryCondition::NeumannZero,
                          [](double x) { return std::cos(pi * x) + 2.0; }).values;
  auto s0 = make_initial_state(g, constant(g, 0), constant(g, 0), th, p.a);
  auto out = advance(s0, p);
  ASSERT_EQ(out.kind, OutcomeKind::Completed);
  const auto& t = out.final_state.theta;
  const double amplitude = 0.5 * (t[0] - t.values.back());
  EXPECT_NEAR(amplitude, std::exp(-pi * pi * p.horizon), 0.01 * std::exp(-pi * pi * p.horizon));
  EXPECT_NEAR(integrate(t.values, g), 2.0, 1e-12);
}

TEST(Step, EnergyGrowthWithinGronwallFactor) {
  Grid1D g(0, 1, 128);
  Params p;
  p.a = 1.0;
  p.law = CoefficientLaw::power_law(1.0, 0.0, 0.0);
  auto v = Field::sample(g, Dir, [](double x) { return std::sin(pi * x); }).values;
  auto s = make_initial_state(g, constant(g, 0), v, constant(g, 0), p.a);
  for (double dt : {1e-4, 1e-3, 1e-2}) {
    auto next = step(s, dt, p);
    std::vector<double> sq0(v.size()), sq1(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      sq0[i] = s.v[i] * s.v[i];
      sq1[i] = next.v[i] * next.v[i];
    }
    EXPECT_LE(integrate(sq1, g), std::exp(2.0 * p.a * dt) * integrate(sq0, g));
  }
}

TEST(Advance, ZeroDataStaysConstant) {
  Grid1D g(0, 1, 64);
  auto s0 = make_initial_state(g, constant(g, 0), constant(g, 0), constant(g, 1.0), 1.0);
  auto out = advance(s0, quadratic());
  ASSERT_EQ(out.kind, OutcomeKind::Completed);
  EXPECT_DOUBLE_EQ(out.final_state.t, 1.0);
  for (const auto& row : out.trajectory.rows) {
    EXPECT_NEAR(row.theta_max, 1.0, 1e-12);
    EXPECT_NEAR(row.theta_min, 1.0, 1e-12);
    EXPECT_EQ(row.accum.int_grad_ut_sq, 0.0);
  }
  EXPECT_EQ(out.trajectory.checkpoints.size(), 21u);
}

TEST(Advance, RejectsInadmissibleInitialData) {
  Grid1D g(0, 1, 16);
  auto s0 = make_initial_state(g, constant(g, 0), constant(g, 0), constant(g, 1.0), 1.0);
  auto bad = s0;
  bad.theta.values[3] = -1.0;
  EXPECT_THROW(advance(bad, quadratic()), ValidationError);
  bad = s0;
  bad.u.values[0] = 0.1;
  EXPECT_THROW(advance(bad, quadratic()), ValidationError);
  Params p = quadratic();
  p.dt_min = 1.0;
  EXPECT_THROW(advance(s0, p), ValidationError);
}

TEST(Advance, StepBudgetAborts) {
  Grid1D g(0, 1, 16);
  auto s0 = make_initial_state(g, hat(g, 0.1, 0.2), constant(g, 0), constant(g, 0.0), 1.0);
  Params p = quadratic();
  p.max_steps = 3;
  auto out = advance(s0, p);
  EXPECT_EQ(out.kind, OutcomeKind::Aborted);
}

class CoupledRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    Grid1D g(0, 1, 128);
    Params p = quadratic(0.5);
    auto s0 = make_initial_state(g, hat(g, 0.5, 0.1), constant(g, 0), constant(g, 0.2), p.a);
    params_ = new Params(p);
    out_ = new RunOutcome(advance(s0, p));
  }
  static void TearDownTestSuite() {
    delete out_;
    delete params_;
  }
  static RunOutcome* out_;
  static Params* params_;
};
RunOutcome* CoupledRun::out_ = nullptr;
Params* CoupledRun::params_ = nullptr;

TEST_F(CoupledRun, DetectsBlowUp) {
  EXPECT_EQ(out_->kind, OutcomeKind::BlowUpDetected);
  EXPECT_LT(out_->t_detect, 1.0);
  EXPECT_GE(out_->trajectory.rows.back().theta_max, params_->theta_blowup_threshold);
  // the extrapolated time lies just beyond detection
  EXPECT_GE(out_->extrapolated_blowup_time, out_->t_detect * (1 - 1e-6));
  EXPECT_LT(out_->extrapolated_blowup_time, out_->t_detect * 1.01);
}

TEST_F(CoupledRun, DirichletValuesStayZero) {
  for (const auto& cp : out_->trajectory.checkpoints) {
    EXPECT_EQ(cp.state.u[0], 0.0);
    EXPECT_EQ(cp.state.u.values.back(), 0.0);
    EXPECT_EQ(cp.state.v[0], 0.0);
    EXPECT_EQ(cp.state.v.values.back(), 0.0);
  }
}

TEST_F(CoupledRun, AccumulatorsAreNondecreasing) {
  const auto& rows = out_->trajectory.rows;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    EXPECT_GE(rows[k].accum.int_grad_ut_sq, rows[k - 1].accum.int_grad_ut_sq);
    EXPECT_GE(rows[k].accum.int_grad_v_gamma, rows[k - 1].accum.int_grad_v_gamma);
    EXPECT_GE(rows[k].accum.int_grad_u_sq, rows[k - 1].accum.int_grad_u_sq);
    EXPECT_GE(rows[k].accum.int_grad_uav_sq, rows[k - 1].accum.int_grad_uav_sq);
    EXPECT_GT(rows[k].t, rows[k - 1].t);
  }
}

TEST_F(CoupledRun, MinimumPrincipleAndNonnegativity) {
  const double lambda = lambda_bound(params_->law);
  const double eps = 10.0 * params_->step_rel_tol * 1.2;
  for (const auto& row : out_->trajectory.rows) {
    EXPECT_GE(row.theta_min, 0.2 - 0.25 * lambda * row.t - eps);
    EXPECT_GE(row.theta_min, -1e-8 * (1.0 + row.theta_max));
    EXPECT_LE(row.theta_running_min, row.theta_min);
  }
}

TEST(Advance, ThresholdInsensitivity) {
  // Near the asymptote max theta ~ (t* - t)^{-1}: raising the threshold 10x
  // moves detection by about 0.9 / (c * threshold) in time.
  Grid1D g(0, 1, 128);
  Params p = quadratic();
  auto s0 = make_initial_state(g, hat(g, 1.0, 0.1), constant(g, 0), constant(g, 0.0), p.a);
  auto low = advance(s0, p);
  p.theta_blowup_threshold *= 10.0;
  auto high = advance(s0, p);
  ASSERT_EQ(low.kind, OutcomeKind::BlowUpDetected);
  ASSERT_EQ(high.kind, OutcomeKind::BlowUpDetected);
  EXPECT_GE(high.t_detect, low.t_detect);
  EXPECT_LT(high.t_detect - low.t_detect, 1e-6 * low.t_detect);
  EXPECT_NEAR(high.extrapolated_blowup_time, low.extrapolated_blowup_time,
              1e-6 * low.t_detect);
}

TEST(Advance, SelfConvergenceInSpace) {
  // smooth data, well before blow-up
  Params p = quadratic(0.3);
  p.horizon = 0.05;
  p.step_rel_tol = 1e-6;
  std::vector<Field> finals;
  for (int n : {64, 128, 256}) {
    Grid1D g(0, 1, n);
    auto u0 = Field::sample(g, Dir, [](double x) { return 0.2 * std::sin(pi * x); }).values;
    auto th = Field::sample(g, BoundaryCondition::NeumannZero,
                            [](double x) { return 0.5 + 0.2 * std::cos(pi * x); }).values;
    auto out = advance(make_initial_state(g, u0, constant(g, 0), th, p.a), p);
    ASSERT_EQ(out.kind, OutcomeKind::Completed);
    finals.push_back(out.final_state.theta);
  }
  auto diff = [](const Field& coarse, const Field& fine) {
    double e = 0.0;
    for (std::size_t i = 0; i < coarse.size(); ++i) e = std::max(e, std::abs(coarse[i] - fine[2 * i]));
    return e;
  };
  const double e1 = diff(finals[0], finals[1]), e2 = diff(finals[1], finals[2]);
  EXPECT_GT(std::log2(e1 / e2), 1.8);
}
