#include <chrono>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "hotspot/certificates.hpp"

using namespace hotspot;
using std::numbers::e;
using std::numbers::pi;

namespace {

const auto kQuadratic = CoefficientLaw::power_law(1.0, 2.0, 0.0);

std::vector<double> constant(const Grid1D& g, double c) { return std::vector<double>(g.n_nodes(), c); }

InitialSummary summarize(const Grid1D& g, std::vector<double> u0, double theta0 = 0.0) {
  auto s = make_initial_state(g, std::move(u0), constant(g, 0), constant(g, theta0), 1.0);
  return summarize_initial(s, kQuadratic, 1.0);
}

std::vector<double> hat(const Grid1D& g, double height, double half_width) {
  return Field::sample(g, BoundaryCondition::DirichletZero, [&](double x) {
           return height * std::max(0.0, 1.0 - std::abs(x - 0.5) / half_width);
         }).values;
}

}  // namespace

TEST(StrainCriterion, ConstantForQuadraticLaw) {
  const double C = theorem65_constant(kQuadratic, 1.0, 1.0, 1.0);
  EXPECT_NEAR(C, 12.0 * e * e, 1e-9 * 12.0 * e * e);
  EXPECT_NEAR(C, 88.669, 1e-3);
  auto c = theorem65_constants(derive_scalars(kQuadratic), 1.0, 1.0, 1.0);
  EXPECT_NEAR(c.bound_u0t, 8.0 * e * e, 1e-12);
  EXPECT_NEAR(c.bound_data, 12.0, 1e-12);
}

TEST(StrainCriterion, DataTermIsSmallestAtBalancedHorizon) {
  // without thermal stress the data term is (8/(a^2 T) + 4T) psi(0), which
  // is smallest at T = sqrt(2)/a with value 8 sqrt(2)/a
  const auto m = derive_scalars(kQuadratic);
  const double a = 1e-3, T_star = std::sqrt(2.0) / a;
  const double at_star = theorem65_constants(m, a, T_star, 1.0).bound_data;
  EXPECT_NEAR(at_star, 8.0 * std::sqrt(2.0) / a, 1e-9 * at_star);
  for (double s : {0.01, 0.1, 0.5, 2.0, 10.0, 100.0})
    EXPECT_GT(theorem65_constants(m, a, s * T_star, 1.0).bound_data, at_star) << s;
}

TEST(StrainCriterion, ScalingInGammaZero) {
  auto a = theorem65_constants(derive_scalars(CoefficientLaw::power_law(1, 2, 0)), 1, 1, 1);
  auto b = theorem65_constants(derive_scalars(CoefficientLaw::power_law(2, 2, 0)), 1, 1, 1);
  EXPECT_NEAR(b.bound_u0, 0.5 * a.bound_u0, 1e-14 * a.bound_u0);
  EXPECT_NEAR(b.bound_u0t, 0.5 * a.bound_u0t, 1e-14 * a.bound_u0t);
}

TEST(StrainCriterion, MonotoneInLambdaPsiAndMeasure) {
  auto base = derive_scalars(CoefficientLaw::power_law(1, 2, 0.5));
  const double C0 = theorem65_constants(base, 1, 2, 1).C;
  auto more_lambda = base;
  more_lambda.lambda *= 2;
  EXPECT_GE(theorem65_constants(more_lambda, 1, 2, 1).C, C0);
  auto more_psi = base;
  more_psi.psi_at_zero *= 2;
  EXPECT_GE(theorem65_constants(more_psi, 1, 2, 1).C, C0);
  EXPECT_GE(theorem65_constants(base, 1, 2, 3).C, C0);
  auto higher_gamma = base;
  higher_gamma.gamma_at_zero *= 2;
  EXPECT_LE(theorem65_constants(higher_gamma, 1, 2, 1).C, C0);
}

TEST(StrainCriterion, Verdicts) {
  Grid1D g(0, 1, 512);
  const auto m = derive_scalars(kQuadratic);
  auto zero = check_theorem65(summarize(g, constant(g, 0)), m, 1, 1);
  EXPECT_EQ(zero.verdict, Verdict::ConditionNotMet);
  // A sin(pi x) gives A^2 pi^2/2 >= C (A^2/2 + 1): impossible for C > pi^2
  for (double A : {0.1, 1.0, 10.0, 1000.0}) {
    auto u0 = Field::sample(g, BoundaryCondition::DirichletZero,
                            [&](double x) { return A * std::sin(pi * x); }).values;
    EXPECT_EQ(check_theorem65(summarize(g, u0), m, 1, 1).verdict, Verdict::ConditionNotMet) << A;
  }
  // narrow unit hat: 2/w against C (2w/3 + 1)
  auto narrow = check_theorem65(summarize(g, hat(g, 1.0, 0.01)), m, 1, 1);
  EXPECT_EQ(narrow.verdict, Verdict::BlowupGuaranteed);
  EXPECT_GT(narrow.margin, 0.0);
  auto wide = check_theorem65(summarize(g, hat(g, 1.0, 0.25)), m, 1, 1);
  EXPECT_EQ(wide.verdict, Verdict::ConditionNotMet);
}

TEST(StrainCriterion, UnavailableWithoutAssumptions) {
  Grid1D g(0, 1, 32);
  auto m = derive_scalars(CoefficientLaw::power_law(1, 0, 0));
  auto r = check_theorem65(summarize(g, constant(g, 0)), m, 1, 1);
  EXPECT_EQ(r.verdict, Verdict::Unavailable);
  EXPECT_FALSE(r.reason.empty());
  auto lam = derive_scalars(CoefficientLaw::power_law(1, 1.5, 1));
  EXPECT_EQ(check_theorem65(summarize(g, constant(g, 0)), lam, 1, 1).verdict, Verdict::Unavailable);
}

TEST(TemperatureCriterion, ExampleConstantIs47) {
  const auto m = derive_scalars(kQuadratic);
  auto c = theorem66_constants(kQuadratic, m, 1, 1, 1, 1.0, 1.0);
  EXPECT_EQ(c.c1, 12.0);
  EXPECT_EQ(c.c4, 0.0);
  EXPECT_NEAR(c.C, 47.0, 47.0 * 2e-6);
  // the two scalar conditions at C
  EXPECT_LE(12.0 / (1.0 + c.C), 0.25 * (1 + 1e-6));
  EXPECT_LE(20.0 * e * e / std::pow(1.0 + 0.5 * c.C, 2), 0.25);
}

TEST(TemperatureCriterion, LargerEtaGivesSmallerC) {
  const auto m = derive_scalars(kQuadratic);
  double prev = INFINITY;
  for (double eta : {1.0, 10.0, 100.0}) {
    const double C = theorem66_constants(kQuadratic, m, 1, 1, 1, eta, 1.0).C;
    EXPECT_LT(C, prev);
    prev = C;
  }
}

TEST(TemperatureCriterion, NoDataTermsLeavesPsiCondition) {
  const auto m = derive_scalars(kQuadratic);
  // M = 0, Lambda = 0: only 12 / (1 + C) <= eta / 4 matters
  const double C = theorem66_constants(kQuadratic, m, 1, 1, 1, 4.0, 0.0).C;
  EXPECT_NEAR(C, 11.0, 11.0 * 2e-6);
}

TEST(TemperatureCriterion, Verdicts) {
  Grid1D g(0, 1, 256);
  const auto m = derive_scalars(kQuadratic);
  auto hot = summarize(g, hat(g, 0.2, 0.1), 1000.0);
  EXPECT_EQ(check_theorem66(hot, kQuadratic, m, 1, 1).verdict, Verdict::BlowupGuaranteed);
  auto cold = summarize(g, hat(g, 0.2, 0.1), 1.0);
  EXPECT_EQ(check_theorem66(cold, kQuadratic, m, 1, 1).verdict, Verdict::ConditionNotMet);
  // eta larger than the data provides
  auto r = check_theorem66(hot, kQuadratic, m, 1, 1, hot.grad_u0_sq * 2, 1.0);
  EXPECT_EQ(r.verdict, Verdict::ConditionNotMet);
}

TEST(NecessaryCondition, Verdicts) {
  Grid1D g(0, 1, 256);
  const auto m = derive_scalars(kQuadratic);
  EXPECT_EQ(check_lemma64(summarize(g, constant(g, 0)), m, kQuadratic, 1, 1).verdict,
            Verdict::ConditionNotMet);
  auto r = check_lemma64(summarize(g, hat(g, 1.0, 0.1)), m, kQuadratic, 1, 1);
  EXPECT_EQ(r.verdict, Verdict::BlowupGuaranteed);
  EXPECT_NEAR(r.constants.at("rhs"), lemma64_rhs(summarize(g, hat(g, 1.0, 0.1)), 1.0, 1, 0, 1), 1e-12);
}

TEST(NecessaryCondition, MarginGrowsWithInitialTemperature) {
  Grid1D g(0, 1, 256);
  const auto law = CoefficientLaw::power_law(1, 2, 0.5);
  const auto m = derive_scalars(law);
  double prev = -INFINITY;
  for (double th : {0.0, 10.0, 100.0}) {
    auto s = make_initial_state(g, hat(g, 0.5, 0.1), constant(g, 0), constant(g, th), 1.0);
    auto r = check_lemma64(summarize_initial(s, law, 1.0), m, law, 1, 1);
    EXPECT_GE(r.margin, prev);
    prev = r.margin;
  }
}

TEST(SufficientThreshold, Verdicts) {
  Grid1D g(0, 1, 256);
  const auto m = derive_scalars(kQuadratic);
  Params p;
  auto r = check_remark_i(summarize(g, hat(g, 1.0, 0.05)), m, p, 1.0);
  EXPECT_EQ(r.verdict, Verdict::BlowupGuaranteed);
  EXPECT_EQ(check_remark_i(summarize(g, constant(g, 0)), m, p, 1.0).verdict,
            Verdict::ConditionNotMet);
}

TEST(Comparison, QuadraticLawBlowsUpAtOne) {
  const auto start = std::chrono::steady_clock::now();
  EXPECT_NEAR(ode_blowup_time(kQuadratic, 1.0, 0.0), 1.0, 1e-15);
  auto integ = ode_blowup_integration(kQuadratic, 1.0, 0.0);
  ASSERT_TRUE(integ.crossed);
  EXPECT_NEAR(integ.crossing_time, 1.0 - 1e-10, 1e-9);
  EXPECT_NEAR(integ.extrapolated_time, 1.0, 5e-3);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 1.0);
}

TEST(Comparison, OtherExamples) {
  EXPECT_EQ(ode_blowup_time(CoefficientLaw::power_law(1, 0, 0), 1.0, 0.0), INFINITY);
  EXPECT_NEAR(ode_blowup_time(kQuadratic, 2.0, 1.0), 0.25, 1e-15);
  auto integ = ode_blowup_integration(kQuadratic, 2.0, 1.0);
  EXPECT_NEAR(integ.extrapolated_time, 0.25, 0.25 * 5e-3);
  auto cubic = CoefficientLaw::power_law(0.5, 3.0, 0.0);
  const double t = ode_blowup_time(cubic, 1.5, 0.2);
  EXPECT_NEAR(ode_blowup_integration(cubic, 1.5, 0.2).extrapolated_time, t, t * 5e-3);
  EXPECT_THROW(ode_blowup_time(kQuadratic, 0.0, 0.0), ValidationError);
}

TEST(Comparison, Report) {
  auto r = check_ode(kQuadratic, 1.0, 0.0);
  EXPECT_EQ(r.verdict, Verdict::BlowupGuaranteed);
  EXPECT_LT(r.constants.at("relative_disagreement"), 5e-3);
  EXPECT_EQ(check_ode(CoefficientLaw::power_law(1, 0, 0), 1.0, 0.0).verdict,
            Verdict::ConditionNotMet);
}

TEST(Soundness, NecessaryConditionCertifiedRunBlowsUp) {
  Grid1D g(0, 1, 256);
  Params p;
  auto s0 = make_initial_state(g, hat(g, 1.0, 0.1), constant(g, 0), constant(g, 0), p.a);
  const auto m = derive_scalars(p.law);
  auto cert = check_lemma64(summarize_initial(s0, p.law, p.a), m, p.law, p.a, 1.0);
  ASSERT_EQ(cert.verdict, Verdict::BlowupGuaranteed);
  auto out = advance(s0, p);
  EXPECT_EQ(out.kind, OutcomeKind::BlowUpDetected);
  EXPECT_LE(out.t_detect, 1.05);
}
