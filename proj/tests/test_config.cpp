#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "hotspot/config.hpp"

using namespace hotspot;

namespace {

std::string field_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ValidationError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST(Config, EmptyTextGivesDefaults) {
  auto c = parse_config_text("");
  EXPECT_EQ(c.n_cells, 256);
  EXPECT_EQ(c.a, 1.0);
  EXPECT_EQ(c.T, 1.0);
  EXPECT_EQ(c.material.mu, 2.0);
  EXPECT_EQ(c.theta0.kind, "const");
  auto s = c.initial_state();
  EXPECT_EQ(s.u.size(), 257u);
}

TEST(Config, FullConfig) {
  auto c = parse_config_text(R"(
seed = 3
[material]
kind = "power_law"   # quoted string
gamma_star = 2
mu = 3
f_star = 0.5
[domain]
x_left = -1
x_right = 1
n_cells = 64
[physics]
a = 0.5
D = 2
T = 0.25
[initial]
u0 = hat{0, 0.5, 2}
u0t = sine{amplitude=0.1, mode=2}
theta0 = cosine{1, 0.5, 1}
[solver]
dt_init = 1e-5
step_rel_tol = 1e-6
checkpoint_every = 0.05
[ode]
c = 2
theta0 = 1
[certify]
eta = 1
M = 1
[verify]
audit_tol = 0.01
)");
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.material.gamma_star, 2.0);
  EXPECT_EQ(c.x_left, -1.0);
  EXPECT_EQ(c.u0.kind, "hat");
  EXPECT_EQ(c.u0.param("height"), 2.0);
  EXPECT_EQ(c.u0t.param("mode"), 2.0);
  EXPECT_EQ(*c.ode_theta0, 1.0);
  EXPECT_EQ(c.audit_tol, 0.01);
  auto s = c.initial_state();
  EXPECT_DOUBLE_EQ(s.u[32], 2.0);
  EXPECT_DOUBLE_EQ(s.theta[0], 1.5);
  EXPECT_DOUBLE_EQ(s.theta[64], 0.5);
}

TEST(Config, ParseErrorsCarryLineNumbers) {
  try {
    parse_config_text("[physics]\na = 1\nthis line is wrong\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_THROW(parse_config_text("[physics\n"), ParseError);
  EXPECT_THROW(parse_config_text("[physics]\na = 1\na = 2\n"), ParseError);
  EXPECT_THROW(parse_config_text("[nonsense]\nx = 1\n"), ParseError);
  EXPECT_THROW(parse_config_text("[physics]\nb = 1\n"), ParseError);
}

TEST(Config, ValidationNamesTheField) {
  EXPECT_EQ(field_of("[initial]\ntheta0 = const{-1}\n"), "initial.theta0");
  try {
    parse_config_text("[initial]\ntheta0 = const{-1}\n");
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("theta0 nonnegative"), std::string::npos);
  }
  EXPECT_EQ(field_of("[initial]\nu0 = hat{0, 0.2, 1}\n"), "initial.u0");
  EXPECT_EQ(field_of("[initial]\nu0t = const{1}\n"), "initial.u0t");
  EXPECT_EQ(field_of("[physics]\na = -1\n"), "physics.a");
  EXPECT_EQ(field_of("[physics]\nD = 0\n"), "physics.D");
  EXPECT_EQ(field_of("[physics]\nT = abc\n"), "physics.T");
  EXPECT_EQ(field_of("[material]\ngamma_star = 0\n"), "material.gamma_star");
  EXPECT_EQ(field_of("[material]\nkind = \"foo\"\n"), "material.kind");
  EXPECT_EQ(field_of("[domain]\nn_cells = 2\n"), "domain.n_cells");
  EXPECT_EQ(field_of("[domain]\nn_cells = 10.5\n"), "domain.n_cells");
  EXPECT_EQ(field_of("[solver]\ndt_min = 1\n"), "solver.dt");
  EXPECT_EQ(field_of("[initial]\nu0 = hat{0.5, 0.1}\n"), "initial.u0");
  EXPECT_EQ(field_of("[initial]\nu0 = spline{1}\n"), "profile");
}

TEST(Config, SineVanishesAtEndpointsExactly) {
  auto c = parse_config_text("[initial]\nu0 = sine{3, 5}\n");
  auto s = c.initial_state();
  EXPECT_EQ(s.u[0], 0.0);
  EXPECT_EQ(s.u.values.back(), 0.0);
}

TEST(Config, EchoRoundTrips) {
  auto c = parse_config_text(
      "[physics]\na = 0.1\nT = 0.3\n[initial]\nu0 = hat{0.5, 0.1, 0.7}\ntheta0 = const{0.3}\n"
      "[solver]\nstep_rel_tol = 3e-6\n");
  auto again = parse_config_text(c.to_text());
  EXPECT_EQ(again.to_text(), c.to_text());
  EXPECT_EQ(again.a, 0.1);
  EXPECT_EQ(again.u0.param("height"), 0.7);
  EXPECT_EQ(again.theta0.param("value"), 0.3);
  EXPECT_EQ(again.step_rel_tol, 3e-6);
}

TEST(Config, Overrides) {
  auto raw = RawConfig::parse_text("[initial]\nu0 = hat{0.5, 0.1, 1}\n");
  override_value(raw, "initial.u0.height", 4.0);
  override_value(raw, "physics.a", 0.25);
  auto c = build_config(raw);
  EXPECT_EQ(c.u0.param("height"), 4.0);
  EXPECT_EQ(c.u0.param("width"), 0.1);
  EXPECT_EQ(c.a, 0.25);
  EXPECT_THROW(override_value(raw, "initial.u0.amplitude", 1.0), ValidationError);
  EXPECT_THROW(override_value(raw, "physics", 1.0), ValidationError);
}

TEST(Config, TabulatedLawAndCsvProfile) {
  const auto dir = std::filesystem::temp_directory_path() / "hotspot_config_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream t(dir / "law.csv");
    t << "xi,gamma,f\n0,1,0\n1,4,0.5\n3,16,1.5\n";
    std::ofstream p(dir / "theta.csv");
    p << "x,value\n0,1\n1,3\n";
    std::ofstream c(dir / "run.ini");
    c << "[material]\nkind = custom\ntable = law.csv\n[domain]\nn_cells = 8\n"
         "[initial]\ntheta0 = csv{theta.csv}\n";
  }
  auto cfg = parse_config(dir / "run.ini");
  auto law = cfg.material.law();
  EXPECT_DOUBLE_EQ(law.gamma(2.0), 10.0);
  EXPECT_DOUBLE_EQ(law.f(0.5), 0.25);
  auto s = cfg.initial_state();
  EXPECT_DOUBLE_EQ(s.theta[4], 2.0);
  {
    std::ofstream t(dir / "law.csv");
    t << "xi,g,f\n0,1,0\n";
  }
  EXPECT_THROW(parse_config(dir / "run.ini").material.law(), ValidationError);
  std::filesystem::remove_all(dir);
}
