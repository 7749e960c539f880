// Command-line front end: simulate, certify, verify, ode, sweep.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hotspot/hotspot.hpp"

namespace {

const char* kConfigHelp = R"(Config file grammar: [section] headers, key = value lines, # comments.
Keys and defaults:
  seed = 0
  [material]  kind = power_law | custom, gamma_star = 1, mu = 2, f_star = 0,
              table = <csv with header xi,gamma,f> (custom only)
  [domain]    x_left = 0, x_right = 1, n_cells = 256
  [physics]   a = 1, D = 1, T = 1
  [initial]   u0 = zero, u0t = zero, theta0 = const{0}
              profiles: zero | const{value} | sine{amplitude, mode}
                        | cosine{offset, amplitude, mode} | hat{center, width, height}
                        | csv{path}   (hat width is the half-width)
  [solver]    dt_init = 1e-4, dt_min = 1e-14, dt_max = 1e-2, step_rel_tol = 1e-5,
              theta_blowup_threshold = 1e8, checkpoint_every = 0 (T/20)
  [ode]       c = 1, theta0 = theta0 at x_left
  [certify]   eta, M (default: the values of the initial data)
  [verify]    audit_tol = 0.02
Exit codes: 0 completed, 2 blow-up detected, 1 error.
HOTSPOT_THREADS caps the number of sweep workers.)";

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    item = hotspot::detail::trim(item);
    if (item.empty()) continue;
    out.push_back(hotspot::detail::to_number(item, "sweep.values"));
  }
  return out;
}

int simulate(const std::string& config_path, std::string out_dir) {
  const auto cfg = hotspot::parse_config(config_path);
  if (out_dir.empty()) out_dir = "runs/" + std::filesystem::path(config_path).stem().string();
  const auto rep = hotspot::run_scenario(cfg, std::filesystem::path(out_dir));
  hotspot::json summary = {{"run_dir", out_dir},
                           {"outcome", hotspot::outcome_json(rep.outcome)},
                           {"audits_pass", hotspot::all_pass(rep.audits)},
                           {"wall_time_s", rep.wall_seconds}};
  std::cout << summary.dump(2) << '\n';
  return hotspot::exit_code(rep.outcome.kind);
}

int certify(const std::string& config_path) {
  const auto cfg = hotspot::parse_config(config_path);
  hotspot::json out = hotspot::json::array();
  for (const auto& r : hotspot::certify(cfg)) out.push_back(hotspot::to_json(r));
  std::cout << out.dump(2) << '\n';
  return 0;
}

int verify(const std::string& dir) {
  const auto audits = hotspot::verify_run_dir(dir);
  std::cout << hotspot::audits_json(audits).dump(2) << '\n';
  return hotspot::all_pass(audits) ? 0 : 1;
}

int ode(const std::string& config_path) {
  const auto cfg = hotspot::parse_config(config_path);
  std::cout << hotspot::to_json(hotspot::ode_report(cfg)).dump(2) << '\n';
  return 0;
}

int sweep(const std::string& config_path, const std::string& param, const std::string& values,
          const std::vector<double>& bracket, double tol, const std::string& out_dir) {
  std::ifstream in(config_path);
  if (!in) throw hotspot::ValidationError("config", "cannot open '" + config_path + "'");
  const auto raw = hotspot::RawConfig::parse(in);
  const auto base = std::filesystem::path(config_path).parent_path();
  if (!bracket.empty()) {
    const auto b = hotspot::bisect(raw, base, param, bracket[0], bracket[1], tol);
    hotspot::write_sweep_csv(std::cout, b.evaluations);
    std::cerr << "bracket: [" << hotspot::format_double(b.lo) << ", "
              << hotspot::format_double(b.hi) << "]\n";
    return 0;
  }
  std::optional<std::filesystem::path> dir;
  if (!out_dir.empty()) dir = out_dir;
  const auto rows = hotspot::sweep(raw, base, param, parse_list(values), dir);
  hotspot::write_sweep_csv(std::cout, rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hotspot blow-up lab for 1D thermoviscoelasticity"};
  app.footer(kConfigHelp);
  app.require_subcommand(1);

  std::string config, out_dir, run_dir, param, values;
  std::vector<double> bracket;
  double tol = 1e-2;

  auto* sim = app.add_subcommand("simulate", "Certify, integrate and audit one configuration");
  sim->add_option("config", config, "Run configuration")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", out_dir, "Run directory (default runs/<config name>)");

  auto* cert = app.add_subcommand("certify", "Evaluate the blow-up certificates as JSON");
  cert->add_option("config", config)->required()->check(CLI::ExistingFile);

  auto* ver = app.add_subcommand("verify", "Re-audit a run directory and write audit.json");
  ver->add_option("run_dir", run_dir)->required()->check(CLI::ExistingDirectory);

  auto* od = app.add_subcommand("ode", "Blow-up time of theta' = c gamma(theta)");
  od->add_option("config", config)->required()->check(CLI::ExistingFile);

  auto* sw = app.add_subcommand("sweep", "Run one parameter over a list of values or bisect it");
  sw->add_option("config", config)->required()->check(CLI::ExistingFile);
  sw->add_option("--param", param, "Parameter path, e.g. initial.u0.height or physics.a")
      ->required();
  auto* vals = sw->add_option("--values", values, "Comma-separated values");
  auto* bis = sw->add_option("--bisect", bracket, "Bracket lo hi for the blow-up onset")
                  ->expected(2);
  vals->excludes(bis);
  sw->add_option("--tol", tol, "Bisection width relative to the starting bracket")
      ->capture_default_str();
  sw->add_option("--out", out_dir, "Directory for per-value runs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return simulate(config, out_dir);
    if (*cert) return certify(config);
    if (*ver) return verify(run_dir);
    if (*od) return ode(config);
    if (*sw) {
      if (values.empty() && bracket.empty())
        throw hotspot::ValidationError("sweep", "give --values or --bisect");
      return sweep(config, param, values, bracket, tol, out_dir);
    }
  } catch (const hotspot::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
