#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "hotspot/certificates.hpp"
#include "hotspot/config.hpp"
#include "hotspot/dynamics.hpp"
#include "hotspot/functionals.hpp"
#include "hotspot/io.hpp"
#include "hotspot/verify.hpp"

namespace hotspot {

inline constexpr const char* kVersion = "0.1.0";

using json = nlohmann::json;

/// JSON has no inf/nan; those become strings.
inline json number_json(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

inline json to_json(const CertificateReport& r) {
  json constants = json::object();
  for (const auto& [k, v] : r.constants) constants[k] = number_json(v);
  return {{"certificate", to_string(r.certificate)},
          {"constants", constants},
          {"verdict", to_string(r.verdict)},
          {"margin", number_json(r.margin)},
          {"reason", r.reason}};
}

inline json to_json(const AuditResult& r) {
  return {{"inequality_id", to_string(r.inequality_id)},
          {"times_checked", r.times_checked.size()},
          {"worst_margin", number_json(r.worst_margin)},
          {"worst_time", number_json(r.worst_time)},
          {"pass", r.pass},
          {"available", r.available},
          {"note", r.note}};
}

/// Pre-run certificates evaluated on the initial data of a config.
inline std::vector<CertificateReport> certify(const RunConfig& cfg) {
  const auto p = cfg.params();
  const auto s0 = cfg.initial_state();
  const auto m = derive_scalars(p.law);
  const auto d = summarize_initial(s0, p.law, p.a);
  const double T = cfg.T;
  std::vector<CertificateReport> out;
  out.push_back(check_theorem65(d, m, p.a, T, Theorem65Mode::Uniform));
  out.push_back(check_theorem65(d, m, p.a, T, Theorem65Mode::ThreeCoefficient));
  if (cfg.certify_eta || cfg.certify_M)
    out.push_back(check_theorem66(d, p.law, m, p.a, T, cfg.certify_eta.value_or(d.grad_u0_sq),
                                  cfg.certify_M.value_or(d.l2_u0 + d.l2_u0t)));
  else
    out.push_back(check_theorem66(d, p.law, m, p.a, T));
  out.push_back(check_lemma64(d, m, p.law, p.a, T));
  out.push_back(check_remark_i(d, m, p, T));
  return out;
}

inline CertificateReport ode_report(const RunConfig& cfg) {
  const double theta0 = cfg.ode_theta0.value_or(cfg.theta0.evaluate(cfg.grid()).front());
  return check_ode(cfg.material.law(), cfg.ode_c, theta0);
}

inline int exit_code(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::Completed: return 0;
    case OutcomeKind::BlowUpDetected: return 2;
    case OutcomeKind::Aborted: return 1;
  }
  return 1;
}

struct ScenarioReport {
  std::vector<CertificateReport> certificates;
  RunOutcome outcome;
  std::vector<AuditResult> audits;
  double wall_seconds = 0.0;
};

inline json outcome_json(const RunOutcome& o) {
  return {{"kind", to_string(o.kind)},
          {"t_detect", number_json(o.t_detect)},
          {"extrapolated_blowup_time", number_json(o.extrapolated_blowup_time)},
          {"reason", o.reason},
          {"accepted_steps", o.accepted_steps},
          {"rejected_steps", o.rejected_steps}};
}

inline json audits_json(const std::vector<AuditResult>& audits) {
  json a = json::array();
  for (const auto& r : audits) a.push_back(to_json(r));
  return a;
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  f << j.dump(2) << '\n';
}

inline json read_json(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read '" + path.string() + "'");
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw Error(path.filename().string() + ": " + e.what());
  }
}

/// Certify, advance, audit. With a run directory, also writes trace.csv,
/// snapshots, manifest.json and audit.json there.
inline ScenarioReport run_scenario(const RunConfig& cfg,
                                   const std::optional<std::filesystem::path>& run_dir = {}) {
  const auto start = std::chrono::steady_clock::now();
  ScenarioReport rep;
  const auto p = cfg.params();
  const auto s0 = cfg.initial_state();
  rep.certificates = certify(cfg);
  rep.outcome = advance(s0, p);
  rep.audits = audit_all(rep.outcome.trajectory, make_audit_context(s0, p, cfg.audit_tol),
                         rep.outcome.kind == OutcomeKind::Completed);
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (run_dir) {
    write_trajectory(*run_dir, rep.outcome.trajectory);
    json certs = json::array();
    for (const auto& c : rep.certificates) certs.push_back(to_json(c));
    json cps = json::array();
    const auto& traj = rep.outcome.trajectory;
    for (std::size_t k = 0; k < traj.checkpoints.size(); ++k)
      cps.push_back({{"k", k},
                     {"t", traj.checkpoints[k].state.t},
                     {"row", traj.checkpoints[k].row},
                     {"file", snapshot_name(k)}});
    json manifest = {{"version", kVersion},
                     {"config", cfg.to_text()},
                     {"certificates", certs},
                     {"outcome", outcome_json(rep.outcome)},
                     {"wall_time_s", rep.wall_seconds},
                     {"checkpoints", cps}};
    write_json(*run_dir / "manifest.json", manifest);
    write_json(*run_dir / "audit.json", audits_json(rep.audits));
  }
  return rep;
}

/// Re-audits a run directory from its files alone and writes audit.json.
inline std::vector<AuditResult> verify_run_dir(const std::filesystem::path& dir) {
  const auto manifest = read_json(dir / "manifest.json");
  if (!manifest.contains("config") || !manifest.contains("checkpoints") ||
      !manifest.contains("outcome"))
    throw Error("manifest.json lacks config, checkpoints or outcome");
  const auto cfg = parse_config_text(manifest["config"].get<std::string>());
  std::vector<std::size_t> rows;
  for (const auto& cp : manifest["checkpoints"]) rows.push_back(cp["row"].get<std::size_t>());
  if (rows.empty()) throw Error("manifest.json lists no checkpoints");
  const auto traj = read_trajectory(dir, cfg.grid(), rows);
  const auto p = cfg.params();
  // Snapshot 0 is the initial state as it was actually integrated.
  const auto& s0 = traj.checkpoints.front().state;
  const bool completed = manifest["outcome"]["kind"] == "Completed";
  auto audits = audit_all(traj, make_audit_context(s0, p, cfg.audit_tol), completed);
  write_json(dir / "audit.json", audits_json(audits));
  return audits;
}

// ---------------------------------------------------------------- sweeps

inline unsigned worker_count(std::size_t jobs) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HOTSPOT_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, static_cast<unsigned>(cap));
  }
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(n, jobs)));
}

/// Runs job(i) for i in [0, n) on a small pool; results are indexed by i,
/// so the output does not depend on scheduling.
template <class F>
void parallel_for(std::size_t n, F&& job) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) job(i);
  };
  const unsigned k = worker_count(n);
  std::vector<std::jthread> pool;
  for (unsigned w = 1; w < k; ++w) pool.emplace_back(worker);
  worker();
}

struct SweepRow {
  double value = 0.0;
  std::string verdict;  // outcome kind, or "Error"
  double t_detect = std::numeric_limits<double>::quiet_NaN();
  std::map<std::string, double> margins;  // certificate name -> margin
  bool audits_pass = false;
  std::string error;
};

inline SweepRow sweep_point(RawConfig raw, const std::filesystem::path& base_dir,
                            const std::string& param, double value,
                            const std::optional<std::filesystem::path>& run_dir) {
  SweepRow row;
  row.value = value;
  try {
    override_value(raw, param, value);
    const auto cfg = build_config(raw, base_dir);
    const auto rep = run_scenario(cfg, run_dir);
    row.verdict = to_string(rep.outcome.kind);
    row.t_detect = rep.outcome.t_detect;
    for (std::size_t k = 0; k < rep.certificates.size(); ++k) {
      // certify() lists the sharper Thm65 variant second.
      std::string name = to_string(rep.certificates[k].certificate);
      if (k == 1) name += "_sharp";
      row.margins[name] = rep.certificates[k].margin;
    }
    row.audits_pass = all_pass(rep.audits);
  } catch (const std::exception& e) {
    row.verdict = "Error";
    row.error = e.what();
  }
  return row;
}

inline std::vector<SweepRow> sweep(const RawConfig& raw, const std::filesystem::path& base_dir,
                                   const std::string& param, const std::vector<double>& values,
                                   const std::optional<std::filesystem::path>& out_dir = {}) {
  if (values.empty()) throw ValidationError("sweep.values", "list is empty");
  std::vector<SweepRow> rows(values.size());
  parallel_for(values.size(), [&](std::size_t i) {
    std::optional<std::filesystem::path> dir;
    if (out_dir) dir = *out_dir / ("run_" + std::to_string(i));
    rows[i] = sweep_point(raw, base_dir, param, values[i], dir);
  });
  return rows;
}

inline void write_sweep_csv(std::ostream& o, const std::vector<SweepRow>& rows) {
  std::vector<std::string> names;
  for (const auto& r : rows)
    for (const auto& [k, v] : r.margins)
      if (std::find(names.begin(), names.end(), k) == names.end()) names.push_back(k);
  o << "value,verdict,t_detect";
  for (const auto& n : names) o << ",margin_" << n;
  o << ",audits_pass\n";
  for (const auto& r : rows) {
    o << format_double(r.value) << ',' << r.verdict << ',' << format_double(r.t_detect);
    for (const auto& n : names) {
      auto it = r.margins.find(n);
      o << ',' << (it == r.margins.end() ? "" : format_double(it->second));
    }
    o << ',' << (r.audits_pass ? "true" : "false") << '\n';
  }
}

struct BisectionResult {
  double lo = 0.0, hi = 0.0;  // lo runs without blow-up, hi blows up
  std::vector<SweepRow> evaluations;
};

/// Brackets the smallest parameter value producing BlowUpDetected, to a
/// width of rel_tol * (hi - lo) of the starting bracket.
inline BisectionResult bisect(const RawConfig& raw, const std::filesystem::path& base_dir,
                              const std::string& param, double lo, double hi,
                              double rel_tol = 1e-2) {
  if (!(hi > lo)) throw ValidationError("sweep.bisect", "need lo < hi");
  if (!(rel_tol > 0.0)) throw ValidationError("sweep.bisect", "tolerance must be positive");
  BisectionResult out;
  auto blows_up = [&](double x) {
    out.evaluations.push_back(sweep_point(raw, base_dir, param, x, std::nullopt));
    const auto& r = out.evaluations.back();
    if (r.verdict == "Error") throw Error("sweep point " + format_double(x) + ": " + r.error);
    return r.verdict == "BlowUpDetected";
  };
  // Both end points are independent runs.
  std::vector<SweepRow> ends(2);
  parallel_for(2, [&](std::size_t i) {
    ends[i] = sweep_point(raw, base_dir, param, i == 0 ? lo : hi, std::nullopt);
  });
  for (const auto& e : ends) {
    out.evaluations.push_back(e);
    if (e.verdict == "Error") throw Error("sweep point " + format_double(e.value) + ": " + e.error);
  }
  if (ends[0].verdict == "BlowUpDetected")
    throw ValidationError("sweep.bisect", "lower end already blows up");
  if (ends[1].verdict != "BlowUpDetected")
    throw ValidationError("sweep.bisect", "upper end does not blow up");
  const double width = rel_tol * (hi - lo);
  while (hi - lo > width) {
    const double mid = 0.5 * (lo + hi);
    (blows_up(mid) ? hi : lo) = mid;
  }
  out.lo = lo;
  out.hi = hi;
  return out;
}

}  // namespace hotspot
