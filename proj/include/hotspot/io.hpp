#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "hotspot/config.hpp"
#include "hotspot/dynamics.hpp"
#include "hotspot/error.hpp"

namespace hotspot {

inline constexpr const char* kTraceHeader =
    "t,dt,theta_max,theta_min,int_grad_ut_sq,int_grad_v_gamma,int_grad_u_sq,int_grad_uav_sq,"
    "psi_integral,y_energy";
inline constexpr const char* kSnapshotHeader = "x,u,v,theta";

namespace detail {

inline std::vector<double> split_numbers(const std::string& line, std::size_t expected,
                                         const std::string& file, int line_no) {
  std::vector<double> out;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) {
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw ParseError(file + ": bad number '" + cell + "'", line_no);
    }
  }
  if (out.size() != expected)
    throw ParseError(file + ": expected " + std::to_string(expected) + " columns", line_no);
  return out;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  return f;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read '" + path.string() + "'");
  return f;
}

inline void put(std::ostream& o, double x, char sep) { o << format_double(x) << sep; }

}  // namespace detail

inline void write_trace(const std::filesystem::path& path, const std::vector<TraceRow>& rows) {
  auto f = detail::open_out(path);
  f << kTraceHeader << '\n';
  for (const auto& r : rows) {
    detail::put(f, r.t, ',');
    detail::put(f, r.dt, ',');
    detail::put(f, r.theta_max, ',');
    detail::put(f, r.theta_min, ',');
    detail::put(f, r.accum.int_grad_ut_sq, ',');
    detail::put(f, r.accum.int_grad_v_gamma, ',');
    detail::put(f, r.accum.int_grad_u_sq, ',');
    detail::put(f, r.accum.int_grad_uav_sq, ',');
    detail::put(f, r.psi_integral, ',');
    detail::put(f, r.y_energy, '\n');
  }
}

/// The running minimum is rebuilt from theta_min; rows are written for
/// every accepted step, so it is exact.
inline std::vector<TraceRow> read_trace(const std::filesystem::path& path) {
  auto f = detail::open_in(path);
  std::string line;
  std::getline(f, line);
  if (detail::trim(line) != kTraceHeader) throw ParseError("trace.csv: unexpected header", 1);
  std::vector<TraceRow> rows;
  double running = std::numeric_limits<double>::infinity();
  for (int no = 2; std::getline(f, line); ++no) {
    if (detail::trim(line).empty()) continue;
    const auto c = detail::split_numbers(line, 10, "trace.csv", no);
    TraceRow r;
    r.t = c[0];
    r.dt = c[1];
    r.theta_max = c[2];
    r.theta_min = c[3];
    r.accum = {c[4], c[5], c[6], c[7]};
    r.psi_integral = c[8];
    r.y_energy = c[9];
    running = std::min(running, r.theta_min);
    r.theta_running_min = running;
    rows.push_back(r);
  }
  if (rows.empty()) throw ParseError("trace.csv: no rows", 2);
  return rows;
}

inline void write_snapshot(const std::filesystem::path& path, const State& s) {
  auto f = detail::open_out(path);
  f << kSnapshotHeader << '\n';
  for (std::size_t i = 0; i < s.u.size(); ++i) {
    detail::put(f, s.grid.node(i), ',');
    detail::put(f, s.u[i], ',');
    detail::put(f, s.v[i], ',');
    detail::put(f, s.theta[i], '\n');
  }
}

/// Loads u, v, theta onto `grid`; time and accumulators are left for the caller.
inline State read_snapshot(const std::filesystem::path& path, const Grid1D& grid) {
  auto f = detail::open_in(path);
  const auto name = path.filename().string();
  std::string line;
  std::getline(f, line);
  if (detail::trim(line) != kSnapshotHeader) throw ParseError(name + ": unexpected header", 1);
  State s{grid};
  std::vector<double> u, v, th;
  for (int no = 2; std::getline(f, line); ++no) {
    if (detail::trim(line).empty()) continue;
    const auto c = detail::split_numbers(line, 4, name, no);
    u.push_back(c[1]);
    v.push_back(c[2]);
    th.push_back(c[3]);
  }
  if (u.size() != grid.n_nodes())
    throw ParseError(name + ": node count does not match the grid", static_cast<int>(u.size()) + 1);
  s.u = Field{std::move(u), BoundaryCondition::DirichletZero};
  s.v = Field{std::move(v), BoundaryCondition::DirichletZero};
  s.theta = Field{std::move(th), BoundaryCondition::NeumannZero};
  return s;
}

inline std::string snapshot_name(std::size_t k) { return "snapshot_" + std::to_string(k) + ".csv"; }

/// Writes trace.csv and one snapshot per checkpoint.
inline void write_trajectory(const std::filesystem::path& dir, const Trajectory& traj) {
  std::filesystem::create_directories(dir);
  write_trace(dir / "trace.csv", traj.rows);
  for (std::size_t k = 0; k < traj.checkpoints.size(); ++k)
    write_snapshot(dir / snapshot_name(k), traj.checkpoints[k].state);
}

/// Inverse of write_trajectory. `checkpoint_rows[k]` is the trace row of snapshot k.
inline Trajectory read_trajectory(const std::filesystem::path& dir, const Grid1D& grid,
                                  const std::vector<std::size_t>& checkpoint_rows) {
  Trajectory traj;
  traj.rows = read_trace(dir / "trace.csv");
  for (std::size_t k = 0; k < checkpoint_rows.size(); ++k) {
    const auto row = checkpoint_rows[k];
    if (row >= traj.rows.size())
      throw ParseError("checkpoint row beyond the end of trace.csv", static_cast<int>(row));
    State s = read_snapshot(dir / snapshot_name(k), grid);
    s.t = traj.rows[row].t;
    s.theta_running_min = traj.rows[row].theta_running_min;
    s.accum = traj.rows[row].accum;
    traj.checkpoints.push_back({row, std::move(s)});
  }
  return traj;
}

}  // namespace hotspot
