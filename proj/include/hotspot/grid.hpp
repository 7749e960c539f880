#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "hotspot/error.hpp"

namespace hotspot {

enum class BoundaryCondition { DirichletZero, NeumannZero };

/// Uniform node-centred mesh on (x_left, x_right) with n_cells + 1 nodes.
class Grid1D {
 public:
  Grid1D(double x_left = 0.0, double x_right = 1.0, int n_cells = 128)
      : x_left_(x_left), x_right_(x_right), n_cells_(n_cells) {
    if (!(x_right > x_left))
      throw ValidationError("domain", "x_left must be smaller than x_right");
    if (n_cells < 4) throw ValidationError("domain.n_cells", "must be at least 4");
    h_ = (x_right_ - x_left_) / n_cells_;
  }

  double x_left() const noexcept { return x_left_; }
  double x_right() const noexcept { return x_right_; }
  int n_cells() const noexcept { return n_cells_; }
  std::size_t n_nodes() const noexcept { return static_cast<std::size_t>(n_cells_) + 1; }
  double h() const noexcept { return h_; }
  double measure() const noexcept { return x_right_ - x_left_; }

  double node(std::size_t i) const noexcept {
    return i == static_cast<std::size_t>(n_cells_) ? x_right_ : x_left_ + h_ * static_cast<double>(i);
  }

  std::vector<double> nodes() const {
    std::vector<double> x(n_nodes());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = node(i);
    return x;
  }

  bool operator==(const Grid1D&) const = default;

 private:
  double x_left_, x_right_;
  int n_cells_;
  double h_;
};

/// Nodal values tagged with the boundary condition they obey.
struct Field {
  std::vector<double> values;
  BoundaryCondition bc = BoundaryCondition::NeumannZero;

  static Field zeros(const Grid1D& grid, BoundaryCondition bc) {
    return Field{std::vector<double>(grid.n_nodes(), 0.0), bc};
  }

  template <class F>
  static Field sample(const Grid1D& grid, BoundaryCondition bc, F&& fn) {
    Field out{std::vector<double>(grid.n_nodes()), bc};
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = fn(grid.node(i));
    if (bc == BoundaryCondition::DirichletZero) {
      out.values.front() = 0.0;
      out.values.back() = 0.0;
    }
    return out;
  }

  std::size_t size() const noexcept { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  bool all_finite() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
  }
  double max() const { return *std::max_element(values.begin(), values.end()); }
  double min() const { return *std::min_element(values.begin(), values.end()); }
  double max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
};

/// Nodal derivative: centred in the interior. At the endpoints a one-sided
/// second-order stencil for Dirichlet fields, zero for Neumann fields.
inline Field gradient(const Field& field, const Grid1D& grid) {
  const auto n = field.size();
  const double h = grid.h();
  Field out{std::vector<double>(n, 0.0), field.bc};
  for (std::size_t i = 1; i + 1 < n; ++i)
    out[i] = (field[i + 1] - field[i - 1]) / (2.0 * h);
  if (field.bc == BoundaryCondition::DirichletZero) {
    out[0] = (-3.0 * field[0] + 4.0 * field[1] - field[2]) / (2.0 * h);
    out[n - 1] = (3.0 * field[n - 1] - 4.0 * field[n - 2] + field[n - 3]) / (2.0 * h);
  }
  return out;
}

/// Cell-face differences (w_{i+1} - w_i)/h, n_cells entries.
inline std::vector<double> face_gradient(std::span<const double> values, const Grid1D& grid) {
  std::vector<double> out(values.size() - 1);
  const double inv_h = 1.0 / grid.h();
  for (std::size_t i = 0; i + 1 < values.size(); ++i)
    out[i] = (values[i + 1] - values[i]) * inv_h;
  return out;
}

/// Arithmetic face average of positive nodal coefficients.
inline std::vector<double> face_average(std::span<const double> nodal) {
  std::vector<double> out(nodal.size() - 1);
  for (std::size_t i = 0; i + 1 < nodal.size(); ++i)
    out[i] = 0.5 * (nodal[i] + nodal[i + 1]);
  return out;
}

/// Conservative (gamma w_x)_x at interior nodes; endpoint rows are zero
/// (the Dirichlet identity rows carry no flux balance).
inline Field div_gamma_grad(const Field& field, const Field& gamma_nodal, const Grid1D& grid) {
  const auto n = field.size();
  for (double g : gamma_nodal.values)
    if (!(g > 0.0)) throw NonpositiveCoefficient("div_gamma_grad: gamma must be positive");
  const double inv_h2 = 1.0 / (grid.h() * grid.h());
  Field out{std::vector<double>(n, 0.0), BoundaryCondition::DirichletZero};
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double g_right = 0.5 * (gamma_nodal[i] + gamma_nodal[i + 1]);
    const double g_left = 0.5 * (gamma_nodal[i - 1] + gamma_nodal[i]);
    out[i] = (g_right * (field[i + 1] - field[i]) - g_left * (field[i] - field[i - 1])) * inv_h2;
  }
  return out;
}

/// Three-point Laplacian with reflected ghosts (w_{-1} = w_1, w_{N+1} = w_{N-1}).
inline Field laplacian_neumann(const Field& field, const Grid1D& grid) {
  const auto n = field.size();
  const double inv_h2 = 1.0 / (grid.h() * grid.h());
  Field out{std::vector<double>(n, 0.0), BoundaryCondition::NeumannZero};
  out[0] = 2.0 * (field[1] - field[0]) * inv_h2;
  for (std::size_t i = 1; i + 1 < n; ++i)
    out[i] = (field[i + 1] - 2.0 * field[i] + field[i - 1]) * inv_h2;
  out[n - 1] = 2.0 * (field[n - 2] - field[n - 1]) * inv_h2;
  return out;
}

/// Composite trapezoid rule over the nodes.
inline double integrate(std::span<const double> values, const Grid1D& grid) {
  if (values.size() < 2) return 0.0;
  double sum = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) sum += values[i];
  return sum * grid.h();
}

/// Discrete Dirichlet energy sum_faces h * ((w_{i+1}-w_i)/h)^2, the quadrature
/// of |w_x|^2 that pairs with the flux-form operators.
inline double grad_sq_integral(std::span<const double> values, const Grid1D& grid) {
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const double d = values[i + 1] - values[i];
    sum += d * d;
  }
  return sum / grid.h();
}

/// Same with face weights gamma_{i+1/2} (arithmetic means of nodal values).
inline double weighted_grad_sq_integral(std::span<const double> values,
                                        std::span<const double> gamma_nodal,
                                        const Grid1D& grid) {
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const double d = values[i + 1] - values[i];
    sum += 0.5 * (gamma_nodal[i] + gamma_nodal[i + 1]) * d * d;
  }
  return sum / grid.h();
}

/// Thomas algorithm for a tridiagonal system; lower[0] and upper[n-1] unused.
inline std::vector<double> solve_tridiagonal(std::span<const double> lower,
                                             std::span<const double> diag,
                                             std::span<const double> upper,
                                             std::span<const double> rhs) {
  const auto n = diag.size();
  std::vector<double> c(n), d(n), x(n);
  double pivot = diag[0];
  if (pivot == 0.0 || !std::isfinite(pivot)) throw LinearSolveFailure("zero pivot in row 0");
  c[0] = upper[0] / pivot;
  d[0] = rhs[0] / pivot;
  for (std::size_t i = 1; i < n; ++i) {
    pivot = diag[i] - lower[i] * c[i - 1];
    if (pivot == 0.0 || !std::isfinite(pivot))
      throw LinearSolveFailure("zero pivot in row " + std::to_string(i));
    c[i] = i + 1 < n ? upper[i] / pivot : 0.0;
    d[i] = (rhs[i] - lower[i] * d[i - 1]) / pivot;
  }
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

/// Solves (I - dt * (gamma w_x)_x) w = rhs with w = 0 at both ends.
inline Field solve_implicit_diffusion_dirichlet(const Field& rhs, const Field& gamma_nodal,
                                                double dt, const Grid1D& grid) {
  const auto n = rhs.size();
  const double r = dt / (grid.h() * grid.h());
  std::vector<double> lo(n, 0.0), di(n, 1.0), up(n, 0.0), b(rhs.values);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double g_left = 0.5 * (gamma_nodal[i - 1] + gamma_nodal[i]);
    const double g_right = 0.5 * (gamma_nodal[i] + gamma_nodal[i + 1]);
    lo[i] = -r * g_left;
    up[i] = -r * g_right;
    di[i] = 1.0 + r * (g_left + g_right);
  }
  b.front() = 0.0;
  b.back() = 0.0;
  Field out{solve_tridiagonal(lo, di, up, b), BoundaryCondition::DirichletZero};
  out.values.front() = 0.0;
  out.values.back() = 0.0;
  return out;
}

/// Solves (I - dt * D * Laplacian_neumann) w = rhs.
inline Field solve_implicit_heat_neumann(const Field& rhs, double diffusivity, double dt,
                                         const Grid1D& grid) {
  const auto n = rhs.size();
  const double r = diffusivity * dt / (grid.h() * grid.h());
  std::vector<double> lo(n, -r), di(n, 1.0 + 2.0 * r), up(n, -r);
  up[0] = -2.0 * r;
  lo[n - 1] = -2.0 * r;
  return Field{solve_tridiagonal(lo, di, up, rhs.values), BoundaryCondition::NeumannZero};
}

}  // namespace hotspot
