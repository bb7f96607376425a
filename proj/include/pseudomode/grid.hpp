#pragma once

// Finite-difference discretization of L_h, residual measurements, order
// fits, smallest singular values of A - z and reference propagators.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "pseudomode/coefficients.hpp"
#include "pseudomode/errors.hpp"
#include "pseudomode/linalg.hpp"
#include "pseudomode/quadrature.hpp"
#include "pseudomode/symbol.hpp"
#include "pseudomode/wkb.hpp"

namespace pseudomode {

struct Grid1D {
  double x_lo = 0.0, x_hi = 1.0;
  int m = 0;
  double spacing = 0.0;
  std::vector<double> x, weights;

  static Grid1D uniform(double lo, double hi, int points) {
    if (points < 8) throw PreconditionError("grid needs at least 8 points");
    if (!(lo < hi)) throw PreconditionError("grid needs x_lo < x_hi");
    Grid1D g;
    g.x_lo = lo;
    g.x_hi = hi;
    g.m = points;
    g.spacing = (hi - lo) / (points - 1);
    g.x = linspace(lo, hi, static_cast<std::size_t>(points));
    g.weights = trapezoid_weights(g.x);
    return g;
  }
};

struct BoundaryCondition {
  enum class Kind { dirichlet, robin };
  Kind kind = Kind::dirichlet;
  cplx coef_deriv, coef_value{1.0, 0.0};

  static BoundaryCondition dirichlet() { return {}; }
  static BoundaryCondition robin(cplx cd, cplx cv) {
    if (cd == cplx{} && cv == cplx{}) throw PreconditionError("Robin coefficients must not both vanish");
    return {Kind::robin, cd, cv};
  }
};

/// Matrix of L_h on the interior nodes 1..m-2; boundary values are eliminated
/// through the boundary conditions.
struct DenseOperator {
  Matrix matrix;
  Grid1D grid;
  BoundaryCondition left, right;
  double h = 0.0;
  std::string provenance;

  int size() const { return static_cast<int>(matrix.rows()); }
  std::vector<double> nodes() const { return {grid.x.begin() + 1, grid.x.end() - 1}; }
  RealVector weights() const { return RealVector::Constant(size(), grid.spacing); }

  Vector sample(const std::function<cplx(double)>& fn) const {
    Vector v(size());
    for (int i = 0; i < size(); ++i) v(i) = fn(grid.x[static_cast<std::size_t>(i + 1)]);
    return v;
  }
};

namespace detail {

// Row of the finite-difference L_h at an interior node, including c on the diagonal.
struct StencilRow {
  int first = 0, count = 0;
  cplx w[5];
};

inline StencilRow stencil_row(const CoefficientField& cf, double h, const Grid1D& grid, int node) {
  const int m = grid.m;
  const double dx = grid.spacing;
  const auto c = cf.values(grid.x[static_cast<std::size_t>(node)]);
  const cplx k2 = -h * h * c.a, k1 = -I * h * c.b;
  StencilRow r;
  if (node == 1 || node == m - 2) {
    const double d2[3] = {1.0, -2.0, 1.0};
    const double d1[3] = {-0.5, 0.0, 0.5};
    r.first = node - 1;
    r.count = 3;
    for (int q = 0; q < 3; ++q) r.w[q] = k2 * d2[q] / (dx * dx) + k1 * d1[q] / dx;
    r.w[1] += c.c;
  } else {
    const double d2[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
    const double d1[5] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
    r.first = node - 2;
    r.count = 5;
    for (int q = 0; q < 5; ++q) r.w[q] = k2 * d2[q] / (dx * dx) + k1 * d1[q] / dx;
    r.w[2] += c.c;
  }
  return r;
}

}  // namespace detail

inline DenseOperator discretize(const CoefficientField& cf, double h, const Grid1D& grid,
                                const BoundaryCondition& left = BoundaryCondition::dirichlet(),
                                const BoundaryCondition& right = BoundaryCondition::dirichlet()) {
  if (grid.m < 8) throw PreconditionError("grid needs at least 8 points");
  if (!(h > 0.0)) throw PreconditionError("h must be positive");
  if (grid.x_lo < cf.x_lo() - 1e-12 || grid.x_hi > cf.x_hi() + 1e-12)
    throw DomainError("grid leaves the coefficient domain");
  const int m = grid.m, n = m - 2;
  const double dx = grid.spacing;

  // Boundary value as a combination of the two nearest interior values.
  auto elimination = [&](const BoundaryCondition& bc, bool at_left) -> std::pair<cplx, cplx> {
    if (bc.kind == BoundaryCondition::Kind::dirichlet) return {0.0, 0.0};
    const cplx k = bc.coef_deriv * h / (2.0 * dx);
    const cplx den = at_left ? (bc.coef_value - 3.0 * k) : (bc.coef_value + 3.0 * k);
    if (std::abs(den) == 0.0) throw DegenerateError("Robin row cannot be solved for the boundary value");
    const cplx s = at_left ? -k / den : k / den;
    return {4.0 * s, -s};
  };
  const auto [l1, l2] = elimination(left, true);
  const auto [r1, r2] = elimination(right, false);

  DenseOperator op;
  op.grid = grid;
  op.left = left;
  op.right = right;
  op.h = h;
  op.provenance = cf.name();
  op.matrix = Matrix::Zero(n, n);

  auto put = [&](int row, int node, cplx val) {
    if (node == 0) {
      op.matrix(row, 0) += l1 * val;
      op.matrix(row, 1) += l2 * val;
    } else if (node == m - 1) {
      op.matrix(row, n - 1) += r1 * val;
      op.matrix(row, n - 2) += r2 * val;
    } else {
      op.matrix(row, node - 1) += val;
    }
  };

  for (int node = 1; node <= m - 2; ++node) {
    const int row = node - 1;
    const auto st = detail::stencil_row(cf, h, grid, node);
    for (int q = 0; q < st.count; ++q) put(row, st.first + q, st.w[q]);
  }
  return op;
}

/// rQ = ||(x - u) f||/||f||, rP = ||(-i h d/dx - xi) f||/||f||, rL = ||(L_h - z) f||/||f||.
struct ResidualTriple {
  double rQ = 0.0, rP = 0.0, rL = 0.0, norm = 0.0;
};

inline ResidualTriple residual_triple(const Pseudomode& mode) {
  if (mode.x.empty() || mode.df.size() != mode.x.size() || mode.residual.size() != mode.x.size())
    throw PreconditionError("mode carries no derivative samples");
  const std::size_t m = mode.x.size();
  std::vector<cplx> q(m), p(m);
  for (std::size_t k = 0; k < m; ++k) {
    q[k] = (mode.x[k] - mode.u) * mode.f[k];
    p[k] = -I * mode.h * mode.df[k] - mode.xi * mode.f[k];
  }
  ResidualTriple r;
  r.norm = mode.norm();
  if (!(r.norm > 0.0)) throw NumericError("mode has zero norm");
  r.rQ = weighted_norm(mode.weights, q) / r.norm;
  r.rP = weighted_norm(mode.weights, p) / r.norm;
  r.rL = weighted_norm(mode.weights, mode.residual) / r.norm;
  return r;
}

/// ||-h^2 a f'' - i h b f' + (c - z) f|| / ||f|| straight from the f, f', f'' samples.
inline double direct_residual_norm(const Pseudomode& mode, const CoefficientField& cf) {
  std::vector<cplx> r(mode.x.size());
  for (std::size_t k = 0; k < r.size(); ++k)
    r[k] = detail::direct_residual(cf, mode.h, mode.z, mode.x[k], mode.f[k], mode.df[k], mode.ddf[k]);
  return weighted_norm(mode.weights, r) / mode.norm();
}

/// Same residual through the finite-difference stencil on m points over the mode support
/// (the mode vanishes at both ends, so this is the Dirichlet operator applied matrix-free).
inline double stencil_residual_norm(const Pseudomode& mode, const CoefficientField& cf, int m) {
  const Grid1D g = Grid1D::uniform(mode.x.front(), mode.x.back(), m);
  std::vector<cplx> f(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) f[static_cast<std::size_t>(k)] = mode.evaluate(g.x[static_cast<std::size_t>(k)]).f;
  double num = 0.0, den = 0.0;
  for (int node = 1; node <= m - 2; ++node) {
    const auto st = detail::stencil_row(cf, mode.h, g, node);
    cplx acc = -mode.z * f[static_cast<std::size_t>(node)];
    for (int q = 0; q < st.count; ++q) acc += st.w[q] * f[static_cast<std::size_t>(st.first + q)];
    num += std::norm(acc);
    den += std::norm(f[static_cast<std::size_t>(node)]);
  }
  return std::sqrt(num / den);
}

struct OrderFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
};

/// Least-squares line through (log h, log r).
inline OrderFit order_fit(const std::vector<double>& h, const std::vector<double>& r) {
  if (h.size() != r.size() || h.size() < 4) throw PreconditionError("order fit needs at least 4 (h, r) pairs");
  const std::size_t n = h.size();
  std::vector<double> x(n), y(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!(h[k] > 0.0) || !(r[k] > 0.0)) throw PreconditionError("order fit needs positive h and r");
    x[k] = std::log(h[k]);
    y[k] = std::log(r[k]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  OrderFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

inline std::vector<double> default_h_sweep() {
  std::vector<double> h;
  for (int e = 4; e <= 9; ++e) h.push_back(std::ldexp(1.0, -e));
  return h;
}

struct SingularValueEstimate {
  double s_min = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Smallest singular value of B by inverse iteration on B* B.
inline SingularValueEstimate smallest_singular_value(const Matrix& b, double tol = 1e-10, int max_iter = 500) {
  SingularValueEstimate r;
  const Eigen::Index n = b.cols();
  if (n == 0) return r;
  Eigen::PartialPivLU<Matrix> lu(b);
  Vector v(n);
  for (Eigen::Index k = 0; k < n; ++k) v(k) = cplx{1.0 + 0.37 * std::sin(1.3 * k), 0.21 * std::cos(0.7 * k)};
  v.normalize();
  double prev = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    const Vector y = lu.adjoint().solve(v);
    const Vector x = lu.solve(y);
    const double nx = x.norm();
    r.iterations = it;
    if (!std::isfinite(nx)) {
      r.s_min = 0.0;
      r.converged = true;
      return r;
    }
    if (!(nx > 0.0)) break;
    v = x / nx;
    const double est = 1.0 / std::sqrt(nx);
    if (it > 1 && std::abs(est - prev) <= tol * std::max(est, 1e-300)) {
      r.converged = true;
      break;
    }
    prev = est;
  }
  r.s_min = (b * v).norm();
  return r;
}

struct ResolventCell {
  cplx z;
  double s_min = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Weighted s_min(A - z) for each z.
inline std::vector<ResolventCell> resolvent_map(const Matrix& a, const RealVector& w, const std::vector<cplx>& zs) {
  std::vector<ResolventCell> out;
  out.reserve(zs.size());
  const Matrix b0 = to_euclidean(a, w, w);
  for (const cplx z : zs) {
    Matrix b = b0;
    b.diagonal().array() -= z;
    const auto e = smallest_singular_value(b);
    out.push_back({z, e.s_min, e.iterations, e.converged});
  }
  return out;
}

inline std::vector<ResolventCell> resolvent_map(const DenseOperator& op, const std::vector<cplx>& zs) {
  return resolvent_map(op.matrix, op.weights(), zs);
}

enum class PropagationMethod { automatic, expm, implicit };

namespace detail {

inline void require_finite(const Matrix& a, const char* what) {
  if (!a.allFinite()) throw NumericError(std::string(what) + " has non-finite entries");
}

// (2,2) Pade / two-stage Gauss-Legendre step, applied `steps` times.
inline Matrix pade_steps(const Matrix& a, const Matrix& f, double tau, long steps) {
  const cplx r1{3.0, std::sqrt(3.0)}, r2{3.0, -std::sqrt(3.0)};
  const Eigen::Index n = a.rows();
  const Matrix id = Matrix::Identity(n, n);
  Eigen::PartialPivLU<Matrix> lu1(id - (tau / r1) * a), lu2(id - (tau / r2) * a);
  Matrix y = f;
  for (long s = 0; s < steps; ++s) {
    const Matrix ay = a * y;
    const Matrix rhs = y + (0.5 * tau) * ay + (tau * tau / 12.0) * (a * ay);
    y = lu2.solve(lu1.solve(rhs));
  }
  return y;
}

}  // namespace detail

/// exp(tA) f by a step-doubled implicit (2,2) Pade integrator.
inline Matrix propagate_implicit(const Matrix& a, const Matrix& f, double t, double tol = 1e-11) {
  if (t == 0.0) return f;
  const double anorm = a.cwiseAbs().colwise().sum().maxCoeff();
  int k = std::max(0, static_cast<int>(std::ceil(std::log2(std::max(t * anorm, 1.0)))));
  Matrix coarse = detail::pade_steps(a, f, t / std::ldexp(1.0, k), 1L << k);
  for (; k < 24; ++k) {
    const Matrix fine = detail::pade_steps(a, f, t / std::ldexp(1.0, k + 1), 1L << (k + 1));
    const double err = (fine - coarse).norm() / 15.0;
    if (err <= tol * std::max(fine.norm(), 1e-300)) return fine;
    coarse = fine;
  }
  throw NumericError("implicit propagator did not reach the tolerance");
}

/// Reference semigroup exp(tA) applied to f (columns).
inline Matrix propagate(const Matrix& a, const Matrix& f, double t,
                        PropagationMethod method = PropagationMethod::automatic) {
  if (t < 0.0) throw PreconditionError("propagation time must be non-negative");
  detail::require_finite(a, "generator");
  detail::require_finite(f, "initial state");
  if (t == 0.0) return f;
  if (method == PropagationMethod::automatic)
    method = a.rows() <= 400 ? PropagationMethod::expm : PropagationMethod::implicit;
  Matrix out;
  if (method == PropagationMethod::expm) {
    const Matrix at = t * a;
    out = at.exp() * f;
  } else {
    out = propagate_implicit(a, f, t);
  }
  detail::require_finite(out, "propagated state");
  return out;
}

}  // namespace pseudomode
