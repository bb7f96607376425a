#pragma once

// Finite frames of unit pseudomodes: E maps coefficients (C^N, plain l2) to
// samples (C^m, quadrature weights w). Adjoints are taken between those spaces.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "pseudomode/errors.hpp"
#include "pseudomode/grid.hpp"
#include "pseudomode/linalg.hpp"
#include "pseudomode/wkb.hpp"

namespace pseudomode {

inline constexpr double kDefaultRegularization = 1e-6;
inline constexpr double kConditionWarning = 1e12;

struct ColumnInfo {
  ModeKind kind = ModeKind::interior;
  double u = 0.0;
  cplx xi;
  double h = 0.0;
  int n = 0;
};

struct FrameMatrix {
  Matrix E;
  Vector lambda;
  RealVector weights;
  std::vector<double> x;
  std::vector<ColumnInfo> provenance;

  Eigen::Index rows() const { return E.rows(); }
  Eigen::Index cols() const { return E.cols(); }
  /// E* = E^H W, the adjoint from (C^m, w) to (C^N, l2).
  Matrix adjoint() const { return E.adjoint() * weights.asDiagonal(); }
};

/// Columns are the modes evaluated on x, normalized in the w-norm; lambda holds each mode's z.
inline FrameMatrix build_frame(const std::vector<Pseudomode>& modes, const std::vector<double>& x,
                               const RealVector& weights) {
  if (modes.empty()) throw PreconditionError("frame needs at least one mode");
  if (static_cast<Eigen::Index>(x.size()) != weights.size()) throw PreconditionError("grid and weights differ in size");
  FrameMatrix F;
  F.x = x;
  F.weights = weights;
  F.E.resize(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(modes.size()));
  F.lambda.resize(static_cast<Eigen::Index>(modes.size()));
  for (std::size_t j = 0; j < modes.size(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    for (std::size_t k = 0; k < x.size(); ++k) F.E(static_cast<Eigen::Index>(k), col) = modes[j].evaluate(x[k]).f;
    const double nrm = weighted_norm(weights, F.E.col(col));
    if (!(nrm > 0.0)) throw DegenerateError("mode vanishes on the frame grid");
    F.E.col(col) /= nrm;
    F.lambda(col) = modes[j].z;
    F.provenance.push_back({modes[j].kind, modes[j].u, modes[j].xi, modes[j].h, modes[j].n});
  }
  return F;
}

/// Frame on the interior nodes of a discretized operator.
inline FrameMatrix build_frame(const std::vector<Pseudomode>& modes, const DenseOperator& op) {
  return build_frame(modes, op.nodes(), op.weights());
}

/// Same frame with A -> -A: columns unchanged, lambda negated (generator convention T_t = exp(-t L)).
inline FrameMatrix negated(FrameMatrix F) {
  F.lambda = -F.lambda;
  return F;
}

/// ||A E - E Lambda|| from (C^N, l2) to (C^m, w).
inline double defect(const Matrix& a, const FrameMatrix& F) {
  if (a.rows() != F.rows() || a.cols() != F.rows()) throw PreconditionError("operator and frame dimensions differ");
  const Matrix r = a * F.E - F.E * F.lambda.asDiagonal();
  return largest_singular_value(F.weights.cwiseSqrt().asDiagonal() * r);
}

/// Column norms ||A e_n - Lambda_n e_n||: their maximum is the l1 -> (C^m, w) norm of A E - E Lambda.
inline std::vector<double> column_defects(const Matrix& a, const FrameMatrix& F) {
  const Matrix r = a * F.E - F.E * F.lambda.asDiagonal();
  std::vector<double> out;
  for (Eigen::Index j = 0; j < r.cols(); ++j) out.push_back(weighted_norm(F.weights, r.col(j)));
  return out;
}

/// Defect of the continuum operator: columns (L_h - z) f / ||f|| from the analytic evaluators.
inline double analytic_defect(const std::vector<Pseudomode>& modes, const std::vector<double>& x,
                              const RealVector& weights) {
  if (modes.empty()) throw PreconditionError("defect needs at least one mode");
  Matrix r(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(modes.size()));
  for (std::size_t j = 0; j < modes.size(); ++j) {
    Vector f(r.rows());
    for (std::size_t k = 0; k < x.size(); ++k) {
      const ModeValue v = modes[j].evaluate(x[k]);
      f(static_cast<Eigen::Index>(k)) = v.f;
      r(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = v.residual;
    }
    r.col(static_cast<Eigen::Index>(j)) /= weighted_norm(weights, f);
  }
  return largest_singular_value(weights.cwiseSqrt().asDiagonal() * r);
}

/// ||T_t|| <= M exp(gamma t).
struct EvolutionBound {
  double M = 1.0;
  double gamma = 0.0;
  double epsilon = 0.0;
};

/// M = 1 and gamma = max(numerical abscissa of A in the w-norm, max Re Lambda).
inline EvolutionBound numerical_range_bound(const Matrix& a, const FrameMatrix& F) {
  EvolutionBound b;
  b.gamma = numerical_abscissa(a, F.weights);
  for (Eigen::Index j = 0; j < F.lambda.size(); ++j) b.gamma = std::max(b.gamma, F.lambda(j).real());
  b.epsilon = defect(a, F);
  return b;
}

struct BoundRow {
  double t = 0.0;
  double lhs = 0.0;
  double bound = 0.0;
  double ratio = 0.0;
  bool ok = false;
};

struct BoundReport {
  EvolutionBound constants;
  double slack = 0.05;
  std::vector<BoundRow> rows;
  std::vector<BoundRow> perturbed_rows;  // frame E' with ||E - E'|| < eps
  bool all_ok() const {
    for (const auto& r : rows)
      if (!r.ok) return false;
    for (const auto& r : perturbed_rows)
      if (!r.ok) return false;
    return true;
  }
};

/// Checks ||T_t E - E e^{Lambda t}|| <= eps t M e^{gamma t} against the reference semigroup, and
/// ||T_t E' - E' e^{Lambda t}|| <= eps (1 + M + t M) e^{gamma t} when E' is supplied.
inline BoundReport semigroup_bound_check(const Matrix& a, const FrameMatrix& F, const EvolutionBound& c,
                                         const std::vector<double>& ts, const Matrix* e_prime = nullptr,
                                         double slack = 0.05) {
  if (c.M < 1.0) throw PreconditionError("M must be at least 1");
  for (Eigen::Index j = 0; j < F.lambda.size(); ++j)
    if (F.lambda(j).real() > c.gamma) throw PreconditionError("hypothesis Re(Lambda) <= gamma fails");
  if (e_prime) {
    const double gap = largest_singular_value(F.weights.cwiseSqrt().asDiagonal() * (F.E - *e_prime));
    if (!(gap < c.epsilon)) throw PreconditionError("perturbed frame is not within epsilon of E");
  }
  BoundReport rep;
  rep.constants = c;
  rep.slack = slack;
  const Matrix sw = F.weights.cwiseSqrt().asDiagonal();
  for (double t : ts) {
    const Matrix tE = propagate(a, F.E, t);
    const Vector el = (F.lambda * t).array().exp();
    BoundRow r;
    r.t = t;
    r.lhs = largest_singular_value(sw * (tE - F.E * el.asDiagonal()));
    r.bound = c.epsilon * t * c.M * std::exp(c.gamma * t);
    r.ratio = r.bound > 0.0 ? r.lhs / r.bound : (r.lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    r.ok = r.lhs <= r.bound * (1.0 + slack) + 1e-14;
    rep.rows.push_back(r);
    if (e_prime) {
      const Matrix tEp = propagate(a, *e_prime, t);
      BoundRow p;
      p.t = t;
      p.lhs = largest_singular_value(sw * (tEp - *e_prime * el.asDiagonal()));
      p.bound = c.epsilon * (1.0 + c.M + t * c.M) * std::exp(c.gamma * t);
      p.ratio = p.bound > 0.0 ? p.lhs / p.bound : 0.0;
      p.ok = p.lhs <= p.bound * (1.0 + slack) + 1e-14;
      rep.perturbed_rows.push_back(p);
    }
  }
  return rep;
}

enum class RegularizationRoute { cholesky, qr };

struct RegularizedInverse {
  Matrix F;                  // (E* E + delta)^{-1} E*
  double condition = 0.0;    // of E* E + delta
  bool ill_conditioned = false;
};

/// F_delta = (E* E + delta I)^{-1} E* by Cholesky on the Gram matrix.
inline RegularizedInverse regularized_inverse(const FrameMatrix& F, double delta = kDefaultRegularization) {
  if (!(delta > 0.0)) throw PreconditionError("delta must be positive");
  const Matrix es = F.adjoint();
  Matrix g = es * F.E;
  g.diagonal().array() += delta;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(g, Eigen::EigenvaluesOnly);
  RegularizedInverse out;
  out.condition = eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff();
  out.ill_conditioned = out.condition > kConditionWarning;
  Eigen::LLT<Matrix> llt(g);
  if (llt.info() != Eigen::Success) throw NumericError("regularized Gram matrix is not positive definite");
  out.F = llt.solve(es);
  return out;
}

/// phi minimizing ||f - E phi||_w^2 + delta ||phi||^2.
inline Vector regularized_solve(const FrameMatrix& F, const Vector& f, double delta,
                                RegularizationRoute route = RegularizationRoute::cholesky) {
  if (!(delta > 0.0)) throw PreconditionError("delta must be positive");
  if (f.size() != F.rows()) throw PreconditionError("vector and frame dimensions differ");
  if (route == RegularizationRoute::cholesky) {
    Matrix g = F.adjoint() * F.E;
    g.diagonal().array() += delta;
    return g.llt().solve(F.adjoint() * f);
  }
  // least squares on [W^{1/2} E; sqrt(delta) I] phi = [W^{1/2} f; 0]
  const Eigen::Index m = F.rows(), n = F.cols();
  Matrix aug(m + n, n);
  aug.topRows(m) = F.weights.cwiseSqrt().asDiagonal() * F.E;
  aug.bottomRows(n) = std::sqrt(delta) * Matrix::Identity(n, n);
  Vector rhs = Vector::Zero(m + n);
  rhs.head(m) = F.weights.cwiseSqrt().asDiagonal() * f;
  return aug.colPivHouseholderQr().solve(rhs);
}

/// Norm of T: (C^N, l2) -> (C^m, w), (C^m, w) -> (C^N, l2) or (C^m, w) -> (C^m, w).
inline double norm_coeff_to_grid(const Matrix& t, const RealVector& w) {
  return largest_singular_value(w.cwiseSqrt().asDiagonal() * t);
}
inline double norm_grid_to_coeff(const Matrix& t, const RealVector& w) {
  return largest_singular_value(t * w.cwiseSqrt().cwiseInverse().asDiagonal());
}
inline double norm_grid_to_grid(const Matrix& t, const RealVector& w) {
  return largest_singular_value(to_euclidean(t, w, w));
}

struct Reconstruction {
  Vector phi;
  double error = 0.0;  // ||f - E phi||
};

inline Reconstruction reconstruct(const FrameMatrix& F, const Vector& f, double delta = kDefaultRegularization) {
  Reconstruction r;
  r.phi = regularized_solve(F, f, delta);
  r.error = weighted_norm(F.weights, f - F.E * r.phi);
  return r;
}

struct EvolutionReport {
  Vector approx;      // E e^{Lambda t} phi
  Vector reference;   // T_t f
  double error = 0.0;
  double span_term = 0.0;    // ||f - E phi|| M e^{gamma t}
  double defect_term = 0.0;  // eps ||phi|| t M e^{gamma t}
  double budget = 0.0;
  bool ok = false;
};

inline EvolutionReport evolve_approx(const Matrix& a, const FrameMatrix& F, const EvolutionBound& c,
                                     const Vector& f, double delta, double t, double slack = 0.05) {
  if (t < 0.0) throw PreconditionError("t must be non-negative");
  for (Eigen::Index j = 0; j < F.lambda.size(); ++j)
    if (F.lambda(j).real() > c.gamma) throw PreconditionError("hypothesis Re(Lambda) <= gamma fails");
  EvolutionReport r;
  const Vector phi = regularized_solve(F, f, delta);
  const Vector el = (F.lambda * t).array().exp();
  r.approx = F.E * (el.asDiagonal() * phi);
  r.reference = propagate(a, Matrix(f), t).col(0);
  r.error = weighted_norm(F.weights, r.reference - r.approx);
  const double growth = c.M * std::exp(c.gamma * t);
  r.span_term = weighted_norm(F.weights, f - F.E * phi) * growth;
  r.defect_term = c.epsilon * phi.norm() * t * growth;
  r.budget = r.span_term + r.defect_term;
  r.ok = r.error <= r.budget * (1.0 + slack) + 1e-14;
  return r;
}

struct InclusionRow {
  cplx lambda;
  double s_min = 0.0;
  bool inside = false;
};

/// s_min(A - Lambda_n) < eps for every column, in the w-norm.
inline std::vector<InclusionRow> pseudospectrum_inclusion(const Matrix& a, const FrameMatrix& F, double eps) {
  std::vector<cplx> zs(F.lambda.data(), F.lambda.data() + F.lambda.size());
  std::vector<InclusionRow> out;
  for (const auto& c : resolvent_map(a, F.weights, zs)) out.push_back({c.z, c.s_min, c.s_min < eps});
  return out;
}

/// Q(f) = E diag(f) E*.
inline Matrix quantize(const FrameMatrix& F, const Vector& f) {
  if (f.size() != F.cols()) throw PreconditionError("symbol length differs from column count");
  return F.E * f.asDiagonal() * F.adjoint();
}

/// S_delta(f) = E diag(f) F_delta.
inline Matrix quantize_regularized(const FrameMatrix& F, const Vector& f, double delta = kDefaultRegularization) {
  if (f.size() != F.cols()) throw PreconditionError("symbol length differs from column count");
  return F.E * f.asDiagonal() * regularized_inverse(F, delta).F;
}

/// Smallest eigenvalue of Q(f), which is self-adjoint in the w-inner product for real f.
inline double quantization_min_eigenvalue(const FrameMatrix& F, const RealVector& f) {
  const Matrix sw = F.weights.cwiseSqrt().asDiagonal();
  const Matrix herm = sw * F.E * f.cast<cplx>().asDiagonal() * F.E.adjoint() * sw;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (herm + herm.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// ||S(fg) - S(f) S(g)|| in the w-norm.
inline double homomorphism_defect(const FrameMatrix& F, const Vector& f, const Vector& g,
                                  double delta = kDefaultRegularization) {
  const Matrix fd = regularized_inverse(F, delta).F;
  auto S = [&](const Vector& s) { return Matrix(F.E * s.asDiagonal() * fd); };
  return norm_grid_to_grid(S(f.cwiseProduct(g)) - S(f) * S(g), F.weights);
}

/// ||E* E - I||: zero exactly when E is an isometry.
inline double isometry_defect(const FrameMatrix& F) {
  Matrix g = F.adjoint() * F.E;
  g.diagonal().array() -= 1.0;
  return largest_singular_value(g);
}

}  // namespace pseudomode
