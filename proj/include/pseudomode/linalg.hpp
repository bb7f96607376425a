#pragma once

// Dense helpers on quadrature-weighted spaces. A weight vector w stands for
// the inner product <f, g> = sum_k w_k conj(f_k) g_k.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>

#include "pseudomode/errors.hpp"

namespace pseudomode {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// W_out^{1/2} A W_in^{-1/2}: the matrix whose 2-norm is the weighted operator norm.
inline Matrix to_euclidean(const Matrix& a, const RealVector& w_out, const RealVector& w_in) {
  return w_out.cwiseSqrt().asDiagonal() * a * w_in.cwiseSqrt().cwiseInverse().asDiagonal();
}

inline double weighted_norm(const RealVector& w, const Vector& v) {
  return std::sqrt((w.array() * v.array().abs2()).sum());
}

inline double largest_singular_value(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

inline double smallest_singular_value_dense(const Matrix& a) {
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

/// Weighted adjoint: <A f, g>_{w_out} = <f, A* g>_{w_in}.
inline Matrix weighted_adjoint(const Matrix& a, const RealVector& w_out, const RealVector& w_in) {
  return w_in.cwiseInverse().asDiagonal() * a.adjoint() * w_out.asDiagonal();
}

/// Largest eigenvalue of the Hermitian part of W^{1/2} A W^{-1/2}; bounds
/// ||exp(tA)|| <= exp(t * value) in the weighted norm.
inline double numerical_abscissa(const Matrix& a, const RealVector& w) {
  const Matrix b = to_euclidean(a, w, w);
  const Matrix herm = 0.5 * (b + b.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

struct PowerIterationResult {
  double norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Operator norm of T: (C^n, w_in) -> (C^m, w_out) by power iteration on T*T.
inline PowerIterationResult power_norm(const std::function<Vector(const Vector&)>& apply,
                                       const std::function<Vector(const Vector&)>& apply_adjoint,
                                       const RealVector& w_in, const Vector& start, int max_iter = 50,
                                       double stagnation = 1e-10) {
  PowerIterationResult r;
  Vector v = start / weighted_norm(w_in, start);
  double prev = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    const Vector tv = apply(v);
    const Vector g = apply_adjoint(tv);
    const double lambda = (w_in.array() * (v.conjugate().array() * g.array()).real()).sum();
    r.norm = std::sqrt(std::max(lambda, 0.0));
    r.iterations = it;
    const double gn = weighted_norm(w_in, g);
    if (!(gn > 0.0)) {
      r.norm = 0.0;
      r.converged = true;
      break;
    }
    v = g / gn;
    if (it > 1 && std::abs(r.norm - prev) <= stagnation * std::max(r.norm, 1e-300)) {
      r.converged = true;
      break;
    }
    prev = r.norm;
  }
  return r;
}

}  // namespace pseudomode
