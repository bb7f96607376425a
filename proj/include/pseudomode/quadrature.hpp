#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "pseudomode/errors.hpp"

namespace pseudomode {

/// Trapezoid weights on arbitrary increasing nodes.
inline std::vector<double> trapezoid_weights(const std::vector<double>& x) {
  const std::size_t m = x.size();
  std::vector<double> w(m, 0.0);
  if (m < 2) return w;
  for (std::size_t k = 0; k + 1 < m; ++k) {
    const double d = x[k + 1] - x[k];
    if (!(d > 0.0)) throw PreconditionError("quadrature nodes must be strictly increasing");
    w[k] += 0.5 * d;
    w[k + 1] += 0.5 * d;
  }
  return w;
}

/// sqrt(sum w_k |v_k|^2), summed in index order.
template <class Vec>
double weighted_norm(const std::vector<double>& w, const Vec& v) {
  double s = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * std::norm(v[k]);
  return std::sqrt(s);
}

}  // namespace pseudomode
