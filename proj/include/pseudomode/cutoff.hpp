#pragma once

#include <cmath>

#include "pseudomode/errors.hpp"

namespace pseudomode {

/// Value and first two derivatives of a real function at one point.
struct Jet2 {
  double v = 0.0, d1 = 0.0, d2 = 0.0;
};

/// C-infinity step: 1 on t <= 0, 0 on t >= 1, built from e^{-1/t}.
/// On (0,1) it equals 1/(1+e^g) with g(t) = 1/(1-t) - 1/t.
inline Jet2 smooth_step(double t) {
  if (t <= 0.0) return {1.0, 0.0, 0.0};
  if (t >= 1.0) return {0.0, 0.0, 0.0};
  const double g = 1.0 / (1.0 - t) - 1.0 / t;
  const double g1 = 1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t));
  const double g2 = 2.0 / ((1.0 - t) * (1.0 - t) * (1.0 - t)) - 2.0 / (t * t * t);
  double s, q;  // s = S, q = 1 - S
  if (g > 0.0) {
    const double e = std::exp(-g);
    s = e / (1.0 + e);
    q = 1.0 / (1.0 + e);
  } else {
    const double e = std::exp(g);
    s = 1.0 / (1.0 + e);
    q = e / (1.0 + e);
  }
  const double sq = s * q;
  const double d1 = -sq * g1;
  const double d2 = -(d1 * (q - s) * g1 + sq * g2);
  return {s, d1, d2};
}

/// chi(s) = 1 on |s| <= delta/2, 0 on |s| >= delta.
struct CutoffSpec {
  double delta = 1.0;

  CutoffSpec() = default;
  explicit CutoffSpec(double d) : delta(d) {
    if (!(d > 0.0) || !std::isfinite(d)) throw PreconditionError("cutoff radius must be positive");
  }

  Jet2 operator()(double s) const {
    const double half = 0.5 * delta;
    const double a = std::abs(s);
    const Jet2 st = smooth_step((a - half) / half);
    const double sgn = s < 0.0 ? -1.0 : 1.0;
    return {st.v, st.d1 * sgn / half, st.d2 / (half * half)};
  }
};

}  // namespace pseudomode
