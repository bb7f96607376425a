#pragma once

// Boundary pseudomodes at the left end x0 = x_lo of the coefficient domain:
// f(x0 + s) = h^{-1/2} chi(s) exp(psi(s)) with complex xi, Im xi > 0.

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <utility>
#include <vector>

#include "pseudomode/coefficients.hpp"
#include "pseudomode/errors.hpp"
#include "pseudomode/phase.hpp"
#include "pseudomode/symbol.hpp"
#include "pseudomode/wkb.hpp"

namespace pseudomode {

struct BoundaryCovector {
  cplx xi;

  explicit BoundaryCovector(cplx v) : xi(v) {
    if (!(v.imag() > 0.0)) throw PreconditionError("boundary covector needs Im(xi) > 0");
  }
};

/// coef_deriv * h f'(x0) + coef_value * f(x0) = 0
struct RobinCondition {
  cplx coef_deriv;
  cplx coef_value;

  RobinCondition(cplx d, cplx v) : coef_deriv(d), coef_value(v) {
    if (d == cplx{} && v == cplx{}) throw PreconditionError("Robin coefficients must not both vanish");
  }
  static RobinCondition dirichlet() { return {0.0, 1.0}; }
  static RobinCondition neumann() { return {1.0, 0.0}; }
};

inline double boundary_point(const CoefficientField& cf) { return cf.x_lo(); }

/// Im(-b/a) > 0 at the boundary point.
inline bool exit_condition(const CoefficientField& cf) {
  const auto v = cf.values(boundary_point(cf));
  return (-v.b / v.a).imag() > 0.0;
}

/// Height of the band 0 < Im xi < Im(-b/a).
inline double boundary_band(const CoefficientField& cf) {
  if (!exit_condition(cf)) throw PreconditionError("exit condition Im(-b/a) > 0 fails at the boundary");
  const auto v = cf.values(boundary_point(cf));
  return (-v.b / v.a).imag();
}

inline bool in_band(const CoefficientField& cf, cplx xi) {
  const double top = boundary_band(cf);
  return xi.imag() > 0.0 && xi.imag() < top;
}

/// c - b^2/(4a) at the boundary: the value with a double root.
inline cplx parabola_vertex(const CoefficientField& cf) {
  const auto v = cf.values(boundary_point(cf));
  return v.c - v.b * v.b / (4.0 * v.a);
}

/// Both roots of a xi^2 + b xi + c = z at the boundary, ordered by Im then Re.
inline std::pair<cplx, cplx> quadratic_roots(const CoefficientField& cf, cplx z) {
  const auto v = cf.values(boundary_point(cf));
  const cplx disc = v.b * v.b - 4.0 * v.a * (v.c - z);
  const double scale = std::norm(v.b) + std::abs(4.0 * v.a * (v.c - z)) + 1e-300;
  if (std::abs(disc) <= 1e-14 * scale) throw DegenerateError("z is the parabola vertex: double root");
  const cplx sq = std::sqrt(disc);
  // Cancellation-free pair: q = -(b + sgn sq)/2, roots q/a and (c - z)/q.
  const cplx q = -0.5 * (v.b + ((std::real(std::conj(v.b) * sq) >= 0.0) ? sq : -sq));
  cplx r1 = q / v.a;
  cplx r2 = (q == cplx{}) ? -r1 : (v.c - z) / q;
  auto before = [](cplx p, cplx q2) {
    return p.imag() < q2.imag() || (p.imag() == q2.imag() && p.real() < q2.real());
  };
  if (before(r2, r1)) std::swap(r1, r2);
  return {r1, r2};
}

enum class ParabolaPosition { inside, outside, vertex };

inline ParabolaPosition classify_parabola(const CoefficientField& cf, cplx z) {
  try {
    const auto [r1, r2] = quadratic_roots(cf, z);
    return (in_band(cf, r1) && in_band(cf, r2)) ? ParabolaPosition::inside : ParabolaPosition::outside;
  } catch (const DegenerateError&) {
    return ParabolaPosition::vertex;
  }
}

/// z inside P = {sigma(x0, t) : t real}: both roots lie in the band. The vertex counts as inside.
inline bool inside_parabola(const CoefficientField& cf, cplx z) {
  return classify_parabola(cf, z) != ParabolaPosition::outside;
}

/// Samples of P for plotting, t in [-t_max, t_max].
inline std::vector<std::pair<double, cplx>> parabola_polyline(const CoefficientField& cf, double t_max,
                                                              std::size_t count) {
  std::vector<std::pair<double, cplx>> out;
  for (double t : linspace(-t_max, t_max, count)) out.emplace_back(t, principal_symbol(cf, boundary_point(cf), t));
  return out;
}

inline PhaseSeries boundary_phase(const CoefficientField& cf, const BoundaryCovector& xi, int n,
                                  int K = kDefaultTruncation) {
  if (n < 0) throw PreconditionError("expansion order n must be >= 0");
  const double x0 = boundary_point(cf);
  const auto v = cf.values(x0);
  return detail::phase_series(cf, x0, principal_symbol(cf, x0, xi.xi), xi.xi + v.b / (2.0 * v.a), n, K);
}

inline PreparedPhase prepare_boundary(const CoefficientField& cf, const BoundaryCovector& xi, int n,
                                      int K = kDefaultTruncation, const CutoffRequest& req = {}) {
  if (n < 0) throw PreconditionError("expansion order n must be >= 0");
  const double x0 = boundary_point(cf);
  const auto v = cf.values(x0);
  PreparedPhase pp;
  pp.kind = ModeKind::boundary;
  pp.origin = x0;
  pp.xi = xi.xi;
  pp.z = principal_symbol(cf, x0, xi.xi);
  pp.n = n;
  pp.field = std::make_shared<const CoefficientField>(cf);
  const double reach = std::min(cf.x_hi() - x0, req.delta0);
  pp.chart = std::make_shared<const PhaseChart>(cf, x0, pp.z, xi.xi + v.b / (2.0 * v.a), n, K, 0.0, reach,
                                                req.patch_spacing, req.tail_tol);
  pp.cutoff = choose_delta(*pp.chart, req, true);
  pp.decay = -2.0 * pp.chart->centre_series()[-1].at(1).real();
  return pp;
}

inline Pseudomode boundary_mode(const CoefficientField& cf, const BoundaryCovector& xi, double h, int n,
                                int K = kDefaultTruncation, const CutoffRequest& req = {},
                                const SamplingOptions& opt = {}) {
  return assemble_mode(prepare_boundary(cf, xi, n, K, req), h, opt);
}

/// G0 Gamma(m+1) / F0^{m+1}: limit of int_0 s^m G e^{-F s/h} ds / h^{m+1}.
inline double laplace_constant_boundary(int m, double G0, double F0) {
  if (m < 0 || m % 2 != 0) throw PreconditionError("m must be a non-negative even integer");
  if (!(F0 > 0.0)) throw PreconditionError("F0 must be positive");
  return G0 * std::tgamma(m + 1.0) / std::pow(F0, m + 1.0);
}

/// Leading-order combination weights (i cd xi2 + cv, -(i cd xi1 + cv)).
inline std::pair<cplx, cplx> leading_robin_weights(const RobinCondition& rc, cplx xi1, cplx xi2) {
  return {I * rc.coef_deriv * xi2 + rc.coef_value, -(I * rc.coef_deriv * xi1 + rc.coef_value)};
}

struct RobinMode {
  Pseudomode mode;
  cplx xi1, xi2;
  cplx alpha, beta;   // f = alpha f1 + beta f2
  double bc_residual;  // |cd h f'(x0) + cv f(x0)| / (h^{-1/2}(|cd| + |cv|))
};

inline cplx robin_functional(const RobinCondition& rc, double h, const ModeValue& v) {
  return rc.coef_deriv * h * v.df + rc.coef_value * v.f;
}

inline double robin_residual(const RobinCondition& rc, double h, const ModeValue& v) {
  return std::abs(robin_functional(rc, h, v)) /
         (std::pow(h, -0.5) * (std::abs(rc.coef_deriv) + std::abs(rc.coef_value)));
}

/// Boundary modes for both roots of sigma(x0, xi) = z, combined with weights taken
/// from their computed boundary traces so that the Robin condition holds exactly.
inline RobinMode robin_combination(const CoefficientField& cf, const RobinCondition& rc, cplx z, double h,
                                   int n, int K = kDefaultTruncation, const CutoffRequest& req = {},
                                   const SamplingOptions& opt = {}) {
  switch (classify_parabola(cf, z)) {
    case ParabolaPosition::vertex: throw DegenerateError("z is the parabola vertex");
    case ParabolaPosition::outside: throw PreconditionError("z is not strictly inside the parabola");
    case ParabolaPosition::inside: break;
  }
  const auto [xi1, xi2] = quadratic_roots(cf, z);
  const Pseudomode f1 = boundary_mode(cf, BoundaryCovector(xi1), h, n, K, req, opt);
  const Pseudomode f2 = boundary_mode(cf, BoundaryCovector(xi2), h, n, K, req, opt);
  const double x0 = boundary_point(cf);
  const double norm = std::pow(h, -0.5) * (std::abs(rc.coef_deriv) + std::abs(rc.coef_value));
  const cplx b1 = robin_functional(rc, h, f1.evaluate(x0)) / norm;
  const cplx b2 = robin_functional(rc, h, f2.evaluate(x0)) / norm;
  if (std::abs(b1) + std::abs(b2) < 1e-14) throw DegenerateError("both modes satisfy the boundary condition");
  const cplx alpha = b2, beta = -b1;

  RobinMode out;
  out.xi1 = xi1;
  out.xi2 = xi2;
  out.alpha = alpha;
  out.beta = beta;
  Pseudomode& m = out.mode;
  m.kind = ModeKind::boundary;
  m.h = h;
  m.n = n;
  m.u = x0;
  m.xi = xi1;
  m.z = z;
  m.phase = f1.phase;
  m.cutoff = CutoffSpec(std::max(f1.cutoff.delta, f2.cutoff.delta));
  const auto e1 = f1.evaluator, e2 = f2.evaluator;
  m.evaluator = [=](double at) {
    const ModeValue a = e1(at), b = e2(at);
    return ModeValue{alpha * a.f + beta * b.f, alpha * a.df + beta * b.df, alpha * a.ddf + beta * b.ddf,
                     alpha * a.residual + beta * b.residual};
  };
  const double spacing = std::min(f1.x[1] - f1.x[0], f2.x[1] - f2.x[0]);
  const std::size_t count = detail::node_count(m.cutoff.delta, spacing, opt);
  sample_mode(m, linspace(x0, x0 + m.cutoff.delta, count));
  if (!(m.norm() > 0.0)) throw DegenerateError("combined boundary mode vanishes");
  out.bc_residual = robin_residual(rc, h, m.evaluate(x0));
  return out;
}

}  // namespace pseudomode
