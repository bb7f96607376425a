#pragma once

// Interior pseudomodes f(u+s) = h^{-1/4} chi(s) exp(psi(s)), the rough
// O(h^{1/2}) modes and the Gaussian coherent-state comparison.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "pseudomode/coefficients.hpp"
#include "pseudomode/cutoff.hpp"
#include "pseudomode/errors.hpp"
#include "pseudomode/phase.hpp"
#include "pseudomode/quadrature.hpp"
#include "pseudomode/symbol.hpp"

namespace pseudomode {

enum class ModeKind { interior, rough, gaussian, boundary };

inline const char* to_string(ModeKind k) {
  switch (k) {
    case ModeKind::interior: return "interior";
    case ModeKind::rough: return "rough";
    case ModeKind::gaussian: return "gaussian";
    case ModeKind::boundary: return "boundary";
  }
  return "unknown";
}

/// f, f', f'' and (L_h - z) f at one abscissa.
struct ModeValue {
  cplx f, df, ddf, residual;
};

struct Pseudomode {
  ModeKind kind = ModeKind::interior;
  double h = 0.0;
  int n = 0;
  double u = 0.0;   // centre, or boundary point
  cplx xi;          // real for interior modes
  cplx z;
  PhaseSeries phase;
  CutoffSpec cutoff;

  std::vector<double> x, weights;
  std::vector<cplx> f, df, ddf, residual;

  std::function<ModeValue(double)> evaluator;

  ModeValue evaluate(double at) const { return evaluator(at); }
  double norm() const { return weighted_norm(weights, f); }
};

/// Fill the sample arrays of `mode` on the given nodes.
inline void sample_mode(Pseudomode& mode, std::vector<double> nodes) {
  mode.weights = trapezoid_weights(nodes);
  const std::size_t m = nodes.size();
  mode.f.resize(m);
  mode.df.resize(m);
  mode.ddf.resize(m);
  mode.residual.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    const ModeValue v = mode.evaluator(nodes[k]);
    mode.f[k] = v.f;
    mode.df[k] = v.df;
    mode.ddf[k] = v.ddf;
    mode.residual[k] = v.residual;
  }
  mode.x = std::move(nodes);
}

struct SamplingOptions {
  std::size_t min_points = 2048;
  double per_width = 16.0;       // nodes per localization length (interior)
  double per_width_edge = 32.0;  // nodes per decay length (boundary)
  std::size_t max_points = std::size_t{1} << 18;
};

/// Phase data that does not depend on h: chart, centre series and cutoff.
struct PreparedPhase {
  ModeKind kind = ModeKind::interior;
  double origin = 0.0;
  cplx xi;
  cplx z;
  int n = 0;
  std::shared_ptr<const PhaseChart> chart;
  CutoffSpec cutoff;
  double decay = 0.0;  // F(0)
  std::shared_ptr<const CoefficientField> field;
};

inline PreparedPhase prepare_interior(const CoefficientField& cf, const PhasePoint& p, int n,
                                      int K = kDefaultTruncation, const CutoffRequest& req = {}) {
  if (n < 0) throw PreconditionError("expansion order n must be >= 0");
  cf.require(p.u);
  const auto d = symbol_derivatives(cf, p);
  if (!(poisson_bracket(d) > 0.0)) throw NotInOmegaError("(u, xi) is not in Omega: Poisson bracket <= 0");
  const auto v = cf.values(p.u);
  PreparedPhase pp;
  pp.kind = ModeKind::interior;
  pp.origin = p.u;
  pp.xi = p.xi;
  pp.z = principal_symbol(cf, p);
  pp.n = n;
  pp.field = std::make_shared<const CoefficientField>(cf);
  const double reach_l = std::min(p.u - cf.x_lo(), req.delta0);
  const double reach_r = std::min(cf.x_hi() - p.u, req.delta0);
  pp.chart = std::make_shared<const PhaseChart>(cf, p.u, pp.z, p.xi + v.b / (2.0 * v.a), n, K, reach_l,
                                                reach_r, req.patch_spacing, req.tail_tol);
  pp.cutoff = choose_delta(*pp.chart, req, false);
  pp.decay = -2.0 * pp.chart->centre_series()[-1].at(2).real();
  return pp;
}

namespace detail {

// Evaluator for chart-based modes with prefactor h^{-power}.
inline std::function<ModeValue(double)> chart_evaluator(const PreparedPhase& pp, double h, double power) {
  const int n = pp.n;
  std::vector<double> hp(static_cast<std::size_t>(2 * n + 6));
  for (int m = -1; m <= 2 * n + 4; ++m) hp[static_cast<std::size_t>(m + 1)] = std::pow(h, m);
  const double pref = std::pow(h, -power);
  return [pp, h, n, hp, pref](double at) {
    auto H = [&](int m) { return hp[static_cast<std::size_t>(m + 1)]; };
    const double s = at - pp.origin;
    const bool outside = pp.kind == ModeKind::boundary ? (s < 0.0 || s >= pp.cutoff.delta)
                                                       : (std::abs(s) >= pp.cutoff.delta);
    if (outside) return ModeValue{};
    thread_local PhaseChart::Point pt;
    pp.chart->evaluate(s, pt);
    cplx psi{}, d1{}, d2{};
    for (int m = -1; m <= n; ++m) {
      const std::size_t k = static_cast<std::size_t>(m + 1);
      psi += H(m) * pt.psi[k];
      d1 += H(m) * pt.d1[k];
      d2 += H(m) * pt.d2[k];
    }
    const Jet2 chi = pp.cutoff(s);
    const cplx e = pref * std::exp(psi);
    ModeValue v;
    v.f = chi.v * e;
    v.df = (chi.d1 + chi.v * d1) * e;
    v.ddf = (chi.d2 + 2.0 * chi.d1 * d1 + chi.v * (d2 + d1 * d1)) * e;
    // Remainder of the expansion: phi_p for p = n+2..2n+2 (psi'_m, m > n, are zero).
    const auto c = pp.field->values(at);
    cplx rem{};
    for (int p = n + 2; p <= 2 * n + 2; ++p) {
      cplx acc = (p == n + 2) ? pt.d2[static_cast<std::size_t>(n + 1)] : cplx{};
      for (int i = std::max(0, p - 2 - n); i <= std::min(n, p - 2); ++i)
        acc += pt.d1[static_cast<std::size_t>(i + 1)] * pt.d1[static_cast<std::size_t>(p - 2 - i + 1)];
      rem += H(p) * (-c.a * acc);
    }
    v.residual = e * (chi.v * rem - h * h * c.a * (chi.d2 + 2.0 * chi.d1 * d1) - I * h * c.b * chi.d1);
    return v;
  };
}

inline std::vector<double> uniform_nodes(double lo, double hi, std::size_t m) {
  return linspace(lo, hi, m);
}

inline std::size_t node_count(double width, double spacing, const SamplingOptions& opt) {
  const double want = std::ceil(width / spacing) + 1.0;
  return std::clamp(static_cast<std::size_t>(std::min(want, 1e12)), opt.min_points, opt.max_points);
}

}  // namespace detail

inline Pseudomode assemble_mode(const PreparedPhase& pp, double h, const SamplingOptions& opt = {}) {
  if (!(h > 0.0 && h <= 1.0)) throw PreconditionError("h must lie in (0, 1]");
  Pseudomode mode;
  mode.kind = pp.kind;
  mode.h = h;
  mode.n = pp.n;
  mode.u = pp.origin;
  mode.xi = pp.xi;
  mode.z = pp.z;
  mode.phase = pp.chart->centre_series();
  mode.cutoff = pp.cutoff;
  const double delta = pp.cutoff.delta;
  if (pp.kind == ModeKind::boundary) {
    mode.evaluator = detail::chart_evaluator(pp, h, 0.5);
    const double len = h / pp.decay;
    sample_mode(mode, detail::uniform_nodes(pp.origin, pp.origin + delta,
                                            detail::node_count(delta, len / opt.per_width_edge, opt)));
  } else {
    mode.evaluator = detail::chart_evaluator(pp, h, 0.25);
    const double len = std::sqrt(h / pp.decay);
    sample_mode(mode, detail::uniform_nodes(pp.origin - delta, pp.origin + delta,
                                            detail::node_count(2.0 * delta, len / opt.per_width, opt)));
  }
  return mode;
}

/// Interior JWKB pseudomode of order n at (u, xi) in Omega.
inline Pseudomode assemble_mode(const CoefficientField& cf, const PhasePoint& p, double h, int n,
                                int K = kDefaultTruncation, const CutoffRequest& req = {},
                                const SamplingOptions& opt = {}) {
  return assemble_mode(prepare_interior(cf, p, n, K, req), h, opt);
}

/// psi_{-1} alone (length K+1).
inline TaylorSeries eikonal_phase(const CoefficientField& cf, const PhasePoint& p, int K = kDefaultTruncation) {
  const auto v = cf.values(p.u);
  return detail::phase_series(cf, p.u, principal_symbol(cf, p), p.xi + v.b / (2.0 * v.a), -1, K)[-1];
}

/// psi_{-1}..psi_n (each of length K+1).
inline PhaseSeries transport_recursion(const CoefficientField& cf, const PhasePoint& p, int n,
                                       int K = kDefaultTruncation) {
  if (n < 0) throw PreconditionError("expansion order n must be >= 0");
  const auto v = cf.values(p.u);
  return detail::phase_series(cf, p.u, principal_symbol(cf, p), p.xi + v.b / (2.0 * v.a), n, K);
}

namespace detail {

// Direct residual -h^2 a f'' - i h b f' + (c - z) f.
inline cplx direct_residual(const CoefficientField& cf, double h, cplx z, double at, cplx f, cplx df,
                            cplx ddf) {
  const auto c = cf.values(at);
  return -h * h * c.a * ddf - I * h * c.b * df + (c.c - z) * f;
}

}  // namespace detail

/// h^{-1/4} e^{i xi (x-u)/h} phi((x-u)/h^{1/2}) with phi = 1 on [-1,1], 0 outside [-2,2].
inline Pseudomode rough_mode(const CoefficientField& cf, const PhasePoint& p, double h,
                             const SamplingOptions& opt = {}) {
  if (!(h > 0.0 && h <= 1.0)) throw PreconditionError("h must lie in (0, 1]");
  cf.require(p.u);
  const double scale = std::sqrt(h);
  const double radius = 2.0 * scale;
  if (p.u - radius < cf.x_lo() || p.u + radius > cf.x_hi())
    throw DomainError("rough mode support leaves the coefficient domain");
  Pseudomode mode;
  mode.kind = ModeKind::rough;
  mode.h = h;
  mode.n = 0;
  mode.u = p.u;
  mode.xi = p.xi;
  mode.z = principal_symbol(cf, p);
  mode.cutoff = CutoffSpec(radius);
  const CutoffSpec bump(2.0);
  const auto field = std::make_shared<const CoefficientField>(cf);
  const double pref = std::pow(h, -0.25);
  const cplx z = mode.z;
  const double xi = p.xi, u = p.u;
  mode.evaluator = [=](double at) {
    const double s = at - u;
    if (std::abs(s) >= radius) return ModeValue{};
    const Jet2 b = bump(s / scale);
    const cplx e = pref * std::exp(I * xi * s / h);
    const cplx ik = I * xi / h;
    ModeValue v;
    v.f = b.v * e;
    v.df = (ik * b.v + b.d1 / scale) * e;
    v.ddf = (ik * ik * b.v + 2.0 * ik * b.d1 / scale + b.d2 / h) * e;
    v.residual = detail::direct_residual(*field, h, z, at, v.f, v.df, v.ddf);
    return v;
  };
  const double wavelength = 2.0 * std::numbers::pi * h / std::max(std::abs(xi), 1e-300);
  const double spacing = std::min(scale / opt.per_width, wavelength / opt.per_width);
  sample_mode(mode, detail::uniform_nodes(u - radius, u + radius, detail::node_count(2.0 * radius, spacing, opt)));
  return mode;
}

/// h^{-1/4} chi(s) exp{(i xi s + k s^2/2)/h} with k the twist curvature.
inline Pseudomode gaussian_mode(const CoefficientField& cf, const PhasePoint& p, double h,
                                const CutoffSpec& cutoff, const SamplingOptions& opt = {}) {
  if (!(h > 0.0 && h <= 1.0)) throw PreconditionError("h must lie in (0, 1]");
  const cplx k = twist_curvature(cf, p);
  if (!(k.real() < 0.0)) throw NotInOmegaError("Re k >= 0: Gaussian is not localized");
  if (p.u - cutoff.delta < cf.x_lo() || p.u + cutoff.delta > cf.x_hi())
    throw DomainError("cutoff support leaves the coefficient domain");
  Pseudomode mode;
  mode.kind = ModeKind::gaussian;
  mode.h = h;
  mode.n = 0;
  mode.u = p.u;
  mode.xi = p.xi;
  mode.z = principal_symbol(cf, p);
  mode.cutoff = cutoff;
  const auto field = std::make_shared<const CoefficientField>(cf);
  const double pref = std::pow(h, -0.25);
  const cplx z = mode.z;
  const double xi = p.xi, u = p.u;
  mode.evaluator = [=](double at) {
    const double s = at - u;
    if (std::abs(s) >= cutoff.delta) return ModeValue{};
    const Jet2 chi = cutoff(s);
    const cplx e = pref * std::exp((I * xi * s + 0.5 * k * s * s) / h);
    const cplx d1 = (I * xi + k * s) / h;
    const cplx d2 = k / h;
    ModeValue v;
    v.f = chi.v * e;
    v.df = (chi.d1 + chi.v * d1) * e;
    v.ddf = (chi.d2 + 2.0 * chi.d1 * d1 + chi.v * (d2 + d1 * d1)) * e;
    v.residual = detail::direct_residual(*field, h, z, at, v.f, v.df, v.ddf);
    return v;
  };
  const double len = std::sqrt(h / -k.real());
  sample_mode(mode, detail::uniform_nodes(u - cutoff.delta, u + cutoff.delta,
                                          detail::node_count(2.0 * cutoff.delta, len / opt.per_width, opt)));
  return mode;
}

/// Gaussian with the same cutoff radius as the interior JWKB mode at (u, xi).
inline Pseudomode gaussian_mode(const CoefficientField& cf, const PhasePoint& p, double h,
                                const SamplingOptions& opt = {}) {
  return gaussian_mode(cf, p, h, prepare_interior(cf, p, 0).cutoff, opt);
}

/// ||f - g|| / ||f|| on the nodes of f.
inline double mode_distance(const Pseudomode& f, const Pseudomode& g) {
  std::vector<cplx> diff(f.x.size());
  for (std::size_t k = 0; k < f.x.size(); ++k) diff[k] = f.f[k] - g.evaluate(f.x[k]).f;
  return weighted_norm(f.weights, diff) / f.norm();
}

/// G0 Gamma((2 beta + 1)/2) / F0^{(2 beta + 1)/2}: limit of int s^{2 beta} G e^{-F s^2/h} ds / h^{beta+1/2}.
inline double laplace_constant(int beta, double G0, double F0) {
  if (beta < 0) throw PreconditionError("beta must be non-negative");
  if (!(F0 > 0.0)) throw PreconditionError("F0 must be positive");
  const double e = (2.0 * beta + 1.0) / 2.0;
  return G0 * std::tgamma(e) / std::pow(F0, e);
}

}  // namespace pseudomode
