#pragma once

// JWKB phase functions as truncated Taylor series.
//
// With f = exp(psi), psi = sum_{m=-1..n} h^m psi_m, the conjugated operator
// e^{-psi}(L_h - sigma)e^{psi} = sum_p h^p phi_p where
//   phi_p = -a [psi''_{p-2} + sum_{i+j=p-2} psi'_i psi'_j] - i b psi'_{p-1}
//           + [p = 0](c - sigma).
// phi_0 = 0 is the eikonal equation; phi_{m+1} = 0 is solved for psi'_m.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <sstream>
#include <vector>

#include "pseudomode/coefficients.hpp"
#include "pseudomode/cutoff.hpp"
#include "pseudomode/errors.hpp"
#include "pseudomode/series.hpp"

namespace pseudomode {

inline constexpr int kDefaultTruncation = 24;

/// psi_{-1}..psi_n about s = 0, each of length K+1.
struct PhaseSeries {
  int K = 0;
  std::vector<TaylorSeries> psi;  // psi[m + 1]

  int order() const noexcept { return static_cast<int>(psi.size()) - 2; }
  const TaylorSeries& operator[](int m) const { return psi.at(static_cast<std::size_t>(m + 1)); }
};

namespace detail {

/// sqrt(w) and psi'_m (m = -1..n) as series about x0, for the target value sigma.
struct LocalPhase {
  TaylorSeries root;
  std::vector<TaylorSeries> d;  // d[m + 1]
};

inline LocalPhase local_phase(const CoefficientField& cf, double x0, cplx sigma, cplx branch, int n,
                              int length) {
  if (length - 1 > cf.jet_order_max()) {
    std::ostringstream m;
    m << "series length " << length << " needs coefficient jets of order " << length - 1
      << ", only " << cf.jet_order_max() << " available";
    throw PreconditionError(m.str());
  }
  const auto j = cf.jets(x0, length - 1);
  const TaylorSeries w = (sigma - j.c) / j.a + (j.b * j.b) / (4.0 * j.a * j.a);
  LocalPhase out;
  out.root = sqrt(w, branch);
  out.d.reserve(static_cast<std::size_t>(n + 2));
  out.d.push_back(I * (out.root - j.b / (2.0 * j.a)));
  // 2 a psi'_{-1} + i b = 2 i a sqrt(w)
  const TaylorSeries denom = 2.0 * I * (j.a * out.root);
  if (std::abs(denom[0]) == 0.0) throw NotInOmegaError("transport denominator vanishes at the centre");
  for (int m = 0; m <= n; ++m) {
    TaylorSeries acc = out.d[static_cast<std::size_t>(m)].derivative();  // psi''_{m-1}
    for (int i = 0; i <= m - 1; ++i) acc += out.d[static_cast<std::size_t>(i + 1)] * out.d[static_cast<std::size_t>(m - i)];
    out.d.push_back(-1.0 * (j.a * acc) / denom);
  }
  return out;
}

inline PhaseSeries phase_series(const CoefficientField& cf, double x0, cplx sigma, cplx branch, int n,
                                int K) {
  if (K < 2) throw PreconditionError("truncation degree K must be at least 2");
  if (n < -1) throw PreconditionError("expansion order n must be >= 0");
  const LocalPhase lp = local_phase(cf, x0, sigma, branch, n, K + n + 2);
  PhaseSeries ps;
  ps.K = K;
  for (const auto& d : lp.d) ps.psi.push_back(d.integral().truncated(static_cast<std::size_t>(K + 1)));
  return ps;
}

}  // namespace detail

/// phi_0..phi_{n+1} of the stored series, as series of length K-1 about the centre.
inline std::vector<TaylorSeries> phase_identity_defects(const CoefficientField& cf, double x0, cplx sigma,
                                                        const PhaseSeries& ps) {
  const int n = ps.order();
  const int K = ps.K;
  const auto j = cf.jets(x0, K);
  const std::size_t len = static_cast<std::size_t>(K - 1);
  std::vector<TaylorSeries> d1, d2;
  for (const auto& p : ps.psi) {
    d1.push_back(p.derivative());
    d2.push_back(p.derivative().derivative());
  }
  auto D1 = [&](int m) { return (m >= -1 && m <= n) ? d1[m + 1].truncated(len) : TaylorSeries(len); };
  auto D2 = [&](int m) { return (m >= -1 && m <= n) ? d2[m + 1].truncated(len) : TaylorSeries(len); };
  std::vector<TaylorSeries> phi;
  for (int p = 0; p <= n + 1; ++p) {
    TaylorSeries acc = D2(p - 2);
    for (int i = -1; i <= p - 1; ++i) acc += D1(i) * D1(p - 2 - i);
    TaylorSeries ph = -1.0 * (j.a.truncated(len) * acc) - I * (j.b.truncated(len) * D1(p - 1));
    if (p == 0) ph += (j.c.truncated(len) - sigma);
    phi.push_back(ph);
  }
  return phi;
}

/// Phase functions continued along the real axis by re-centred Taylor patches.
/// Patch j sits at s_j = j*spacing and is used for |s - s_j| <= spacing/2; the
/// square-root branch of each patch is fixed by continuity from its neighbour.
class PhaseChart {
 public:
  struct Point {
    std::vector<cplx> psi, d1, d2;  // index m + 1
  };

  PhaseChart(const CoefficientField& cf, double x0, cplx sigma, cplx branch, int n, int K,
             double reach_left, double reach_right, double spacing = 1.0 / 16.0, double tail_tol = 1e-10)
      : x0_(x0), sigma_(sigma), n_(n), K_(K), spacing_(spacing) {
    if (!(spacing > 0.0)) throw PreconditionError("patch spacing must be positive");
    const int length = K + n + 2;
    series_ = detail::phase_series(cf, x0, sigma, branch, n, K);

    const double half = 0.5 * spacing;
    auto acceptable = [&](const detail::LocalPhase& lp) {
      auto ok = [&](const TaylorSeries& s) {
        for (const auto& c : s.coefficients())
          if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
        return s.tail_estimate(half) <= tail_tol * std::max(1.0, std::abs(s[0]));
      };
      if (!ok(lp.root)) return false;
      for (const auto& d : lp.d)
        if (!ok(d)) return false;
      return true;
    };

    Patch centre = make_patch(detail::local_phase(cf, x0, sigma, branch, n, length));
    centre.base.assign(static_cast<std::size_t>(n + 2), cplx{});
    std::vector<Patch> right{centre}, left;
    for (int dir : {+1, -1}) {
      std::vector<Patch>& side = dir > 0 ? right : left;
      const double reach = dir > 0 ? reach_right : reach_left;
      for (int j = 1;; ++j) {
        const double sj = dir * j * spacing;
        if (std::abs(sj) > reach + 1e-12) break;
        const Patch& prev = side.empty() ? centre : side.back();
        const cplx hint = prev.root.evaluate(dir * spacing);
        detail::LocalPhase lp;
        try {
          lp = detail::local_phase(cf, x0 + sj, sigma, hint, n, length);
        } catch (const Error&) {
          break;
        }
        if (!acceptable(lp)) break;
        Patch next = make_patch(std::move(lp));
        next.centre = sj;
        next.base.resize(static_cast<std::size_t>(n + 2));
        for (int m = -1; m <= n; ++m) {
          const std::size_t k = static_cast<std::size_t>(m + 1);
          next.base[k] = prev.base[k] + prev.integ[k].evaluate(dir * half) - next.integ[k].evaluate(-dir * half);
        }
        side.push_back(std::move(next));
      }
    }
    jmin_ = -static_cast<int>(left.size());
    patches_.reserve(left.size() + right.size());
    for (auto it = left.rbegin(); it != left.rend(); ++it) patches_.push_back(std::move(*it));
    for (auto& p : right) patches_.push_back(std::move(p));
    const int jmax = jmin_ + static_cast<int>(patches_.size()) - 1;
    s_lo_ = std::max(-reach_left, jmin_ * spacing - half);
    s_hi_ = std::min(reach_right, jmax * spacing + half);
  }

  double origin() const noexcept { return x0_; }
  cplx target() const noexcept { return sigma_; }
  int order() const noexcept { return n_; }
  int truncation() const noexcept { return K_; }
  double s_lo() const noexcept { return s_lo_; }
  double s_hi() const noexcept { return s_hi_; }
  std::size_t patch_count() const noexcept { return patches_.size(); }
  const PhaseSeries& centre_series() const noexcept { return series_; }

  void evaluate(double s, Point& out) const {
    const Patch& p = patch_for(s);
    const double t = s - p.centre;
    const std::size_t count = static_cast<std::size_t>(n_ + 2);
    out.psi.resize(count);
    out.d1.resize(count);
    out.d2.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
      out.psi[k] = p.base[k] + p.integ[k].evaluate(t);
      out.d1[k] = p.d[k].evaluate(t);
      out.d2[k] = p.dd[k].evaluate(t);
    }
  }

  cplx psi_minus1(double s) const {
    const Patch& p = patch_for(s);
    return p.base[0] + p.integ[0].evaluate(s - p.centre);
  }

 private:
  struct Patch {
    double centre = 0.0;
    TaylorSeries root;
    std::vector<TaylorSeries> d, dd, integ;
    std::vector<cplx> base;
  };

  Patch make_patch(detail::LocalPhase lp) const {
    Patch p;
    p.root = std::move(lp.root);
    for (auto& d : lp.d) {
      p.dd.push_back(d.derivative());
      p.integ.push_back(d.integral());
      p.d.push_back(std::move(d));
    }
    return p;
  }

  const Patch& patch_for(double s) const {
    if (s < s_lo_ - 1e-12 || s > s_hi_ + 1e-12) {
      std::ostringstream m;
      m << "offset " << s << " outside phase chart [" << s_lo_ << ", " << s_hi_ << "]";
      throw DomainError(m.str());
    }
    long j = std::lround(s / spacing_);
    j = std::clamp<long>(j, jmin_, jmin_ + static_cast<long>(patches_.size()) - 1);
    const Patch& p = patches_[static_cast<std::size_t>(j - jmin_)];
    return p;
  }

  double x0_;
  cplx sigma_;
  int n_, K_;
  double spacing_;
  PhaseSeries series_;
  std::vector<Patch> patches_;
  int jmin_ = 0;
  double s_lo_ = 0.0, s_hi_ = 0.0;
};

struct CutoffRequest {
  double delta0 = 4.0;      // first rung of the ladder delta0 * 2^-j
  int max_halvings = 40;
  int probes = 256;         // per side
  double tail_tol = 1e-10;
  double patch_spacing = 1.0 / 16.0;
};

namespace detail {

// Largest ladder rung delta <= cap such that accept(delta) holds.
template <class Accept>
double ladder_search(const CutoffRequest& req, double cap, Accept accept) {
  double d = req.delta0;
  for (int j = 0; j <= req.max_halvings; ++j, d *= 0.5) {
    if (d > cap) continue;
    if (accept(d)) return d;
  }
  return 0.0;
}

}  // namespace detail

/// Ladder search on the centre series alone: F(s) = -2 Re psi_{-1}(s)/s^2 must stay
/// above F(0)/2 on [-delta, delta] and the truncation tail below the tolerance.
inline CutoffSpec choose_delta(const PhaseSeries& ps, const CutoffRequest& req = {}) {
  const TaylorSeries& e = ps[-1];
  const double f0 = -2.0 * e.at(2).real();
  if (!(f0 > 0.0)) throw NotInOmegaError("Re psi_{-1} has no quadratic decay: point not in Omega");
  const double d = detail::ladder_search(req, std::numeric_limits<double>::infinity(), [&](double delta) {
    if (e.tail_estimate(delta) >= req.tail_tol) return false;
    for (int k = 1; k <= req.probes; ++k) {
      const double s = delta * k / req.probes;
      for (double sg : {s, -s})
        if (-2.0 * e.evaluate(sg).real() / (s * s) < 0.5 * f0) return false;
    }
    return true;
  });
  if (!(d > 0.0)) throw NotInOmegaError("no cutoff radius on the ladder keeps the phase decaying (try larger K)");
  return CutoffSpec(d);
}

/// Ladder search on a chart. Two-sided: F(s) = -2 Re psi_{-1}(s)/s^2 >= F(0)/2 on
/// [-delta, delta]. One-sided: F(s) = -2 Re psi_{-1}(s)/s >= F(0)/2 on (0, delta].
inline CutoffSpec choose_delta(const PhaseChart& chart, const CutoffRequest& req, bool one_sided) {
  const TaylorSeries& e = chart.centre_series()[-1];
  const double f0 = one_sided ? -2.0 * e.at(1).real() : -2.0 * e.at(2).real();
  if (!(f0 > 0.0)) throw NotInOmegaError("phase does not decay away from the centre: point not in Omega");
  const double cap = one_sided ? chart.s_hi() : std::min(-chart.s_lo(), chart.s_hi());
  const double d = detail::ladder_search(req, cap, [&](double delta) {
    for (int k = 1; k <= req.probes; ++k) {
      const double s = delta * k / req.probes;
      if (one_sided) {
        if (-2.0 * chart.psi_minus1(s).real() / s < 0.5 * f0) return false;
      } else {
        for (double sg : {s, -s})
          if (-2.0 * chart.psi_minus1(sg).real() / (s * s) < 0.5 * f0) return false;
      }
    }
    return true;
  });
  if (!(d > 0.0)) throw NotInOmegaError("no cutoff radius on the ladder keeps the phase decaying");
  return CutoffSpec(d);
}

}  // namespace pseudomode
