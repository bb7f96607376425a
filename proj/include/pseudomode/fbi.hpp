#pragma once

// Synthesis transforms over phase space: normalized JWKB kernels, their
// Gaussian approximations and the distorted FBI transform with frozen kappa.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <vector>

#include "pseudomode/coefficients.hpp"
#include "pseudomode/errors.hpp"
#include "pseudomode/linalg.hpp"
#include "pseudomode/quadrature.hpp"
#include "pseudomode/symbol.hpp"
#include "pseudomode/wkb.hpp"

namespace pseudomode {

// log(1e16): kernels are truncated where |g| drops below 1e-16 of its peak.
inline constexpr double kKernelTail = 36.8413614879047;

struct PhaseSpaceGrid {
  std::vector<double> u, xi, weight;          // one entry per point
  std::vector<std::size_t> u_index, xi_index;  // position in the product rectangle
  std::vector<double> u_nodes, xi_nodes;

  std::size_t size() const noexcept { return u.size(); }
  double total_weight() const {
    double s = 0.0;
    for (double w : weight) s += w;
    return s;
  }
  RealVector weights() const { return Eigen::Map<const RealVector>(weight.data(), weight.size()); }
};

namespace detail {

inline void push_point(PhaseSpaceGrid& g, std::size_t i, std::size_t j, double w) {
  g.u.push_back(g.u_nodes[i]);
  g.xi.push_back(g.xi_nodes[j]);
  g.weight.push_back(w);
  g.u_index.push_back(i);
  g.xi_index.push_back(j);
}

}  // namespace detail

/// Product trapezoid rule on a rectangle, keeping only the nodes inside Omega.
inline PhaseSpaceGrid phase_space_grid(const CoefficientField& cf, std::vector<double> u_nodes,
                                       std::vector<double> xi_nodes) {
  if (u_nodes.empty() || xi_nodes.empty()) throw PreconditionError("phase-space grid needs nodes on both axes");
  PhaseSpaceGrid g;
  const auto wu = u_nodes.size() > 1 ? trapezoid_weights(u_nodes) : std::vector<double>{1.0};
  const auto wx = xi_nodes.size() > 1 ? trapezoid_weights(xi_nodes) : std::vector<double>{1.0};
  g.u_nodes = std::move(u_nodes);
  g.xi_nodes = std::move(xi_nodes);
  for (std::size_t i = 0; i < g.u_nodes.size(); ++i)
    for (std::size_t j = 0; j < g.xi_nodes.size(); ++j)
      if (in_omega(cf, {g.u_nodes[i], g.xi_nodes[j]})) detail::push_point(g, i, j, wu[i] * wx[j]);
  if (g.size() == 0) throw NotInOmegaError("phase-space rectangle does not meet Omega");
  return g;
}

/// Grid on u x (0, xi_max] with xi = zeta^2 and the trapezoid rule in zeta,
/// which absorbs the square-root behaviour of the integrands at xi = 0.
inline PhaseSpaceGrid half_plane_grid(std::vector<double> u_nodes, double xi_max, std::size_t n_zeta) {
  if (u_nodes.empty() || n_zeta < 2) throw PreconditionError("half-plane grid needs u nodes and n_zeta >= 2");
  if (!(xi_max > 0.0)) throw PreconditionError("xi_max must be positive");
  PhaseSpaceGrid g;
  const auto wu = u_nodes.size() > 1 ? trapezoid_weights(u_nodes) : std::vector<double>{1.0};
  const double zmax = std::sqrt(xi_max), dz = zmax / static_cast<double>(n_zeta);
  std::vector<double> wz(n_zeta);
  for (std::size_t j = 0; j < n_zeta; ++j) {
    const double z = dz * static_cast<double>(j + 1);
    g.xi_nodes.push_back(z * z);
    wz[j] = 2.0 * z * dz * (j + 1 == n_zeta ? 0.5 : 1.0);
  }
  g.u_nodes = std::move(u_nodes);
  for (std::size_t i = 0; i < g.u_nodes.size(); ++i)
    for (std::size_t j = 0; j < n_zeta; ++j) detail::push_point(g, i, j, wu[i] * wz[j]);
  return g;
}

enum class KernelKind { full_jwkb, gaussian, distorted_frozen };

inline const char* to_string(KernelKind k) {
  switch (k) {
    case KernelKind::full_jwkb: return "full-jwkb";
    case KernelKind::gaussian: return "gaussian";
    case KernelKind::distorted_frozen: return "distorted-frozen";
  }
  return "unknown";
}

struct TransformKernel {
  KernelKind kind = KernelKind::gaussian;
  double h = 0.0;
  int n = 0;                                        // full_jwkb
  std::shared_ptr<const CoefficientField> field;   // full_jwkb, gaussian
  cplx kappa;                                       // distorted_frozen

  static TransformKernel jwkb(const CoefficientField& cf, double h, int n) {
    return {KernelKind::full_jwkb, h, n, std::make_shared<const CoefficientField>(cf), {}};
  }
  static TransformKernel gaussian(const CoefficientField& cf, double h) {
    return {KernelKind::gaussian, h, 0, std::make_shared<const CoefficientField>(cf), {}};
  }
  static TransformKernel distorted(cplx kappa, double h) {
    return {KernelKind::distorted_frozen, h, 0, nullptr, kappa};
  }
};

/// Quadrature realization of phi -> scale * sum_j w_j phi_j e_j with banded
/// columns. Columns may share one band when their kernels are translates.
struct SynthesisMatrix {
  struct Column {
    std::size_t first = 0;
    std::size_t band = 0;
  };

  std::vector<double> x, x_weights;
  PhaseSpaceGrid grid;
  double scale = 1.0;
  std::vector<Column> columns;
  std::vector<std::vector<cplx>> bands;  // unit-norm kernel samples

  std::size_t rows() const noexcept { return x.size(); }
  std::size_t cols() const noexcept { return columns.size(); }
  RealVector row_weights() const { return Eigen::Map<const RealVector>(x_weights.data(), x_weights.size()); }

  Vector synthesize(const Vector& phi) const {
    if (static_cast<std::size_t>(phi.size()) != cols()) throw PreconditionError("phi has the wrong length");
    Vector out = Vector::Zero(static_cast<Eigen::Index>(rows()));
    for (std::size_t j = 0; j < cols(); ++j) {
      const cplx c = scale * grid.weight[j] * phi(static_cast<Eigen::Index>(j));
      if (c == cplx(0.0)) continue;
      const auto& b = bands[columns[j].band];
      const std::size_t f = columns[j].first;
      for (std::size_t k = 0; k < b.size(); ++k) out(static_cast<Eigen::Index>(f + k)) += c * b[k];
    }
    return out;
  }

  /// Adjoint of synthesize for the weighted inner products on both sides.
  Vector analyze(const Vector& f) const {
    if (static_cast<std::size_t>(f.size()) != rows()) throw PreconditionError("f has the wrong length");
    Vector out(static_cast<Eigen::Index>(cols()));
    for (std::size_t j = 0; j < cols(); ++j) {
      const auto& b = bands[columns[j].band];
      const std::size_t first = columns[j].first;
      cplx s = 0.0;
      for (std::size_t k = 0; k < b.size(); ++k)
        s += x_weights[first + k] * std::conj(b[k]) * f(static_cast<Eigen::Index>(first + k));
      out(static_cast<Eigen::Index>(j)) = scale * s;
    }
    return out;
  }

  /// Unit-norm kernel of column j on the full x-grid.
  Vector kernel(std::size_t j) const {
    Vector e = Vector::Zero(static_cast<Eigen::Index>(rows()));
    const auto& b = bands[columns.at(j).band];
    for (std::size_t k = 0; k < b.size(); ++k) e(static_cast<Eigen::Index>(columns[j].first + k)) = b[k];
    return e;
  }

  /// Dense matrix M with synthesize(phi) = M phi.
  Matrix dense() const {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols()));
    for (std::size_t j = 0; j < cols(); ++j) m.col(static_cast<Eigen::Index>(j)) = scale * grid.weight[j] * kernel(j);
    return m;
  }
};

namespace detail {

inline bool uniform_spacing(const std::vector<double>& x, double& dx) {
  if (x.size() < 2) return false;
  dx = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
  for (std::size_t k = 0; k + 1 < x.size(); ++k)
    if (std::abs((x[k + 1] - x[k]) - dx) > 1e-9 * dx) return false;
  return true;
}

/// Index range of x-nodes within [lo, hi].
inline std::pair<std::size_t, std::size_t> node_range(const std::vector<double>& x, double lo, double hi) {
  const auto a = std::lower_bound(x.begin(), x.end(), lo);
  const auto b = std::upper_bound(x.begin(), x.end(), hi);
  return {static_cast<std::size_t>(a - x.begin()), static_cast<std::size_t>(b - x.begin())};
}

/// Samples of a kernel on x[first, last), normalized in the discrete norm.
inline std::vector<cplx> normalized_band(const std::vector<double>& x, const std::vector<double>& w,
                                         std::size_t first, std::size_t last,
                                         const std::function<cplx(double)>& g) {
  std::vector<cplx> b(last - first);
  double s = 0.0;
  for (std::size_t k = first; k < last; ++k) {
    b[k - first] = g(x[k]);
    s += w[k] * std::norm(b[k - first]);
  }
  if (!(s > 0.0) || !std::isfinite(s)) throw DegenerateError("kernel vanishes on the x-grid");
  const double inv = 1.0 / std::sqrt(s);
  for (auto& v : b) v *= inv;
  return b;
}

struct KernelShape {
  std::function<cplx(double)> g;  // kernel as a function of x
  double radius;                  // support half-width around u
  bool translate_invariant;       // g depends on x - u only, for fixed xi
};

inline KernelShape kernel_shape(const TransformKernel& k, double u, double xi) {
  const double h = k.h;
  switch (k.kind) {
    case KernelKind::distorted_frozen: {
      const cplx kappa = k.kappa;
      const double r = std::sqrt(2.0 * kKernelTail * h * xi / (1.0 / kappa).real());
      return {[=](double x) {
                const double s = x - u;
                return std::exp(I * xi * s / h - s * s / (2.0 * h * kappa * xi));
              },
              r, true};
    }
    case KernelKind::gaussian: {
      const cplx kk = twist_curvature(*k.field, {u, xi});
      if (!(kk.real() < 0.0)) throw NotInOmegaError("Re k >= 0: Gaussian kernel is not localized");
      const double r = std::sqrt(2.0 * kKernelTail * h / -kk.real());
      return {[=](double x) {
                const double s = x - u;
                return std::exp((I * xi * s + 0.5 * kk * s * s) / h);
              },
              r, false};
    }
    case KernelKind::full_jwkb: {
      const Pseudomode mode = assemble_mode(*k.field, {u, xi}, h, k.n);
      const auto ev = mode.evaluator;
      return {[ev](double x) { return ev(x).f; }, mode.cutoff.delta, false};
    }
  }
  throw PreconditionError("unknown kernel kind");
}

}  // namespace detail

/// Synthesis matrix for `kernel` on phase-space `grid` and spatial nodes `x`.
inline SynthesisMatrix synthesis_matrix(const TransformKernel& kernel, const PhaseSpaceGrid& grid,
                                        std::vector<double> x) {
  if (grid.size() == 0) throw PreconditionError("phase-space grid is empty");
  if (x.size() < 2) throw PreconditionError("x-grid needs at least two nodes");
  if (!(kernel.h > 0.0)) throw PreconditionError("h must be positive");
  if (kernel.kind == KernelKind::distorted_frozen) {
    if (!(kernel.kappa.real() > 0.0)) throw PreconditionError("distorted FBI needs Re kappa > 0");
    for (double xi : grid.xi)
      if (!(xi > 0.0)) throw PreconditionError("distorted FBI is defined for xi > 0 only");
  } else if (!kernel.field) {
    throw PreconditionError("kernel needs a coefficient field");
  }
  SynthesisMatrix s;
  s.x_weights = trapezoid_weights(x);
  s.x = std::move(x);
  s.grid = grid;
  s.scale = kernel.kind == KernelKind::distorted_frozen ? 1.0 / std::sqrt(kernel.h) : 1.0;
  double dx = 0.0;
  const bool uniform = detail::uniform_spacing(s.x, dx);
  std::map<std::size_t, std::size_t> shared;  // xi index -> band, for interior translates
  s.columns.resize(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double u = grid.u[j], xi = grid.xi[j];
    const auto shape = detail::kernel_shape(kernel, u, xi);
    auto [first, last] = detail::node_range(s.x, u - shape.radius, u + shape.radius);
    if (first >= last) throw DegenerateError("kernel support misses the x-grid");
    bool reuse = false;
    if (uniform && shape.translate_invariant) {
      const double pos = (u - s.x.front()) / dx;
      const double centre = std::round(pos);
      const auto half = static_cast<std::ptrdiff_t>(std::floor(shape.radius / dx));
      const auto c = static_cast<std::ptrdiff_t>(centre);
      if (std::abs(pos - centre) < 1e-9 && c - half >= 0 &&
          c + half < static_cast<std::ptrdiff_t>(s.x.size())) {
        first = static_cast<std::size_t>(c - half);
        last = static_cast<std::size_t>(c + half + 1);
        reuse = true;
      }
    }
    if (reuse) {
      const auto it = shared.find(grid.xi_index[j]);
      if (it != shared.end()) {
        s.columns[j] = {first, it->second};
        continue;
      }
    }
    s.bands.push_back(detail::normalized_band(s.x, s.x_weights, first, last, shape.g));
    s.columns[j] = {first, s.bands.size() - 1};
    if (reuse) shared[grid.xi_index[j]] = s.bands.size() - 1;
  }
  return s;
}

/// Distorted FBI transform h^{-1/2} sum w phi g~/||g~|| with frozen kappa.
inline SynthesisMatrix distorted_fbi(cplx kappa, double h, const PhaseSpaceGrid& grid, std::vector<double> x) {
  return synthesis_matrix(TransformKernel::distorted(kappa, h), grid, std::move(x));
}

/// ||g~_{h,u,xi}||^2 = (pi h xi / Re(1/kappa))^{1/2}.
inline double distorted_norm_squared(cplx kappa, double h, double xi) {
  return std::sqrt(std::numbers::pi * h * xi / (1.0 / kappa).real());
}

/// Weighted operator norm (C^N, w_grid) -> (C^m, w_x) by power iteration.
inline PowerIterationResult operator_norm(const SynthesisMatrix& s, int max_iter = 50, double stagnation = 1e-10) {
  Vector start(static_cast<Eigen::Index>(s.cols()));
  for (std::size_t j = 0; j < s.cols(); ++j)
    start(static_cast<Eigen::Index>(j)) = cplx(1.0 + 0.5 * std::sin(1.7 * static_cast<double>(j)), 0.3 * std::cos(0.9 * static_cast<double>(j)));
  return power_norm([&](const Vector& v) { return s.synthesize(v); },
                    [&](const Vector& v) { return s.analyze(v); },
                    s.grid.weights(), start, max_iter, stagnation);
}

/// ||E* f|| / ||f|| in the weighted norms.
inline double analysis_ratio(const SynthesisMatrix& s, const Vector& f) {
  return weighted_norm(s.grid.weights(), s.analyze(f)) / weighted_norm(s.row_weights(), f);
}

struct FbiGrids {
  PhaseSpaceGrid grid;
  std::vector<double> x;
};

/// Grids for the operator norm on a window in the coordinates x = h^{2/3} X,
/// xi = h^{1/3} eta, in which the distorted kernel does not depend on h.
/// `resolution` multiplies every node density.
inline FbiGrids distorted_norm_grids(cplx kappa, double h, double window = 12.0, double resolution = 1.0) {
  if (!(kappa.real() > 0.0)) throw PreconditionError("distorted FBI needs Re kappa > 0");
  if (!(resolution > 0.0) || !(window > 0.0)) throw PreconditionError("window and resolution must be positive");
  const double sx = std::pow(h, 2.0 / 3.0), sxi = std::pow(h, 1.0 / 3.0);
  const double eta_max = 10.0 / std::cbrt(kappa.real());
  const double reach = std::sqrt(2.0 * kKernelTail * eta_max / (1.0 / kappa).real());
  const double dX = 0.1 / resolution;
  const int stride = 2;
  const auto nu = static_cast<std::size_t>(std::llround(2.0 * window / (stride * dX))) + 1;
  const auto pad = static_cast<std::size_t>(std::ceil(reach / dX)) + 1;
  const std::size_t nx = stride * (nu - 1) + 2 * pad + 1;
  FbiGrids g;
  g.x.resize(nx);
  const double x0 = -window - static_cast<double>(pad) * dX;
  for (std::size_t k = 0; k < nx; ++k) g.x[k] = sx * (x0 + dX * static_cast<double>(k));
  std::vector<double> u(nu);
  for (std::size_t i = 0; i < nu; ++i) u[i] = g.x[pad + stride * i];
  g.grid = half_plane_grid(std::move(u), sxi * eta_max,
                           static_cast<std::size_t>(std::llround(40.0 * resolution)));
  return g;
}

/// Smallest xi >= h s_max beyond which c6 (xi/h - s)^2 h xi exceeds 40 for all s <= s_max.
inline double analysis_xi_max(double c6, double h, double s_max) {
  const double p = std::max(h * s_max, 0.0);
  double step = std::max(std::cbrt(h / c6), 1e-3 * p + 1e-12);
  double xi = p;
  while (c6 * std::pow(xi / h - s_max, 2) * h * xi < 40.0) xi += step;
  return xi;
}

/// Physical-coordinate grids on which E* f is converged for f supported in
/// [lo, hi] with spatial frequencies |s| <= s_max.
inline FbiGrids distorted_analysis_grids(cplx kappa, double h, double lo, double hi, double s_max,
                                         double resolution = 1.0) {
  if (!(kappa.real() > 0.0)) throw PreconditionError("distorted FBI needs Re kappa > 0");
  const double c6 = kappa.real();
  const double xi_max = analysis_xi_max(c6, h, s_max);
  const double reach = std::sqrt(2.0 * kKernelTail * h * xi_max / (1.0 / kappa).real());
  const double dx = std::min(2.0 * std::numbers::pi * h / xi_max, 2.0 * std::numbers::pi / s_max) / (8.0 * resolution);
  const auto nu = static_cast<std::size_t>(std::ceil((hi - lo + 2.0 * reach) / dx)) + 1;
  const auto pad = static_cast<std::size_t>(std::ceil(reach / dx)) + 1;
  FbiGrids g;
  const double x0 = lo - reach - static_cast<double>(pad) * dx;
  g.x.resize(nu + 2 * pad);
  for (std::size_t k = 0; k < g.x.size(); ++k) g.x[k] = x0 + dx * static_cast<double>(k);
  std::vector<double> u(g.x.begin() + static_cast<std::ptrdiff_t>(pad),
                        g.x.begin() + static_cast<std::ptrdiff_t>(pad + nu));
  g.grid = half_plane_grid(std::move(u), xi_max, static_cast<std::size_t>(std::llround(96.0 * resolution)));
  return g;
}

struct KernelComparison {
  double sup_difference = 0.0;
  double u = 0.0, xi = 0.0;  // where the supremum is attained
  std::vector<double> differences;
};

/// max over grid points of ||e_{h,u,xi} - e'_{h,u,xi}|| on the nodes of the JWKB mode.
inline KernelComparison gaussian_kernel_compare(const CoefficientField& cf, const PhaseSpaceGrid& grid, double h,
                                                int n = 0) {
  if (grid.size() == 0) throw PreconditionError("phase-space grid is empty");
  KernelComparison out;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const PhasePoint p{grid.u[j], grid.xi[j]};
    const Pseudomode f = assemble_mode(cf, p, h, n);
    const cplx k = twist_curvature(cf, p);
    std::vector<cplx> g(f.x.size());
    for (std::size_t q = 0; q < f.x.size(); ++q) {
      const double s = f.x[q] - p.u;
      g[q] = std::exp((I * p.xi * s + 0.5 * k * s * s) / h);
    }
    const double nf = f.norm(), ng = weighted_norm(f.weights, g);
    std::vector<cplx> d(f.x.size());
    for (std::size_t q = 0; q < f.x.size(); ++q) d[q] = f.f[q] / nf - g[q] / ng;
    const double v = weighted_norm(f.weights, d);
    out.differences.push_back(v);
    if (v > out.sup_difference || j == 0) {
      out.sup_difference = v;
      out.u = p.u;
      out.xi = p.xi;
    }
  }
  return out;
}

/// Spatial grid resolving the Gaussian kernels of `grids` at semiclassical parameter h.
inline std::vector<double> gaussian_kernel_x_grid(const CoefficientField& cf, const std::vector<const PhaseSpaceGrid*>& grids,
                                                  double h, double per_length = 12.0) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, len = lo;
  for (const auto* g : grids)
    for (std::size_t j = 0; j < g->size(); ++j) {
      const cplx k = twist_curvature(cf, {g->u[j], g->xi[j]});
      if (!(k.real() < 0.0)) throw NotInOmegaError("Re k >= 0: Gaussian kernel is not localized");
      const double r = std::sqrt(2.0 * kKernelTail * h / -k.real());
      lo = std::min(lo, g->u[j] - r);
      hi = std::max(hi, g->u[j] + r);
      len = std::min({len, std::sqrt(h / -k.real()), 2.0 * std::numbers::pi * h / std::max(std::abs(g->xi[j]), 1e-300)});
    }
  lo = std::max(lo, cf.x_lo());
  hi = std::min(hi, cf.x_hi());
  const auto m = static_cast<std::size_t>(std::ceil((hi - lo) / (len / per_length))) + 1;
  return linspace(lo, hi, m);
}

/// ||(E'_U)* E'_V||: largest singular value of the weighted cross-Gram matrix.
inline double cross_gram_norm(const CoefficientField& cf, const PhaseSpaceGrid& U, const PhaseSpaceGrid& V, double h) {
  if (U.size() == 0 || V.size() == 0) throw PreconditionError("phase-space grids must be nonempty");
  const auto x = gaussian_kernel_x_grid(cf, {&U, &V}, h);
  const auto kernel = TransformKernel::gaussian(cf, h);
  const SynthesisMatrix su = synthesis_matrix(kernel, U, x), sv = synthesis_matrix(kernel, V, x);
  Matrix gram(static_cast<Eigen::Index>(U.size()), static_cast<Eigen::Index>(V.size()));
  for (std::size_t j = 0; j < V.size(); ++j) {
    const Vector c = su.analyze(sv.kernel(j));
    for (std::size_t i = 0; i < U.size(); ++i)
      gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::sqrt(U.weight[i]) * c(static_cast<Eigen::Index>(i)) * std::sqrt(V.weight[j]);
  }
  return largest_singular_value(gram);
}

/// Cross-Gram norm for spatially disjoint U and V.
inline double asymptotic_orthogonality(const CoefficientField& cf, const PhaseSpaceGrid& U, const PhaseSpaceGrid& V,
                                       double h) {
  if (U.size() == 0 || V.size() == 0) throw PreconditionError("phase-space grids must be nonempty");
  const auto [ulo, uhi] = std::minmax_element(U.u.begin(), U.u.end());
  const auto [vlo, vhi] = std::minmax_element(V.u.begin(), V.u.end());
  if (!(*uhi < *vlo || *vhi < *ulo)) throw PreconditionError("U and V must be spatially disjoint");
  return cross_gram_norm(cf, U, V, h);
}

namespace detail {

// Adaptive Gauss-Kronrod integral of f over [a, b] split at the given breakpoints.
inline double integrate_pieces(const std::function<double(double)>& f, std::vector<double> pts) {
  std::sort(pts.begin(), pts.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    if (!(pts[k + 1] > pts[k])) continue;
    double err = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, pts[k], pts[k + 1], 15, 1e-11, &err);
  }
  if (!std::isfinite(total)) throw NumericError("boundedness quadrature did not converge");
  return total;
}

// Breakpoints for int_0^inf of a peak at p with width w whose exponent e(x) grows beyond it.
inline std::vector<double> peak_breakpoints(double p, double w, const std::function<double(double)>& exponent) {
  std::vector<double> pts{0.0};
  double top = 0.0;
  if (p > 0.0 && w > 0.0) {
    for (double m : {-8.0, -2.0, 0.0, 2.0, 8.0})
      if (p + m * w > 0.0) pts.push_back(p + m * w);
    top = p + 8.0 * w;
  }
  double step = std::max(top, 1e-3);
  double hi = top + step;
  while (exponent(hi) < 745.0) {
    pts.push_back(hi);
    step *= 2.0;
    hi += step;
  }
  pts.push_back(hi);
  return pts;
}

}  // namespace detail

/// G(t) = int_0^inf eta^{1/2} t^{1/2} exp{-c6 (eta - 1)^2 eta t} d eta.
inline double boundedness_G(double c6, double t) {
  if (!(c6 > 0.0)) throw PreconditionError("c6 must be positive");
  if (!(t > 0.0)) throw PreconditionError("t must be positive");
  const double rt = std::sqrt(t);
  const auto e = [=](double eta) { return c6 * (eta - 1.0) * (eta - 1.0) * eta * t; };
  return detail::integrate_pieces([=](double eta) { return std::sqrt(eta) * rt * std::exp(-e(eta)); },
                                  detail::peak_breakpoints(1.0, 1.0 / std::sqrt(c6 * t), e));
}

/// F(h, s) = int_0^inf h^{-1/2} xi^{1/2} exp{-c6 (xi/h - s)^2 h xi} d xi.
inline double boundedness_profile(double c6, double h, double s) {
  if (!(c6 > 0.0)) throw PreconditionError("c6 must be positive");
  if (!(h > 0.0)) throw PreconditionError("h must be positive");
  const auto e = [=](double xi) { return c6 * (xi / h - s) * (xi / h - s) * h * xi; };
  const double p = s > 0.0 ? h * s : 0.0;
  const double w = s > 0.0 ? 1.0 / std::sqrt(c6 * s) : 0.0;
  const double pref = 1.0 / std::sqrt(h);
  auto pts = detail::peak_breakpoints(p, w, e);
  pts.push_back(std::cbrt(h / c6));
  return detail::integrate_pieces([=](double xi) { return pref * std::sqrt(xi) * std::exp(-e(xi)); }, pts);
}

/// sqrt(pi) / (3 sqrt(c6)) = F(h, 0) = lim_{t -> 0+} G(t).
inline double boundedness_limit(double c6) { return std::sqrt(std::numbers::pi) / (3.0 * std::sqrt(c6)); }

/// F(h, s) with Re kappa(xi) in place of xi.
inline double generalized_profile(const std::function<cplx(double)>& kappa, double c6, double h, double s) {
  if (!(c6 > 0.0)) throw PreconditionError("c6 must be positive");
  const auto rk = [&](double xi) { return xi > 0.0 ? kappa(xi).real() : 0.0; };
  const auto e = [=](double xi) { return c6 * (xi / h - s) * (xi / h - s) * h * rk(xi); };
  const double p = s > 0.0 ? h * s : 0.0;
  const double w = p > 0.0 ? std::sqrt(h / (c6 * rk(p))) : 0.0;
  const double pref = 1.0 / std::sqrt(h);
  auto pts = detail::peak_breakpoints(p, w, e);
  pts.push_back(std::cbrt(h / c6));
  return detail::integrate_pieces([=](double xi) { return pref * std::sqrt(rk(xi)) * std::exp(-e(xi)); }, pts);
}

struct PowerLawSandwich {
  double alpha0 = 1.0, alpha_inf = 1.0, c0 = 1.0, c_inf = 1.0;
};

struct KappaCheck {
  bool bounded = false;
  double sup = 0.0;
  std::vector<double> values;  // per (h, s) probe, h-major
};

/// Checks the power-law sandwich on probe points, then reports the supremum
/// of the generalized profile over the (h, s) probes.
inline KappaCheck generalized_kappa_check(const std::function<cplx(double)>& kappa, const PowerLawSandwich& b,
                                          double c6, const std::vector<double>& hs, const std::vector<double>& ss) {
  if (!(b.c0 > 0.0 && b.c_inf > 0.0 && b.alpha0 >= 0.0 && b.alpha_inf >= 0.0))
    throw PreconditionError("sandwich constants must be positive and exponents non-negative");
  for (int k = -60; k <= 60; ++k) {
    const double xi = std::pow(10.0, k / 20.0);
    const double rk = kappa(xi).real();
    const double al = xi <= 1.0 ? b.alpha0 : b.alpha_inf;
    const double c = xi <= 1.0 ? b.c0 : b.c_inf;
    const double p = std::pow(xi, al);
    if (!(rk >= p / c * (1.0 - 1e-12) && rk <= c * p * (1.0 + 1e-12)))
      throw PreconditionError("Re kappa violates the power-law sandwich at a probe point");
  }
  KappaCheck out;
  out.bounded = true;
  for (double h : hs)
    for (double s : ss) {
      const double v = generalized_profile(kappa, c6, h, s);
      out.values.push_back(v);
      if (!std::isfinite(v)) out.bounded = false;
      out.sup = std::max(out.sup, v);
    }
  return out;
}

}  // namespace pseudomode
