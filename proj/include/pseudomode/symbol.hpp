#pragma once

// Principal symbol sigma(u, xi) = a(u) xi^2 + b(u) xi + c(u) and the
// phase-space quantities built from it.

#include <cmath>
#include <cstddef>
#include <queue>
#include <sstream>
#include <utility>
#include <vector>

#include "pseudomode/coefficients.hpp"
#include "pseudomode/errors.hpp"

namespace pseudomode {

struct PhasePoint {
  double u = 0.0;
  double xi = 0.0;
};

struct SymbolDerivatives {
  cplx sigma_u;
  cplx sigma_xi;
};

inline cplx principal_symbol(const CoefficientField& cf, const PhasePoint& p) {
  const auto v = cf.values(p.u);
  return (v.a * p.xi + v.b) * p.xi + v.c;
}

/// Symbol at a complex covector, used for boundary modes.
inline cplx principal_symbol(const CoefficientField& cf, double u, cplx xi) {
  const auto v = cf.values(u);
  return (v.a * xi + v.b) * xi + v.c;
}

inline SymbolDerivatives symbol_derivatives(const CoefficientField& cf, const PhasePoint& p) {
  const auto j = cf.jets(p.u, 1);
  const cplx su = (j.a[1] * p.xi + j.b[1]) * p.xi + j.c[1];
  const cplx sx = 2.0 * j.a[0] * p.xi + j.b[0];
  return {su, sx};
}

/// {Re sigma, Im sigma} in the (u, xi) variables.
inline double poisson_bracket(const SymbolDerivatives& d) {
  return d.sigma_u.real() * d.sigma_xi.imag() - d.sigma_xi.real() * d.sigma_u.imag();
}

inline double poisson_bracket(const CoefficientField& cf, const PhasePoint& p) {
  return poisson_bracket(symbol_derivatives(cf, p));
}

/// k = -i sigma_u / sigma_xi. The real part is written as -bracket/|sigma_xi|^2
/// so that Re k < 0 exactly when the bracket is positive.
inline cplx twist_curvature(const SymbolDerivatives& d) {
  const double n2 = std::norm(d.sigma_xi);
  if (!(n2 > 0.0)) throw SingularPointError("d(sigma)/d(xi) vanishes: turning point of the symbol");
  const cplx x = d.sigma_u * std::conj(d.sigma_xi);
  return cplx{-poisson_bracket(d), -x.real()} / n2;
}

inline cplx twist_curvature(const CoefficientField& cf, const PhasePoint& p) {
  return twist_curvature(symbol_derivatives(cf, p));
}

inline bool in_omega(const CoefficientField& cf, const PhasePoint& p) {
  return poisson_bracket(cf, p) > 0.0;
}

struct RegionMask {
  std::vector<double> u_grid;
  std::vector<double> xi_grid;
  std::vector<std::vector<double>> bracket;  // [i_u][j_xi]
  std::vector<std::vector<bool>> in_omega;

  std::size_t rows() const noexcept { return u_grid.size(); }
  std::size_t cols() const noexcept { return xi_grid.size(); }
  std::size_t count() const {
    std::size_t n = 0;
    for (const auto& row : in_omega)
      for (bool b : row) n += b;
    return n;
  }
};

namespace detail {
inline void require_increasing(const std::vector<double>& g, const char* name) {
  if (g.empty()) throw PreconditionError(std::string(name) + " must be nonempty");
  for (std::size_t k = 1; k < g.size(); ++k)
    if (!(g[k] > g[k - 1])) throw PreconditionError(std::string(name) + " must be strictly increasing");
}
}  // namespace detail

inline RegionMask region_mask(const CoefficientField& cf, std::vector<double> u_grid,
                              std::vector<double> xi_grid) {
  detail::require_increasing(u_grid, "u_grid");
  detail::require_increasing(xi_grid, "xi_grid");
  cf.require(u_grid.front());
  cf.require(u_grid.back());
  RegionMask m;
  m.bracket.assign(u_grid.size(), std::vector<double>(xi_grid.size(), 0.0));
  m.in_omega.assign(u_grid.size(), std::vector<bool>(xi_grid.size(), false));
  for (std::size_t i = 0; i < u_grid.size(); ++i) {
    const auto j1 = cf.jets(u_grid[i], 1);
    for (std::size_t j = 0; j < xi_grid.size(); ++j) {
      const double xi = xi_grid[j];
      const SymbolDerivatives d{(j1.a[1] * xi + j1.b[1]) * xi + j1.c[1], 2.0 * j1.a[0] * xi + j1.b[0]};
      const double br = poisson_bracket(d);
      m.bracket[i][j] = br;
      m.in_omega[i][j] = br > 0.0;
    }
  }
  m.u_grid = std::move(u_grid);
  m.xi_grid = std::move(xi_grid);
  return m;
}

struct ImagePoint {
  double u;
  double xi;
  cplx sigma;
};

/// sigma over the in-Omega grid points, row-major in (u, xi).
inline std::vector<ImagePoint> symbol_image(const RegionMask& mask, const CoefficientField& cf) {
  std::vector<ImagePoint> out;
  for (std::size_t i = 0; i < mask.rows(); ++i)
    for (std::size_t j = 0; j < mask.cols(); ++j)
      if (mask.in_omega[i][j]) {
        const PhasePoint p{mask.u_grid[i], mask.xi_grid[j]};
        out.push_back({p.u, p.xi, principal_symbol(cf, p)});
      }
  return out;
}

/// Number of 8-connected clusters of in-Omega grid points with |sigma - z| < tol.
inline int multiplicity(const CoefficientField& cf, cplx z, const RegionMask& mask, double tol) {
  if (!(tol > 0.0)) throw PreconditionError("multiplicity tolerance must be positive");
  const std::size_t nu = mask.rows(), nx = mask.cols();
  std::vector<std::vector<char>> hit(nu, std::vector<char>(nx, 0));
  for (std::size_t i = 0; i < nu; ++i)
    for (std::size_t j = 0; j < nx; ++j)
      if (mask.in_omega[i][j])
        hit[i][j] = std::abs(principal_symbol(cf, {mask.u_grid[i], mask.xi_grid[j]}) - z) < tol;

  int clusters = 0;
  std::vector<std::vector<char>> seen(nu, std::vector<char>(nx, 0));
  for (std::size_t i0 = 0; i0 < nu; ++i0) {
    for (std::size_t j0 = 0; j0 < nx; ++j0) {
      if (!hit[i0][j0] || seen[i0][j0]) continue;
      ++clusters;
      std::queue<std::pair<std::size_t, std::size_t>> q;
      q.emplace(i0, j0);
      seen[i0][j0] = 1;
      while (!q.empty()) {
        const auto [i, j] = q.front();
        q.pop();
        for (int di = -1; di <= 1; ++di) {
          for (int dj = -1; dj <= 1; ++dj) {
            const long ii = static_cast<long>(i) + di, jj = static_cast<long>(j) + dj;
            if (ii < 0 || jj < 0 || ii >= static_cast<long>(nu) || jj >= static_cast<long>(nx)) continue;
            if (hit[ii][jj] && !seen[ii][jj]) {
              seen[ii][jj] = 1;
              q.emplace(ii, jj);
            }
          }
        }
      }
    }
  }
  return clusters;
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  if (n == 1) {
    g[0] = lo;
    return g;
  }
  for (std::size_t k = 0; k < n; ++k) g[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  return g;
}

}  // namespace pseudomode
