#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pseudomode/fbi.hpp"
#include "pseudomode/grid.hpp"

using namespace pseudomode;

namespace {

const cplx kKappa(1.0, 0.5);

Vector random_vector(std::size_t n, std::mt19937& rng) {
  std::normal_distribution<double> d;
  Vector v(static_cast<Eigen::Index>(n));
  for (auto& c : v) c = cplx(d(rng), d(rng));
  return v;
}

cplx weighted_dot(const RealVector& w, const Vector& a, const Vector& b) {
  return (w.array() * a.conjugate().array() * b.array()).sum();
}

// Simpson rule on [a, b] with n (even) panels.
template <class F>
double simpson(F f, double a, double b, int n) {
  const double d = (b - a) / n;
  double s = f(a) + f(b);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * d);
  return s * d / 3.0;
}

// G(t) for c6 = 1 by a plain Simpson rule, independent of the library quadrature.
double g_oracle(double t) {
  const double top = 1.0 + 12.0 / std::sqrt(t) + 40.0 / std::cbrt(t);
  const auto f = [t](double eta) { return std::sqrt(eta * t) * std::exp(-(eta - 1.0) * (eta - 1.0) * eta * t); };
  // eta = y^2 removes the square-root endpoint behaviour
  return simpson([&](double y) { return 2.0 * y * f(y * y); }, 0.0, std::sqrt(top), 20000);
}

// Band-limited test function: Gaussian packets of width 0.25, |s| <= 6.
struct Packet {
  double x0, s;
  cplx c;
};

Vector packet_samples(const std::vector<Packet>& f, const std::vector<double>& x) {
  Vector v(static_cast<Eigen::Index>(x.size()));
  for (std::size_t k = 0; k < x.size(); ++k) {
    cplx a = 0.0;
    for (const auto& p : f) {
      const double d = x[k] - p.x0;
      a += p.c * std::exp(-d * d / (2.0 * 0.0625) + I * p.s * x[k]);
    }
    v(static_cast<Eigen::Index>(k)) = a;
  }
  return v;
}

std::vector<std::vector<Packet>> random_packets(int count, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::vector<Packet>> out(static_cast<std::size_t>(count));
  for (auto& f : out)
    for (int k = 0; k < 4; ++k) f.push_back({0.3 * u(rng), 6.0 * u(rng), cplx(u(rng), u(rng))});
  return out;
}

double relative_spread(const std::vector<double>& r) {
  double lo = r[0], hi = r[0], sum = 0.0;
  for (double v : r) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  return (hi - lo) / (sum / static_cast<double>(r.size()));
}

struct LineFit {
  double slope, r2;
};

LineFit line_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
    syy += y[k] * y[k];
  }
  const double cov = n * sxy - sx * sy;
  return {cov / (n * sxx - sx * sx), cov * cov / ((n * sxx - sx * sx) * (n * syy - sy * sy))};
}

}  // namespace

TEST(PhaseSpaceGrid, ClippedToOmegaWithProductWeights) {
  const auto cf = complex_airy();
  // xi nodes -1, -0.5, 0, 0.5, 1: only xi < 0 lies in Omega
  const auto g = phase_space_grid(cf, linspace(-1.0, 1.0, 9), linspace(-1.0, 1.0, 5));
  EXPECT_EQ(g.size(), 18u);
  for (std::size_t j = 0; j < g.size(); ++j) {
    EXPECT_LT(g.xi[j], 0.0);
    EXPECT_GT(g.weight[j], 0.0);
    EXPECT_TRUE(in_omega(cf, {g.u[j], g.xi[j]}));
  }
  // u-width 2 times xi-weights 0.25 + 0.5
  EXPECT_NEAR(g.total_weight(), 1.5, 1e-14);
  EXPECT_THROW(phase_space_grid(cf, linspace(-1.0, 1.0, 3), linspace(0.1, 1.0, 3)), NotInOmegaError);
}

TEST(PhaseSpaceGrid, HalfPlaneRuleIntegratesSquareRoot) {
  const auto g = half_plane_grid(linspace(0.0, 2.0, 3), 4.0, 64);
  double s = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) s += g.weight[j] * std::sqrt(g.xi[j]);
  EXPECT_NEAR(s, 2.0 * (2.0 / 3.0) * 8.0, 2e-3);
  for (double xi : g.xi) EXPECT_GT(xi, 0.0);
  EXPECT_THROW(half_plane_grid({0.0}, -1.0, 8), PreconditionError);
}

TEST(Synthesis, KernelsHaveUnitNormAndIndicatorsReturnThem) {
  const auto cf = complex_airy();
  const double h = 0.05;
  const auto grid = phase_space_grid(cf, linspace(-0.4, 0.4, 3), linspace(-1.2, -0.6, 3));
  const auto x = gaussian_kernel_x_grid(cf, {&grid}, h);
  for (const auto& kernel : {TransformKernel::gaussian(cf, h), TransformKernel::jwkb(cf, h, 1)}) {
    const auto s = synthesis_matrix(kernel, grid, x);
    const RealVector w = s.row_weights();
    for (std::size_t j = 0; j < s.cols(); ++j) {
      EXPECT_NEAR(weighted_norm(w, s.kernel(j)), 1.0, 1e-10);
      Vector phi = Vector::Zero(static_cast<Eigen::Index>(s.cols()));
      phi(static_cast<Eigen::Index>(j)) = 1.0 / grid.weight[j];
      EXPECT_LT((s.synthesize(phi) - s.kernel(j)).norm(), 1e-14);
    }
    EXPECT_EQ(s.synthesize(Vector::Zero(static_cast<Eigen::Index>(s.cols()))).norm(), 0.0);
  }
}

TEST(Synthesis, AnalyzeIsTheWeightedAdjoint) {
  std::mt19937 rng(11);
  const auto cf = complex_airy();
  const double h = 0.05;
  const auto grid = phase_space_grid(cf, linspace(-0.4, 0.4, 4), linspace(-1.2, -0.6, 4));
  const auto x = gaussian_kernel_x_grid(cf, {&grid}, h);
  const auto fbi = distorted_norm_grids(kKappa, 0.01, 2.0);
  std::vector<SynthesisMatrix> ops{synthesis_matrix(TransformKernel::gaussian(cf, h), grid, x),
                                   synthesis_matrix(TransformKernel::jwkb(cf, h, 1), grid, x),
                                   distorted_fbi(kKappa, 0.01, fbi.grid, fbi.x)};
  for (const auto& s : ops) {
    for (int trial = 0; trial < 5; ++trial) {
      const Vector phi = random_vector(s.cols(), rng), f = random_vector(s.rows(), rng);
      const cplx lhs = weighted_dot(s.row_weights(), s.synthesize(phi), f);
      const cplx rhs = weighted_dot(s.grid.weights(), phi, s.analyze(f));
      EXPECT_LT(std::abs(lhs - rhs), 1e-12 * std::abs(lhs));
    }
    const Matrix d = s.dense();
    const Vector phi = random_vector(s.cols(), rng);
    EXPECT_LT((d * phi - s.synthesize(phi)).norm(), 1e-12 * (d * phi).norm());
  }
}

TEST(Synthesis, OrthogonalInputAnalyzesToZero) {
  const auto cf = complex_airy();
  const auto grid = phase_space_grid(cf, {-0.5}, {-1.0});
  const auto x = linspace(-3.0, 3.0, 3001);
  const auto s = synthesis_matrix(TransformKernel::gaussian(cf, 0.02), grid, x);
  Vector f = Vector::Zero(static_cast<Eigen::Index>(x.size()));
  for (std::size_t k = 0; k < x.size(); ++k)
    if (x[k] > 1.5) f(static_cast<Eigen::Index>(k)) = 1.0;  // beyond the kernel support
  EXPECT_EQ(s.analyze(f).norm(), 0.0);
}

TEST(Synthesis, L1ToL2NormIsOne) {
  // each column has unit norm, so ||E phi|| <= sum w |phi| with equality on indicators
  std::mt19937 rng(5);
  const auto cf = complex_airy();
  const double h = 0.05;
  const auto grid = phase_space_grid(cf, linspace(-0.4, 0.4, 5), linspace(-1.2, -0.6, 5));
  const auto s = synthesis_matrix(TransformKernel::gaussian(cf, h), grid, gaussian_kernel_x_grid(cf, {&grid}, h));
  for (int trial = 0; trial < 20; ++trial) {
    const Vector phi = random_vector(s.cols(), rng);
    double l1 = 0.0;
    for (std::size_t j = 0; j < s.cols(); ++j) l1 += grid.weight[j] * std::abs(phi(static_cast<Eigen::Index>(j)));
    EXPECT_LE(weighted_norm(s.row_weights(), s.synthesize(phi)), l1 * (1.0 + 1e-12));
  }
}

TEST(DistortedFbi, KernelNormMatchesClosedForm) {
  for (const cplx kappa : {cplx(1.0, 0.5), cplx(0.4, -1.0), cplx(2.0, 0.0)})
    for (double h : {0.1, 0.01})
      for (double xi : {0.05, 0.5, 2.0}) {
        const double width = std::sqrt(h * xi / (1.0 / kappa).real());
        const auto f = [&](double s) {
          return std::norm(std::exp(I * xi * s / h - s * s / (2.0 * h * kappa * xi)));
        };
        const double q = simpson(f, -12.0 * width, 12.0 * width, 4000);
        EXPECT_NEAR(q, distorted_norm_squared(kappa, h, xi), 1e-8 * q);
      }
}

TEST(DistortedFbi, RealKappaGivesStandardGaussianWindow) {
  const double h = 0.05, kappa = 0.8;
  const auto grid = half_plane_grid({0.0}, 1.0, 4);
  const auto x = linspace(-2.0, 2.0, 4001);
  const auto s = distorted_fbi(cplx(kappa), h, grid, x);
  for (std::size_t j = 0; j < s.cols(); ++j) {
    const Vector e = s.kernel(j);
    const double xi = grid.xi[j];
    const double peak = std::abs(e(2000));
    for (std::size_t k = 0; k < x.size(); k += 37) {
      const double expect = peak * std::exp(-x[k] * x[k] / (2.0 * h * kappa * xi));
      EXPECT_NEAR(std::abs(e(static_cast<Eigen::Index>(k))), expect, 1e-12);
    }
  }
}

TEST(DistortedFbi, SharedTranslatesMatchDirectKernels) {
  const double h = 0.01;
  const auto g = distorted_norm_grids(kKappa, h, 2.0);
  const auto s = distorted_fbi(kKappa, h, g.grid, g.x);
  EXPECT_LT(s.bands.size(), s.cols());
  const RealVector w = s.row_weights();
  for (std::size_t j = 0; j < s.cols(); j += 97) {
    Vector direct(static_cast<Eigen::Index>(s.rows()));
    for (std::size_t k = 0; k < s.rows(); ++k) {
      const double d = g.x[k] - g.grid.u[j];
      direct(static_cast<Eigen::Index>(k)) =
          std::exp(I * g.grid.xi[j] * d / h - d * d / (2.0 * h * kKappa * g.grid.xi[j]));
    }
    direct /= weighted_norm(w, direct);
    EXPECT_LT(weighted_norm(w, s.kernel(j) - direct), 1e-7);
  }
}

TEST(DistortedFbi, RejectsBadKappaAndLowerHalfPlane) {
  const auto grid = half_plane_grid({0.0}, 1.0, 4);
  const auto x = linspace(-1.0, 1.0, 101);
  EXPECT_THROW(distorted_fbi(cplx(0.0, 1.0), 0.1, grid, x), PreconditionError);
  EXPECT_THROW(distorted_fbi(cplx(-1.0, 0.0), 0.1, grid, x), PreconditionError);
  PhaseSpaceGrid bad = grid;
  bad.xi[0] = -0.5;
  EXPECT_THROW(distorted_fbi(kKappa, 0.1, bad, x), PreconditionError);
}

TEST(DistortedFbi, NormIsUniformInHAndNearTheContinuumValue) {
  // continuum norm^2 = 2 sqrt(pi Re kappa) sup_t G(t), with G for c6 = Re kappa;
  // for c6 = 1 this is 2 sqrt(pi) sup G
  double sup_g = 0.0;
  for (double t = 4.0; t <= 40.0; t += 0.5) sup_g = std::max(sup_g, g_oracle(t));
  const double oracle = std::sqrt(2.0 * std::sqrt(std::numbers::pi) * sup_g);
  std::vector<double> norms;
  for (double h : {1e-1, 1e-2, 1e-3}) {
    const auto g = distorted_norm_grids(cplx(1.0, 0.0), h);
    norms.push_back(operator_norm(distorted_fbi(cplx(1.0, 0.0), h, g.grid, g.x)).norm);
  }
  const auto [lo, hi] = std::minmax_element(norms.begin(), norms.end());
  EXPECT_LT((*hi - *lo) / *lo, 0.1);
  const auto g = distorted_norm_grids(cplx(1.0, 0.0), 1e-2);
  const double converged = operator_norm(distorted_fbi(cplx(1.0, 0.0), 1e-2, g.grid, g.x), 400, 1e-13).norm;
  for (double n : norms) EXPECT_LE(n, converged * (1.0 + 1e-12));
  EXPECT_LT(converged, oracle * (1.0 + 1e-3));
  EXPECT_GT(converged, oracle * 0.98);
}

TEST(DistortedFbi, NormIsConvergedUnderGridDoubling) {
  const double h = 0.1;
  std::vector<double> norms;
  for (double res : {1.0, 2.0}) {
    const auto g = distorted_norm_grids(kKappa, h, 4.0, res);
    norms.push_back(operator_norm(distorted_fbi(kKappa, h, g.grid, g.x), 400, 1e-14).norm);
  }
  EXPECT_LT(std::abs(norms[1] - norms[0]) / norms[1], 1e-4);
}

TEST(DistortedFbi, AnalysisRatioConcentrates) {
  const auto fs = random_packets(20, 7);
  std::vector<double> spreads;
  for (double h : {1e-1, 1e-2, 1e-3}) {
    const auto g = distorted_analysis_grids(kKappa, h, -1.3, 1.3, 20.0);
    const auto s = distorted_fbi(kKappa, h, g.grid, g.x);
    std::vector<double> r;
    for (const auto& f : fs) r.push_back(analysis_ratio(s, packet_samples(f, g.x)));
    spreads.push_back(relative_spread(r));
  }
  EXPECT_LT(spreads[2], 0.05);
  EXPECT_LT(spreads[1], spreads[0]);
  EXPECT_LT(spreads[2], spreads[1]);
}

TEST(DistortedFbi, AnalysisRatioIsConvergedUnderGridDoubling) {
  const auto fs = random_packets(3, 9);
  const double h = 1e-2;
  std::vector<std::vector<double>> ratios;
  for (double res : {1.0, 2.0}) {
    const auto g = distorted_analysis_grids(kKappa, h, -1.3, 1.3, 20.0, res);
    const auto s = distorted_fbi(kKappa, h, g.grid, g.x);
    ratios.emplace_back();
    for (const auto& f : fs) ratios.back().push_back(analysis_ratio(s, packet_samples(f, g.x)));
  }
  for (std::size_t k = 0; k < fs.size(); ++k)
    EXPECT_LT(std::abs(ratios[1][k] - ratios[0][k]) / ratios[1][k], 1e-4);
}

TEST(BoundednessProfile, ValueAtZeroMatchesGammaClosedForm) {
  for (double c6 : {0.5, 1.0, 2.5}) {
    const double expect = std::sqrt(std::numbers::pi) / (3.0 * std::sqrt(c6));
    EXPECT_NEAR(boundedness_limit(c6), expect, 1e-15);
    for (double h : {1.0, 1e-2, 1e-5}) {
      const double f0 = boundedness_profile(c6, h, 0.0);
      EXPECT_NEAR(f0, expect, 1e-8 * expect);
      for (double s : {-0.5, -5.0, -500.0}) EXPECT_LE(boundedness_profile(c6, h, s), f0 * (1.0 + 1e-12));
    }
  }
}

TEST(BoundednessProfile, EqualsGOfHSquaredSCubed) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> lh(-4.0, 0.0), ls(-1.0, 3.0);
  for (int trial = 0; trial < 40; ++trial) {
    const double h = std::pow(10.0, lh(rng)), s = std::pow(10.0, ls(rng));
    const double f = boundedness_profile(1.3, h, s), g = boundedness_G(1.3, h * h * s * s * s);
    EXPECT_LT(std::abs(f - g) / g, 1e-6) << "h=" << h << " s=" << s;
  }
}

TEST(BoundednessProfile, GMatchesIndependentQuadratureAndLimit) {
  for (double t : {1e-3, 0.1, 1.0, 15.0, 300.0}) EXPECT_NEAR(boundedness_G(1.0, t), g_oracle(t), 1e-7);
  // G(t) - G(0+) decays like t^{1/3}
  const double lim = boundedness_limit(1.0);
  double prev = 1.0;
  for (double t : {1e-6, 1e-9, 1e-12}) {
    const double rel = (boundedness_G(1.0, t) - lim) / lim;
    EXPECT_GT(rel, 0.0);
    EXPECT_LT(rel, prev / 5.0);
    prev = rel;
  }
  EXPECT_LT(prev, 1e-3);
  // G(inf) = sqrt(pi / c6)
  EXPECT_NEAR(boundedness_G(2.0, 1e8), std::sqrt(std::numbers::pi / 2.0), 1e-3);
  EXPECT_THROW(boundedness_G(0.0, 1.0), PreconditionError);
  EXPECT_THROW(boundedness_profile(1.0, 0.0, 1.0), PreconditionError);
}

TEST(GeneralizedKappa, LinearKappaReducesToProfile) {
  const auto lin = [](double xi) { return cplx(xi, 0.3 * xi); };
  for (double h : {0.1, 1e-3})
    for (double s : {-3.0, 0.0, 2.0, 400.0}) {
      const double f = boundedness_profile(1.0, h, s);
      EXPECT_NEAR(generalized_profile(lin, 1.0, h, s), f, 1e-10 * f);
    }
}

TEST(GeneralizedKappa, SaturatingKappaIsBoundedUniformly) {
  const auto sat = [](double xi) { return cplx(xi / (1.0 + xi), 0.0); };
  std::vector<double> ss;
  for (int k = -8; k <= 32; ++k) {
    ss.push_back(std::pow(10.0, k / 4.0));
    ss.push_back(-std::pow(10.0, k / 4.0));
  }
  std::vector<double> sups;
  for (double h : {1e-1, 1e-2, 1e-3}) {
    const auto r = generalized_kappa_check(sat, {1.0, 0.0, 2.0, 2.0}, 1.0, {h}, ss);
    EXPECT_TRUE(r.bounded);
    EXPECT_TRUE(std::isfinite(r.sup));
    sups.push_back(r.sup);
  }
  const auto [lo, hi] = std::minmax_element(sups.begin(), sups.end());
  EXPECT_LT((*hi - *lo) / *lo, 0.05);
}

TEST(GeneralizedKappa, RejectsSandwichViolations) {
  const auto zero = [](double) { return cplx(0.0, 1.0); };
  EXPECT_THROW(generalized_kappa_check(zero, {1.0, 1.0, 1.0, 1.0}, 1.0, {0.1}, {0.0}), PreconditionError);
  const auto quad = [](double xi) { return cplx(xi * xi, 0.0); };
  EXPECT_THROW(generalized_kappa_check(quad, {1.0, 1.0, 2.0, 2.0}, 1.0, {0.1}, {0.0}), PreconditionError);
}

TEST(GaussianKernelCompare, HarmonicFieldMatchesAmplitudeOracle) {
  // psi'_{-1} = i xi + k s exactly, so the n = 0 mode is g (1 + k s / (i xi))^{-1/2}
  const double u = 0.1, xi = -0.9;
  const cplx k(-0.6, 0.3);
  const cplx c1 = 2.0 * I * xi * k, c2 = k * k;
  const CoefficientField cf(Coefficient::constant(1.0), Coefficient::constant(0.0),
                            Coefficient::polynomial({-c1 * u + c2 * u * u, c1 - 2.0 * c2 * u, c2}), -3.0, 3.0);
  const auto grid = phase_space_grid(cf, {u}, {xi});
  for (double h : {0.02, 0.005}) {
    const auto f = [&](double s) { return std::exp((I * xi * s + 0.5 * k * s * s) / h); };
    const auto amp = [&](double s) { return 1.0 / std::sqrt(1.0 + k * s / (I * xi)); };
    const double len = std::sqrt(h / -k.real()), lo = -14.0 * len, hi = 14.0 * len;
    const double nf = std::sqrt(simpson([&](double s) { return std::norm(f(s) * amp(s)); }, lo, hi, 20000));
    const double ng = std::sqrt(simpson([&](double s) { return std::norm(f(s)); }, lo, hi, 20000));
    const double d = std::sqrt(
        simpson([&](double s) { return std::norm(f(s) * amp(s) / nf - f(s) / ng); }, lo, hi, 20000));
    EXPECT_NEAR(gaussian_kernel_compare(cf, grid, h).sup_difference, d, 1e-6 * d + 1e-12);
  }
}

TEST(GaussianKernelCompare, ComplexAiryDifferenceIsHalfOrder) {
  const auto cf = complex_airy();
  const auto grid = phase_space_grid(cf, linspace(-0.2, 0.2, 3), linspace(-1.5, -0.5, 3));
  std::vector<double> hs, ds;
  for (double h : default_h_sweep()) {
    hs.push_back(h);
    ds.push_back(gaussian_kernel_compare(cf, grid, h).sup_difference);
  }
  for (std::size_t k = 1; k < ds.size(); ++k) EXPECT_LT(ds[k], ds[k - 1]);
  EXPECT_NEAR(order_fit(hs, ds).slope, 0.5, 0.1);
}

TEST(GaussianKernelCompare, SinglePointMatchesModeComparison) {
  const auto cf = complex_airy();
  const PhasePoint p{0.1, -1.1};
  const double h = 0.01;
  const Pseudomode f = assemble_mode(cf, p, h, 0);
  const Pseudomode g = gaussian_mode(cf, p, h, f.cutoff);
  std::vector<cplx> d(f.x.size());
  const double nf = f.norm(), ng = g.norm();
  for (std::size_t q = 0; q < f.x.size(); ++q) d[q] = f.f[q] / nf - g.evaluate(f.x[q]).f / ng;
  const double expect = weighted_norm(f.weights, d);
  EXPECT_NEAR(gaussian_kernel_compare(cf, phase_space_grid(cf, {p.u}, {p.xi}), h).sup_difference, expect,
              1e-9);
}

TEST(AsymptoticOrthogonality, SinglePointOverlapMatchesGaussianIntegral) {
  const auto cf = complex_airy();
  const double h = 0.05;
  const double u1 = -0.3, x1 = -0.8, u2 = 0.25, x2 = -0.6;
  // k = -i sigma_u / sigma_xi = 1 / (2 xi) for sigma = xi^2 + i u
  const cplx k1 = 1.0 / (2.0 * x1), k2 = 1.0 / (2.0 * x2);
  // conj(g1) g2 = exp(-alpha x^2 + beta x + gamma) / sqrt(h)
  const cplx alpha = -(std::conj(k1) + k2) / (2.0 * h);
  const cplx beta = (I * (x2 - x1) - std::conj(k1) * u1 - k2 * u2) / h;
  const cplx gamma = (I * (x1 * u1 - x2 * u2) + 0.5 * (std::conj(k1) * u1 * u1 + k2 * u2 * u2)) / h;
  const auto integral = [](cplx a, cplx b, cplx c) {
    return std::sqrt(std::numbers::pi / a) * std::exp(b * b / (4.0 * a) + c);
  };
  // ||g_j||^2 = sqrt(pi h / -Re k_j)
  const double n1 = std::pow(std::numbers::pi * h / -k1.real(), 0.25);
  const double n2 = std::pow(std::numbers::pi * h / -k2.real(), 0.25);
  const double expect = std::abs(integral(alpha, beta, gamma)) / (n1 * n2);
  const auto U = phase_space_grid(cf, {u1}, {x1}), V = phase_space_grid(cf, {u2}, {x2});
  EXPECT_NEAR(asymptotic_orthogonality(cf, U, V, h), expect, 1e-9 * expect + 1e-15);
}

TEST(AsymptoticOrthogonality, IdenticalSetsAreNotOrthogonal) {
  const auto cf = complex_airy();
  const auto U = phase_space_grid(cf, linspace(-0.6, -0.25, 4), linspace(-0.5, -0.25, 4));
  EXPECT_GT(cross_gram_norm(cf, U, U, 0.05), 0.01);
  EXPECT_THROW(asymptotic_orthogonality(cf, U, U, 0.05), PreconditionError);
}

TEST(AsymptoticOrthogonality, DecaysExponentiallyInOneOverH) {
  const auto cf = complex_airy();
  const auto U = phase_space_grid(cf, linspace(-0.6, -0.25, 8), linspace(-0.5, -0.25, 8));
  const auto V = phase_space_grid(cf, linspace(0.25, 0.6, 8), linspace(-0.5, -0.25, 8));
  std::vector<double> inv_h, logs;
  for (int k = 0; k < 8; ++k) {
    const double h = 0.2 * std::pow(0.1, k / 7.0);
    inv_h.push_back(1.0 / h);
    logs.push_back(std::log(asymptotic_orthogonality(cf, U, V, h)));
  }
  const auto fit = line_fit(inv_h, logs);
  EXPECT_LT(fit.slope, 0.0);
  EXPECT_GE(fit.r2, 0.98);
}
