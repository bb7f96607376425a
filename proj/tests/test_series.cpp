#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "pseudomode/coefficients.hpp"
#include "pseudomode/series.hpp"

using namespace pseudomode;

namespace {

// Generalized binomial coefficient C(p, j).
cplx binom(cplx p, int j) {
  cplx c = 1.0;
  for (int q = 0; q < j; ++q) c *= (p - static_cast<double>(q)) / static_cast<double>(q + 1);
  return c;
}

}  // namespace

TEST(TaylorSeries, ProductAndQuotient) {
  const TaylorSeries a{1.0, 1.0, 0.0, 0.0, 0.0};
  const TaylorSeries b{1.0, -1.0, 0.0, 0.0, 0.0};
  const TaylorSeries p = a * b;
  EXPECT_EQ(p[0], cplx(1.0));
  EXPECT_EQ(p[1], cplx(0.0));
  EXPECT_EQ(p[2], cplx(-1.0));
  const TaylorSeries geo = TaylorSeries::constant(1.0, 5) / b;
  for (int j = 0; j < 5; ++j) EXPECT_EQ(geo[j], cplx(1.0));
  EXPECT_THROW(a / (TaylorSeries{0.0, 1.0, 0.0, 0.0, 0.0}), NumericError);
}

TEST(TaylorSeries, TruncatesToShorterOperand) {
  const TaylorSeries a{1.0, 2.0, 3.0};
  const TaylorSeries b{1.0, 1.0};
  EXPECT_EQ((a * b).size(), 2u);
  EXPECT_EQ((a + b).size(), 2u);
}

TEST(TaylorSeries, SqrtMatchesBinomialSeriesAndPinsBranch) {
  const TaylorSeries w{1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  const TaylorSeries r = sqrt(w, 1.0);
  for (int j = 0; j < 7; ++j) EXPECT_NEAR(std::abs(r[j] - binom(0.5, j)), 0.0, 1e-15);
  const TaylorSeries rn = sqrt(w, -1.0);
  for (int j = 0; j < 7; ++j) EXPECT_NEAR(std::abs(rn[j] + binom(0.5, j)), 0.0, 1e-15);
  EXPECT_THROW(sqrt((TaylorSeries{0.0, 1.0}), 1.0), BranchPointError);
}

TEST(TaylorSeries, LogExpRoundTripAndPointValues) {
  TaylorSeries a(20);
  a[0] = cplx(0.3, -0.2);
  a[1] = cplx(0.5, 0.1);
  a[2] = cplx(-0.25, 0.0);
  const TaylorSeries e = exp(a);
  const TaylorSeries back = log(e);
  for (int j = 0; j < 20; ++j) EXPECT_NEAR(std::abs(back[j] - a[j]), 0.0, 1e-14);
  const cplx t(0.05, 0.02);
  EXPECT_NEAR(std::abs(e.evaluate(t) - std::exp(a.evaluate(t))), 0.0, 1e-14);
  const TaylorSeries l = log(TaylorSeries{1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0});
  EXPECT_NEAR(std::abs(l.evaluate(0.1) - std::log(1.1)), 0.0, 1e-15);
}

TEST(TaylorSeries, CalculusOperations) {
  const TaylorSeries a{1.0, 2.0, 3.0};
  const TaylorSeries d = a.derivative();
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d[1], cplx(6.0));
  const TaylorSeries s = a.integral();
  EXPECT_EQ(s[0], cplx(0.0));
  EXPECT_EQ(s[3], cplx(1.0));
  EXPECT_NEAR(std::abs(a.integrate_to(2.0) - cplx(2.0 + 4.0 + 8.0)), 0.0, 1e-14);
  EXPECT_NEAR(a.tail_estimate(0.5), 3.0 * 0.25 + 2.0 * 0.5, 1e-15);
}

TEST(Coefficient, PolynomialJetIsTaylorShift) {
  const Coefficient p = Coefficient::polynomial({1.0, cplx(0.0, 2.0), 3.0, -1.0});
  const double x = 0.7;
  const auto j = p.jet(x, 5);
  // p(x+t) expanded by hand
  const cplx c0 = 1.0 + cplx(0, 2) * x + 3.0 * x * x - x * x * x;
  const cplx c1 = cplx(0, 2) + 6.0 * x - 3.0 * x * x;
  const cplx c2 = 3.0 - 3.0 * x;
  EXPECT_NEAR(std::abs(j[0] - c0), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(j[1] - c1), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(j[2] - c2), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(j[3] + 1.0), 0.0, 1e-14);
  EXPECT_EQ(j[4], cplx(0.0));
}

TEST(Coefficient, JetDegreeZeroEqualsValueExactly) {
  for (const auto& cf : {complex_airy(), davies_rotated(), advection_exit()}) {
    for (double x : {cf.x_lo(), 0.5 * (cf.x_lo() + cf.x_hi()), cf.x_hi() - 0.3}) {
      EXPECT_EQ(cf.c().jet(x, 6)[0], cf.c().value(x));
      EXPECT_EQ(cf.a().jet(x, 6)[0], cf.a().value(x));
    }
  }
  const Coefficient e = Coefficient::exponential(cplx(1.0, 0.5), cplx(-0.3, 0.2));
  EXPECT_EQ(e.jet(0.4, 3)[0], e.value(0.4));
}

TEST(Coefficient, AnalyticJetsAgreeWithCentralDifferences) {
  const Coefficient coeffs[] = {Coefficient::exponential(cplx(1.0, 0.5), cplx(-0.3, 0.2)),
                                Coefficient::sine(cplx(0.0, 1.0), 1.7, 0.3),
                                Coefficient::polynomial({0.0, 1.0, cplx(0.0, 0.5), 0.25})};
  const double step = 1e-3;
  for (const auto& c : coeffs) {
    for (double x : {-0.8, 0.1, 1.3}) {
      const auto j = c.jet(x, 2);
      const cplx d1 = (c.value(x + step) - c.value(x - step)) / (2.0 * step);
      const cplx d2 = (c.value(x + step) - 2.0 * c.value(x) + c.value(x - step)) / (step * step);
      EXPECT_LT(std::abs(j[1] - d1), 1e-6 * std::max(1.0, std::abs(d1)));
      EXPECT_LT(std::abs(2.0 * j[2] - d2), 1e-6 * std::max(1.0, std::abs(d2)));
    }
  }
}

TEST(Coefficient, FiniteDifferenceFallback) {
  const Coefficient f = Coefficient::from_values([](double x) { return cplx(std::sin(x), std::cos(2 * x)); });
  const auto j = f.jet(0.3, 4);
  const double x = 0.3;
  EXPECT_NEAR(std::abs(j[1] - cplx(std::cos(x), -2 * std::sin(2 * x))), 0.0, 1e-8);
  EXPECT_NEAR(std::abs(j[2] - cplx(-std::sin(x), -4 * std::cos(2 * x)) / 2.0), 0.0, 1e-7);
  EXPECT_NEAR(std::abs(j[4] - cplx(std::sin(x), 16 * std::cos(2 * x)) / 24.0), 0.0, 1e-6);
  EXPECT_THROW(f.jet(0.3, 5), PreconditionError);
}

TEST(Coefficient, SumAndProduct) {
  const Coefficient p = Coefficient::polynomial({1.0, 1.0});
  const Coefficient q = Coefficient::exponential(1.0, 1.0);
  const auto s = (p + q).jet(0.2, 3);
  const auto m = (p * q).jet(0.2, 3);
  const double e = std::exp(0.2);
  EXPECT_NEAR(std::abs(s[0] - (1.2 + e)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(m[1] - (e + 1.2 * e)), 0.0, 1e-14);
}

TEST(CoefficientField, EllipticityIsProbed) {
  EXPECT_THROW(CoefficientField(Coefficient::polynomial({0.0, 1.0}), Coefficient::constant(0.0),
                                Coefficient::constant(0.0), 0.0, 1.0),
               DomainError);
  EXPECT_THROW(CoefficientField(Coefficient::constant(1.0), Coefficient::constant(0.0),
                                Coefficient::constant(0.0), 1.0, -1.0),
               DomainError);
  EXPECT_NO_THROW(complex_airy());
  EXPECT_THROW(complex_airy().values(7.0), DomainError);
  EXPECT_THROW(builtin_operator("nope"), ConfigError);
}
