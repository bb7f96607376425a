#pragma once

// Operator coefficients a, b, c of
//   (L_h f)(x) = -h^2 a(x) f''(x) - i h b(x) f'(x) + c(x) f(x)
// as jet providers: (x, order) -> Taylor coefficients about x.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pseudomode/errors.hpp"
#include "pseudomode/series.hpp"

namespace pseudomode {

inline constexpr cplx I{0.0, 1.0};

namespace detail {

inline double factorial(int k) {
  double f = 1.0;
  for (int j = 2; j <= k; ++j) f *= j;
  return f;
}

// Fornberg's recursion: weights for the derivatives 0..max_order at 0 on the given nodes.
inline std::vector<std::vector<double>> fornberg_weights(const std::vector<double>& nodes, int max_order) {
  const int n = static_cast<int>(nodes.size());
  std::vector<std::vector<double>> c(max_order + 1, std::vector<double>(n, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0];
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, max_order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i];
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

}  // namespace detail

/// A complex coefficient function with Taylor jets up to `max_order`.
class Coefficient {
 public:
  using JetFn = std::function<std::vector<cplx>(double x, int order)>;

  Coefficient() : Coefficient(constant(0.0)) {}
  Coefficient(JetFn jet, int max_order, std::string description)
      : jet_(std::move(jet)), max_order_(max_order), description_(std::move(description)) {}

  static Coefficient constant(cplx value) {
    std::ostringstream d;
    d << "const(" << value.real() << "," << value.imag() << ")";
    return polynomial({value}, d.str());
  }

  /// sum_k coeffs[k] x^k, exact jets of every order.
  static Coefficient polynomial(std::vector<cplx> coeffs, std::string description = "") {
    if (description.empty()) {
      std::ostringstream d;
      d << "poly[";
      for (std::size_t k = 0; k < coeffs.size(); ++k)
        d << (k ? "," : "") << "(" << coeffs[k].real() << "," << coeffs[k].imag() << ")";
      d << "]";
      description = d.str();
    }
    auto jet = [coeffs = std::move(coeffs)](double x, int order) {
      // Taylor shift: coefficient of t^j in p(x + t) is sum_k C(k,j) p_k x^{k-j}.
      std::vector<cplx> out(order + 1, cplx{});
      const int deg = static_cast<int>(coeffs.size()) - 1;
      for (int j = 0; j <= std::min(order, deg); ++j) {
        cplx acc{};
        for (int k = deg; k >= j; --k) {
          double binom = 1.0;
          for (int q = 1; q <= j; ++q) binom = binom * (k - j + q) / q;
          acc = acc * x + binom * coeffs[k];
        }
        out[j] = acc;
      }
      return out;
    };
    return Coefficient(std::move(jet), std::numeric_limits<int>::max(), std::move(description));
  }

  /// amplitude * exp(rate * x)
  static Coefficient exponential(cplx amplitude, cplx rate) {
    auto jet = [amplitude, rate](double x, int order) {
      std::vector<cplx> out(order + 1);
      cplx term = amplitude * std::exp(rate * x);
      for (int j = 0; j <= order; ++j) {
        out[j] = term;
        term *= rate / static_cast<double>(j + 1);
      }
      return out;
    };
    std::ostringstream d;
    d << "exp(" << amplitude << "," << rate << ")";
    return Coefficient(std::move(jet), std::numeric_limits<int>::max(), d.str());
  }

  /// amplitude * sin(frequency * x + phase)
  static Coefficient sine(cplx amplitude, double frequency, double phase) {
    auto jet = [amplitude, frequency, phase](double x, int order) {
      std::vector<cplx> out(order + 1);
      double scale = 1.0;
      for (int j = 0; j <= order; ++j) {
        out[j] = amplitude * scale * std::sin(frequency * x + phase + j * std::numbers::pi / 2.0);
        scale *= frequency / static_cast<double>(j + 1);
      }
      return out;
    };
    std::ostringstream d;
    d << "sin(" << amplitude << "," << frequency << "," << phase << ")";
    return Coefficient(std::move(jet), std::numeric_limits<int>::max(), d.str());
  }

  /// Value-only closure; jets up to order 4 by a 9-point central difference stencil.
  static Coefficient from_values(std::function<cplx(double)> f, double step = 1e-2,
                                 std::string description = "values") {
    static constexpr int kMaxOrder = 4;
    auto jet = [f = std::move(f), step](double x, int order) {
      std::vector<double> nodes;
      for (int k = -4; k <= 4; ++k) nodes.push_back(k * step);
      const auto w = detail::fornberg_weights(nodes, kMaxOrder);
      std::vector<cplx> samples;
      for (double t : nodes) samples.push_back(f(x + t));
      std::vector<cplx> out(order + 1, cplx{});
      out[0] = f(x);
      for (int j = 1; j <= std::min(order, kMaxOrder); ++j) {
        cplx acc{};
        for (std::size_t q = 0; q < nodes.size(); ++q) acc += w[j][q] * samples[q];
        out[j] = acc / detail::factorial(j);
      }
      return out;
    };
    return Coefficient(std::move(jet), kMaxOrder, std::move(description));
  }

  cplx value(double x) const { return jet_(x, 0)[0]; }

  TaylorSeries jet(double x, int order) const {
    if (order > max_order_) {
      std::ostringstream m;
      m << "coefficient '" << description_ << "' provides jets up to order " << max_order_ << ", "
        << order << " requested";
      throw PreconditionError(m.str());
    }
    return TaylorSeries(jet_(x, order));
  }

  int max_order() const noexcept { return max_order_; }
  const std::string& description() const noexcept { return description_; }

  friend Coefficient operator+(const Coefficient& p, const Coefficient& q) {
    auto jet = [p, q](double x, int order) {
      return (p.jet(x, order) + q.jet(x, order)).coefficients();
    };
    return Coefficient(std::move(jet), std::min(p.max_order_, q.max_order_),
                       p.description_ + "+" + q.description_);
  }

  friend Coefficient operator*(const Coefficient& p, const Coefficient& q) {
    auto jet = [p, q](double x, int order) {
      return (p.jet(x, order) * q.jet(x, order)).coefficients();
    };
    return Coefficient(std::move(jet), std::min(p.max_order_, q.max_order_),
                       "(" + p.description_ + ")*(" + q.description_ + ")");
  }

 private:
  JetFn jet_;
  int max_order_ = 0;
  std::string description_;
};

/// The triple (a, b, c) on a closed interval, with probe-checked ellipticity.
class CoefficientField {
 public:
  static constexpr int kDefaultProbes = 512;

  CoefficientField(Coefficient a, Coefficient b, Coefficient c, double x_lo, double x_hi,
                   std::string name = "custom", int probes = kDefaultProbes)
      : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), x_lo_(x_lo), x_hi_(x_hi),
        name_(std::move(name)) {
    if (!(x_lo < x_hi)) throw DomainError("coefficient domain must satisfy x_lo < x_hi");
    double scale = 0.0;
    std::vector<double> mags;
    for (int k = 0; k < probes; ++k) {
      const double x = x_lo + (x_hi - x_lo) * k / (probes - 1);
      mags.push_back(std::abs(a_.value(x)));
      scale = std::max(scale, mags.back());
    }
    for (int k = 0; k < probes; ++k) {
      if (!(mags[k] > 1e-12 * std::max(1.0, scale))) {
        std::ostringstream m;
        m << "ellipticity fails: a(x) vanishes near x = " << x_lo + (x_hi - x_lo) * k / (probes - 1);
        throw DomainError(m.str());
      }
    }
  }

  const Coefficient& a() const noexcept { return a_; }
  const Coefficient& b() const noexcept { return b_; }
  const Coefficient& c() const noexcept { return c_; }
  double x_lo() const noexcept { return x_lo_; }
  double x_hi() const noexcept { return x_hi_; }
  const std::string& name() const noexcept { return name_; }
  int jet_order_max() const noexcept {
    return std::min({a_.max_order(), b_.max_order(), c_.max_order()});
  }

  bool contains(double x) const noexcept { return x >= x_lo_ && x <= x_hi_; }

  void require(double x) const {
    if (!contains(x)) {
      std::ostringstream m;
      m << "point " << x << " outside coefficient domain [" << x_lo_ << ", " << x_hi_ << "]";
      throw DomainError(m.str());
    }
  }

  struct Jets {
    TaylorSeries a, b, c;
  };

  Jets jets(double x, int order) const {
    require(x);
    return {a_.jet(x, order), b_.jet(x, order), c_.jet(x, order)};
  }

  struct Values {
    cplx a, b, c;
  };

  Values values(double x) const {
    require(x);
    return {a_.value(x), b_.value(x), c_.value(x)};
  }

 private:
  Coefficient a_, b_, c_;
  double x_lo_, x_hi_;
  std::string name_;
};

// Built-in operators used by the CLI and the acceptance suite.

/// a = 1, b = 0, c = i x
inline CoefficientField complex_airy(double x_lo = -5.0, double x_hi = 5.0) {
  return CoefficientField(Coefficient::constant(1.0), Coefficient::constant(0.0),
                          Coefficient::polynomial({0.0, I}), x_lo, x_hi, "complex-airy");
}

/// a = 1, b = 0, c = i x^2
inline CoefficientField davies_rotated(double x_lo = -5.0, double x_hi = 5.0) {
  return CoefficientField(Coefficient::constant(1.0), Coefficient::constant(0.0),
                          Coefficient::polynomial({0.0, 0.0, I}), x_lo, x_hi, "davies-rotated");
}

/// a = 1, b = -i, c = 0
inline CoefficientField advection_exit(double x_lo = 0.0, double x_hi = 4.0) {
  return CoefficientField(Coefficient::constant(1.0), Coefficient::constant(-I),
                          Coefficient::constant(0.0), x_lo, x_hi, "advection-exit");
}

inline std::vector<std::string> builtin_operator_names() {
  return {"complex-airy", "davies-rotated", "advection-exit"};
}

inline CoefficientField builtin_operator(const std::string& name) {
  if (name == "complex-airy") return complex_airy();
  if (name == "davies-rotated") return davies_rotated();
  if (name == "advection-exit") return advection_exit();
  throw ConfigError("unknown built-in operator '" + name + "'");
}

inline CoefficientField builtin_operator(const std::string& name, double x_lo, double x_hi) {
  if (name == "complex-airy") return complex_airy(x_lo, x_hi);
  if (name == "davies-rotated") return davies_rotated(x_lo, x_hi);
  if (name == "advection-exit") return advection_exit(x_lo, x_hi);
  throw ConfigError("unknown built-in operator '" + name + "'");
}

}  // namespace pseudomode
