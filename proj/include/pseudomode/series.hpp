#pragma once

// Truncated power series with complex coefficients.
//
// A TaylorSeries of length L holds c_0..c_{L-1} and represents
// sum_j c_j t^j + O(t^L). Binary operations truncate to the shorter
// operand, so every retained coefficient is exact for the inputs given.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "pseudomode/errors.hpp"

namespace pseudomode {

using cplx = std::complex<double>;

class TaylorSeries {
 public:
  TaylorSeries() = default;
  explicit TaylorSeries(std::size_t length) : c_(length, cplx{0.0, 0.0}) {}
  explicit TaylorSeries(std::vector<cplx> coeffs) : c_(std::move(coeffs)) {}
  TaylorSeries(std::initializer_list<cplx> coeffs) : c_(coeffs) {}

  static TaylorSeries constant(cplx value, std::size_t length) {
    TaylorSeries s(length);
    if (length > 0) s.c_[0] = value;
    return s;
  }

  /// value + t
  static TaylorSeries variable(cplx value, std::size_t length) {
    TaylorSeries s = constant(value, length);
    if (length > 1) s.c_[1] = 1.0;
    return s;
  }

  std::size_t size() const noexcept { return c_.size(); }
  bool empty() const noexcept { return c_.empty(); }
  const std::vector<cplx>& coefficients() const noexcept { return c_; }

  cplx operator[](std::size_t j) const { return c_[j]; }
  cplx& operator[](std::size_t j) { return c_[j]; }
  cplx at(std::size_t j) const { return j < c_.size() ? c_[j] : cplx{}; }

  TaylorSeries truncated(std::size_t length) const {
    TaylorSeries s(length);
    std::copy_n(c_.begin(), std::min(length, c_.size()), s.c_.begin());
    return s;
  }

  cplx evaluate(cplx t) const {
    cplx acc{};
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * t + *it;
    return acc;
  }

  TaylorSeries derivative() const {
    if (c_.size() <= 1) return TaylorSeries(std::size_t{0});
    TaylorSeries d(c_.size() - 1);
    for (std::size_t j = 1; j < c_.size(); ++j) d.c_[j - 1] = c_[j] * static_cast<double>(j);
    return d;
  }

  /// Antiderivative vanishing at t = 0; one coefficient longer.
  TaylorSeries integral() const {
    TaylorSeries s(c_.size() + 1);
    for (std::size_t j = 0; j < c_.size(); ++j) s.c_[j + 1] = c_[j] / static_cast<double>(j + 1);
    return s;
  }

  /// Value of the antiderivative (zero at 0) at t.
  cplx integrate_to(cplx t) const {
    cplx acc{};
    for (std::size_t j = c_.size(); j-- > 0;) acc = acc * t + c_[j] / static_cast<double>(j + 1);
    return acc * t;
  }

  /// |c_{L-1}| r^{L-1} + |c_{L-2}| r^{L-2}: size of the last retained terms at radius r.
  double tail_estimate(double r) const {
    const std::size_t L = c_.size();
    double e = 0.0;
    if (L >= 1) e += std::abs(c_[L - 1]) * std::pow(r, static_cast<double>(L - 1));
    if (L >= 2) e += std::abs(c_[L - 2]) * std::pow(r, static_cast<double>(L - 2));
    return e;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : c_) m = std::max(m, std::abs(v));
    return m;
  }

  TaylorSeries& operator+=(const TaylorSeries& o) {
    resize_to_min(o);
    for (std::size_t j = 0; j < c_.size(); ++j) c_[j] += o.c_[j];
    return *this;
  }
  TaylorSeries& operator-=(const TaylorSeries& o) {
    resize_to_min(o);
    for (std::size_t j = 0; j < c_.size(); ++j) c_[j] -= o.c_[j];
    return *this;
  }
  TaylorSeries& operator*=(cplx k) {
    for (auto& v : c_) v *= k;
    return *this;
  }
  TaylorSeries& operator/=(cplx k) {
    for (auto& v : c_) v /= k;
    return *this;
  }
  TaylorSeries& operator+=(cplx k) {
    if (!c_.empty()) c_[0] += k;
    return *this;
  }
  TaylorSeries& operator-=(cplx k) {
    if (!c_.empty()) c_[0] -= k;
    return *this;
  }

  friend TaylorSeries operator+(TaylorSeries a, const TaylorSeries& b) { return a += b; }
  friend TaylorSeries operator-(TaylorSeries a, const TaylorSeries& b) { return a -= b; }
  friend TaylorSeries operator*(TaylorSeries a, cplx k) { return a *= k; }
  friend TaylorSeries operator*(cplx k, TaylorSeries a) { return a *= k; }
  friend TaylorSeries operator/(TaylorSeries a, cplx k) { return a /= k; }
  friend TaylorSeries operator+(TaylorSeries a, cplx k) { return a += k; }
  friend TaylorSeries operator-(TaylorSeries a, cplx k) { return a -= k; }
  friend TaylorSeries operator-(cplx k, const TaylorSeries& a) {
    TaylorSeries r = a * cplx{-1.0, 0.0};
    return r += k;
  }
  friend TaylorSeries operator-(TaylorSeries a) { return a *= cplx{-1.0, 0.0}; }

  friend TaylorSeries operator*(const TaylorSeries& a, const TaylorSeries& b) {
    const std::size_t L = std::min(a.size(), b.size());
    TaylorSeries r(L);
    for (std::size_t k = 0; k < L; ++k) {
      cplx acc{};
      for (std::size_t j = 0; j <= k; ++j) acc += a.c_[j] * b.c_[k - j];
      r.c_[k] = acc;
    }
    return r;
  }

  friend TaylorSeries operator/(const TaylorSeries& a, const TaylorSeries& b) {
    const std::size_t L = std::min(a.size(), b.size());
    if (L == 0) return TaylorSeries(std::size_t{0});
    if (b.c_[0] == cplx{}) throw NumericError("series division by a series with zero constant term");
    TaylorSeries r(L);
    for (std::size_t k = 0; k < L; ++k) {
      cplx acc = a.c_[k];
      for (std::size_t j = 1; j <= k; ++j) acc -= b.c_[j] * r.c_[k - j];
      r.c_[k] = acc / b.c_[0];
    }
    return r;
  }

 private:
  void resize_to_min(const TaylorSeries& o) {
    if (o.c_.size() < c_.size()) c_.resize(o.c_.size());
  }

  std::vector<cplx> c_;
};

/// Square root with the constant term chosen as the root of c_0 nearest to `branch`.
inline TaylorSeries sqrt(const TaylorSeries& w, cplx branch) {
  const std::size_t L = w.size();
  TaylorSeries r(L);
  if (L == 0) return r;
  if (w[0] == cplx{}) throw BranchPointError("series square root of a series vanishing at the centre");
  cplx r0 = std::sqrt(w[0]);
  if (std::abs(-r0 - branch) < std::abs(r0 - branch)) r0 = -r0;
  r[0] = r0;
  for (std::size_t k = 1; k < L; ++k) {
    cplx acc = w[k];
    for (std::size_t j = 1; j < k; ++j) acc -= r[j] * r[k - j];
    r[k] = acc / (2.0 * r0);
  }
  return r;
}

/// Principal-branch logarithm of the constant term, continued along the series.
inline TaylorSeries log(const TaylorSeries& b) {
  const std::size_t L = b.size();
  if (L == 0) return b;
  if (b[0] == cplx{}) throw NumericError("series logarithm of a series vanishing at the centre");
  TaylorSeries r = (b.derivative() / b.truncated(L - 1)).integral();
  r[0] = std::log(b[0]);
  return r;
}

inline TaylorSeries exp(const TaylorSeries& a) {
  const std::size_t L = a.size();
  TaylorSeries e(L);
  if (L == 0) return e;
  e[0] = std::exp(a[0]);
  for (std::size_t k = 1; k < L; ++k) {
    cplx acc{};
    for (std::size_t j = 1; j <= k; ++j) acc += static_cast<double>(j) * a[j] * e[k - j];
    e[k] = acc / static_cast<double>(k);
  }
  return e;
}

}  // namespace pseudomode
