#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <ostream>

namespace graph_spectra {

using complex = std::complex<double>;

/// Complex number stored as mantissa * 2^exponent with |mantissa| in [1, 2).
///
/// Bond prefactors such as sinh(sqrt(gamma) l) / sqrt(gamma) overflow a double
/// once sqrt(gamma) l exceeds ~710, and Cayley-tree recurrences multiply
/// exponentially many of them. Every product in the determinant engine is
/// accumulated in this representation. Zero is stored as (0, 0).
class DetValue {
 public:
  constexpr DetValue() = default;
  DetValue(complex value) { assign(value, 0); }  // NOLINT: implicit by intent
  DetValue(double value) { assign(complex{value, 0.0}, 0); }  // NOLINT

  static DetValue scaled(complex mantissa, std::int64_t exponent) {
    DetValue d;
    d.assign(mantissa, exponent);
    return d;
  }

  /// exp(log_value), without forming the (possibly overflowing) exponential.
  static DetValue from_log(complex log_value) {
    const double re = log_value.real();
    if (re == -std::numeric_limits<double>::infinity()) return {};
    const auto e = static_cast<std::int64_t>(std::floor(re / std::numbers::ln2));
    const complex m = std::exp(log_value - complex{static_cast<double>(e) * std::numbers::ln2, 0.0});
    return scaled(m, e);
  }

  static DetValue one() { return DetValue{1.0}; }
  static DetValue zero() { return {}; }

  [[nodiscard]] const complex& mantissa() const { return mantissa_; }
  [[nodiscard]] std::int64_t exponent() const { return exponent_; }
  [[nodiscard]] bool is_zero() const { return mantissa_ == complex{}; }
  [[nodiscard]] bool is_finite() const {
    return std::isfinite(mantissa_.real()) && std::isfinite(mantissa_.imag());
  }

  /// Plain complex value; overflows to inf / underflows to 0 out of range.
  [[nodiscard]] complex value() const {
    if (exponent_ > 4096) return {ldexp_sat(mantissa_.real()), ldexp_sat(mantissa_.imag())};
    if (exponent_ < -4096) return {};
    const int e = static_cast<int>(exponent_);
    return {std::ldexp(mantissa_.real(), e), std::ldexp(mantissa_.imag(), e)};
  }
  [[nodiscard]] double real() const { return value().real(); }
  [[nodiscard]] double imag() const { return value().imag(); }

  /// log2 |value|; -inf for zero.
  [[nodiscard]] double log2_abs() const {
    if (is_zero()) return -std::numeric_limits<double>::infinity();
    return std::log2(std::abs(mantissa_)) + static_cast<double>(exponent_);
  }
  /// Natural log of the value (principal branch of the argument).
  [[nodiscard]] complex log() const {
    return std::log(mantissa_) + complex{static_cast<double>(exponent_) * std::numbers::ln2, 0.0};
  }

  [[nodiscard]] DetValue abs() const { return scaled(std::abs(mantissa_), exponent_); }
  [[nodiscard]] DetValue conj() const { return scaled(std::conj(mantissa_), exponent_); }

  DetValue operator-() const { return scaled(-mantissa_, exponent_); }

  friend DetValue operator*(const DetValue& a, const DetValue& b) {
    return scaled(a.mantissa_ * b.mantissa_, a.exponent_ + b.exponent_);
  }
  friend DetValue operator/(const DetValue& a, const DetValue& b) {
    return scaled(a.mantissa_ / b.mantissa_, a.exponent_ - b.exponent_);
  }
  friend DetValue operator+(const DetValue& a, const DetValue& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    const DetValue& big = a.exponent_ >= b.exponent_ ? a : b;
    const DetValue& small = a.exponent_ >= b.exponent_ ? b : a;
    const std::int64_t shift = small.exponent_ - big.exponent_;
    if (shift < -200) return big;
    const int s = static_cast<int>(shift);
    const complex aligned{std::ldexp(small.mantissa_.real(), s), std::ldexp(small.mantissa_.imag(), s)};
    return scaled(big.mantissa_ + aligned, big.exponent_);
  }
  friend DetValue operator-(const DetValue& a, const DetValue& b) { return a + (-b); }

  DetValue& operator*=(const DetValue& o) { return *this = *this * o; }
  DetValue& operator/=(const DetValue& o) { return *this = *this / o; }
  DetValue& operator+=(const DetValue& o) { return *this = *this + o; }
  DetValue& operator-=(const DetValue& o) { return *this = *this - o; }

  [[nodiscard]] DetValue pow(unsigned n) const {
    DetValue result = one();
    DetValue base = *this;
    while (n != 0) {
      if (n & 1U) result *= base;
      base *= base;
      n >>= 1U;
    }
    return result;
  }

  /// Structural equality (same normalized representation).
  friend bool operator==(const DetValue& a, const DetValue& b) {
    return a.mantissa_ == b.mantissa_ && a.exponent_ == b.exponent_;
  }

  friend std::ostream& operator<<(std::ostream& os, const DetValue& d) {
    return os << d.mantissa_ << "*2^" << d.exponent_;
  }

 private:
  static double ldexp_sat(double m) {
    if (m == 0.0) return 0.0;
    return std::copysign(std::numeric_limits<double>::infinity(), m);
  }

  void assign(complex m, std::int64_t e) {
    const double r = std::abs(m);
    if (r == 0.0) {
      mantissa_ = {};
      exponent_ = 0;
      return;
    }
    if (!std::isfinite(r)) {
      mantissa_ = m;
      exponent_ = e;
      return;
    }
    int k = 0;
    std::frexp(r, &k);  // r = f 2^k, f in [0.5, 1)
    const int shift = 1 - k;
    mantissa_ = {std::ldexp(m.real(), shift), std::ldexp(m.imag(), shift)};
    exponent_ = e - shift;
  }

  complex mantissa_{};
  std::int64_t exponent_ = 0;
};

/// |a - b| / max(|a|, |b|); 0 when both vanish.
inline double relative_difference(const DetValue& a, const DetValue& b) {
  if (a.is_zero() && b.is_zero()) return 0.0;
  const DetValue diff = a - b;
  if (diff.is_zero()) return 0.0;
  const double ref = std::max(a.log2_abs(), b.log2_abs());
  return std::exp2(diff.log2_abs() - ref);
}

}  // namespace graph_spectra
