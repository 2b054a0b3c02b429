#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>

#include "mpsperm/types.hpp"

namespace mpsperm {

/// Complex value stored as mantissa * 10^exponent10 with |mantissa| in [1, 10),
/// or mantissa == 0 and exponent10 == 0. Survives permanents far outside the
/// double exponent range.
template <typename Real>
class ScaledComplex {
 public:
  ScaledComplex() = default;

  explicit ScaledComplex(Complex<Real> value, std::int64_t exponent10 = 0)
      : mantissa_(value), exponent10_(exponent10) {
    normalize();
  }

  static ScaledComplex one() { return ScaledComplex(Complex<Real>(1)); }

  const Complex<Real>& mantissa() const noexcept { return mantissa_; }
  std::int64_t exponent10() const noexcept { return exponent10_; }
  bool is_zero() const noexcept { return mantissa_ == Complex<Real>(0); }

  /// May overflow to inf or underflow to 0 for extreme exponents.
  Complex<Real> to_complex() const {
    if (is_zero()) return Complex<Real>(0);
    return mantissa_ * std::pow(Real(10), static_cast<Real>(exponent10_));
  }

  /// log10 |value|; -inf for zero.
  Real log10_abs() const {
    if (is_zero()) return -std::numeric_limits<Real>::infinity();
    return std::log10(std::abs(mantissa_)) + static_cast<Real>(exponent10_);
  }

  ScaledComplex& operator*=(const ScaledComplex& other) {
    mantissa_ *= other.mantissa_;
    exponent10_ += other.exponent10_;
    normalize();
    return *this;
  }

  ScaledComplex& operator*=(const Complex<Real>& factor) { return *this *= ScaledComplex(factor); }

  friend ScaledComplex operator*(ScaledComplex a, const ScaledComplex& b) { return a *= b; }
  friend ScaledComplex operator*(ScaledComplex a, const Complex<Real>& b) { return a *= b; }

  friend bool operator==(const ScaledComplex& a, const ScaledComplex& b) {
    return a.mantissa_ == b.mantissa_ && a.exponent10_ == b.exponent10_;
  }

  friend std::ostream& operator<<(std::ostream& os, const ScaledComplex& z) {
    return os << "(" << z.mantissa_.real() << (z.mantissa_.imag() < 0 ? "" : "+") << z.mantissa_.imag()
              << "i)e" << z.exponent10_;
  }

 private:
  void normalize() {
    if (!is_finite(mantissa_))
      throw Error(ErrorCode::NonFiniteEntry, "ScaledComplex: non-finite mantissa");
    const Real magnitude = std::abs(mantissa_);
    if (magnitude == Real(0)) {
      mantissa_ = Complex<Real>(0);
      exponent10_ = 0;
      return;
    }
    auto shift = static_cast<std::int64_t>(std::floor(std::log10(magnitude)));
    // Two-step scaling keeps subnormal and near-max magnitudes in range.
    mantissa_ *= std::pow(Real(10), static_cast<Real>(-shift / 2));
    mantissa_ *= std::pow(Real(10), static_cast<Real>(-(shift - shift / 2)));
    exponent10_ += shift;
    // log10 rounding can leave the mantissa a hair outside [1, 10).
    const Real m = std::abs(mantissa_);
    if (m >= Real(10)) {
      mantissa_ /= Real(10);
      ++exponent10_;
    } else if (m < Real(1)) {
      mantissa_ *= Real(10);
      --exponent10_;
    }
  }

  Complex<Real> mantissa_{0};
  std::int64_t exponent10_ = 0;
};

template <typename Real>
inline Real relative_error(const ScaledComplex<Real>& a, const Complex<Real>& b) {
  return relative_error(a.to_complex(), b);
}

}  // namespace mpsperm
