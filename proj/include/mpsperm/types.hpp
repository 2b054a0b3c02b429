#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace mpsperm {

template <typename Real>
using Complex = std::complex<Real>;

/// Dense row-major complex matrix, the input and oracle currency of the library.
template <typename Real>
using Matrix = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Real>
using Vector = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1>;

template <typename Real>
using RealVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using Complexd = Complex<double>;
using Matrixd = Matrix<double>;

enum class ErrorCode {
  BlockOverlap,
  BlockGap,
  SizeMismatch,
  OversizeBlock,
  NonFiniteEntry,
  NonSquare,
  LengthMismatch,
  TooLarge,
  NotTridiagonal,
  WrongBlockSize,
  DegreeCapTooSmall,
  OutOfRange,
  DimMismatch,
  ConvergenceFailure,
  Singular,
  Parse,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BlockOverlap: return "BlockOverlap";
    case ErrorCode::BlockGap: return "BlockGap";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::OversizeBlock: return "OversizeBlock";
    case ErrorCode::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::NotTridiagonal: return "NotTridiagonal";
    case ErrorCode::WrongBlockSize: return "WrongBlockSize";
    case ErrorCode::DegreeCapTooSmall: return "DegreeCapTooSmall";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

template <typename Real>
inline bool is_finite(const Complex<Real>& z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

template <typename Derived>
inline bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (!is_finite(m(i, j))) return false;
  return true;
}

template <typename Derived>
inline void require_square(const Eigen::MatrixBase<Derived>& m, const char* who) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw Error(ErrorCode::NonSquare, std::string(who) + ": expected a nonempty square matrix, got " +
                                          std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

/// |a - b| / max(1, |b|); the comparison used throughout the oracle checks.
template <typename Real>
inline Real relative_error(const Complex<Real>& a, const Complex<Real>& b) {
  return std::abs(a - b) / std::max(Real(1), std::abs(b));
}

}  // namespace mpsperm
