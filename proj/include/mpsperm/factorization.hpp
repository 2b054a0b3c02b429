#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mpsperm/types.hpp"

namespace mpsperm {

/// Row-major 1x1 or 2x2 block; capacity is fixed at 2x2.
template <typename Real>
using BlockMatrix =
    Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor, 2, 2>;

/// One diagonal block of a block-diagonal factor, covering sites [start, start + size).
template <typename Real>
struct Block {
  std::size_t start = 0;
  BlockMatrix<Real> entries;

  std::size_t size() const { return static_cast<std::size_t>(entries.rows()); }
  std::size_t end() const { return start + size(); }

  static Block scalar(std::size_t start, Complex<Real> a) {
    Block b{start, BlockMatrix<Real>(1, 1)};
    b.entries(0, 0) = a;
    return b;
  }

  static Block pair(std::size_t start, Complex<Real> a, Complex<Real> b, Complex<Real> c,
                    Complex<Real> d) {
    Block blk{start, BlockMatrix<Real>(2, 2)};
    blk.entries << a, b, c, d;
    return blk;
  }
};

/// A block-diagonal N x N matrix stored as an ordered tiling of [0, N).
template <typename Real>
struct BlockDiagonalFactor {
  std::size_t dim = 0;
  std::vector<Block<Real>> blocks;

  static BlockDiagonalFactor identity(std::size_t dim) {
    BlockDiagonalFactor f{dim, {}};
    for (std::size_t k = 0; k < dim; ++k) f.blocks.push_back(Block<Real>::scalar(k, Complex<Real>(1)));
    return f;
  }

  static BlockDiagonalFactor diagonal(std::span<const Complex<Real>> values) {
    BlockDiagonalFactor f{values.size(), {}};
    for (std::size_t k = 0; k < values.size(); ++k) f.blocks.push_back(Block<Real>::scalar(k, values[k]));
    return f;
  }
};

/// A = F_1 F_2 ... F_L.
template <typename Real>
struct BlockFactorization {
  std::size_t dim = 0;
  std::vector<BlockDiagonalFactor<Real>> factors;

  std::size_t layers() const { return factors.size(); }
};

using Blockd = Block<double>;
using BlockDiagonalFactord = BlockDiagonalFactor<double>;
using BlockFactorizationd = BlockFactorization<double>;

namespace detail {

inline std::string where(std::size_t factor, std::size_t block) {
  return "factor " + std::to_string(factor) + ", block " + std::to_string(block);
}

template <typename Real>
void validate_factor(const BlockDiagonalFactor<Real>& f, std::size_t factor_index) {
  std::size_t cursor = 0;
  for (std::size_t j = 0; j < f.blocks.size(); ++j) {
    const auto& b = f.blocks[j];
    const auto rows = static_cast<std::size_t>(b.entries.rows());
    const auto cols = static_cast<std::size_t>(b.entries.cols());
    if (rows != cols || rows == 0)
      throw Error(ErrorCode::SizeMismatch, where(factor_index, j) + ": block entries are not square");
    if (rows > 2)
      throw Error(ErrorCode::OversizeBlock, where(factor_index, j) + ": block size " + std::to_string(rows));
    if (!all_finite(b.entries))
      throw Error(ErrorCode::NonFiniteEntry, where(factor_index, j) + ": non-finite entry");
    if (b.start < cursor)
      throw Error(ErrorCode::BlockOverlap, where(factor_index, j) + ": starts at " +
                                               std::to_string(b.start) + " but site " +
                                               std::to_string(cursor - 1) + " is already covered");
    if (b.start > cursor)
      throw Error(ErrorCode::BlockGap,
                  where(factor_index, j) + ": site " + std::to_string(cursor) + " is not covered");
    cursor = b.end();
  }
  if (cursor < f.dim)
    throw Error(ErrorCode::BlockGap, "factor " + std::to_string(factor_index) + ": site " +
                                         std::to_string(cursor) + " is not covered");
  if (cursor > f.dim)
    throw Error(ErrorCode::SizeMismatch, "factor " + std::to_string(factor_index) + ": blocks cover " +
                                             std::to_string(cursor) + " sites, dim is " +
                                             std::to_string(f.dim));
}

}  // namespace detail

/// Throws Error unless every factor tiles [0, dim) with contiguous 1x1/2x2 blocks.
template <typename Real>
void validate_factorization(const BlockFactorization<Real>& f) {
  if (f.dim == 0) throw Error(ErrorCode::SizeMismatch, "factorization has dim 0");
  if (f.factors.empty()) throw Error(ErrorCode::SizeMismatch, "factorization has no factors");
  for (std::size_t i = 0; i < f.factors.size(); ++i) {
    if (f.factors[i].dim != f.dim)
      throw Error(ErrorCode::SizeMismatch, "factor " + std::to_string(i) + " has dim " +
                                               std::to_string(f.factors[i].dim) + ", expected " +
                                               std::to_string(f.dim));
    detail::validate_factor(f.factors[i], i);
  }
}

template <typename Real>
Matrix<Real> to_dense(const BlockDiagonalFactor<Real>& f) {
  Matrix<Real> m = Matrix<Real>::Zero(f.dim, f.dim);
  for (const auto& b : f.blocks)
    m.block(b.start, b.start, b.size(), b.size()) = b.entries;
  return m;
}

/// m <- m * F, touching only the columns each block covers.
template <typename Real>
void multiply_right(Matrix<Real>& m, const BlockDiagonalFactor<Real>& f) {
  for (const auto& b : f.blocks) {
    if (b.size() == 1) {
      m.col(b.start) *= b.entries(0, 0);
    } else {
      const auto s = static_cast<Eigen::Index>(b.start);
      Matrix<Real> cols = m.middleCols(s, 2) * b.entries;
      m.middleCols(s, 2) = cols;
    }
  }
}

/// m <- F * m.
template <typename Real>
void multiply_left(const BlockDiagonalFactor<Real>& f, Matrix<Real>& m) {
  for (const auto& b : f.blocks) {
    if (b.size() == 1) {
      m.row(b.start) *= b.entries(0, 0);
    } else {
      const auto s = static_cast<Eigen::Index>(b.start);
      Matrix<Real> rows = b.entries * m.middleRows(s, 2);
      m.middleRows(s, 2) = rows;
    }
  }
}

/// Dense product F_1 F_2 ... F_L, accumulated left to right.
template <typename Real>
Matrix<Real> reconstruct(const BlockFactorization<Real>& f) {
  validate_factorization(f);
  Matrix<Real> m = Matrix<Real>::Identity(f.dim, f.dim);
  for (const auto& factor : f.factors) multiply_right(m, factor);
  return m;
}

/// Same product accumulated right to left.
template <typename Real>
Matrix<Real> reconstruct_right_to_left(const BlockFactorization<Real>& f) {
  validate_factorization(f);
  Matrix<Real> m = Matrix<Real>::Identity(f.dim, f.dim);
  for (auto it = f.factors.rbegin(); it != f.factors.rend(); ++it) multiply_left(*it, m);
  return m;
}

/// Smallest w with |a_ij| <= threshold for all |i - j| > w. The threshold is
/// relative_zero * max|a_ij|; 0 means exact zeros.
template <typename Derived>
std::size_t bandwidth(const Eigen::MatrixBase<Derived>& expr, double relative_zero = 0.0) {
  const typename Derived::PlainObject a = expr;
  require_square(a, "bandwidth");
  const double cutoff = relative_zero > 0.0 ? relative_zero * static_cast<double>(a.cwiseAbs().maxCoeff()) : 0.0;
  std::size_t w = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (static_cast<double>(std::abs(a(i, j))) > cutoff)
        w = std::max<std::size_t>(w, static_cast<std::size_t>(std::abs(i - j)));
  return w;
}

/// Threshold used for matrices that went through floating-point products.
inline constexpr double kReconstructedZero = 1e-14;

inline bool is_permutation(std::span<const std::size_t> p) {
  std::vector<bool> seen(p.size(), false);
  for (auto v : p) {
    if (v >= p.size() || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

/// The permutation matrix P with P_{i, p[i]} = 1, so (P A)_{i,:} = A_{p[i],:}.
template <typename Real>
Matrix<Real> permutation_matrix(std::span<const std::size_t> p) {
  if (!is_permutation(p)) throw Error(ErrorCode::LengthMismatch, "not a permutation");
  Matrix<Real> m = Matrix<Real>::Zero(p.size(), p.size());
  for (std::size_t i = 0; i < p.size(); ++i) m(i, p[i]) = Complex<Real>(1);
  return m;
}

template <typename Real>
Matrix<Real> permute_rows(std::span<const std::size_t> p, const Matrix<Real>& a) {
  Matrix<Real> out(a.rows(), a.cols());
  for (std::size_t i = 0; i < p.size(); ++i) out.row(i) = a.row(p[i]);
  return out;
}

/// Result of stripping a permutation and a diagonal factor from P * A * D.
template <typename Real>
struct Simplified {
  Matrix<Real> matrix;      // P * A
  Complex<Real> prefactor;  // prod_i d_i
};

/// per(P A D) = prefactor * per(P A); per(P) = 1 is folded in and D is
/// pulled out as the product of its diagonal.
template <typename Real>
Simplified<Real> apply_simplification_rules(std::span<const std::size_t> p, const Matrix<Real>& a,
                                            std::span<const Complex<Real>> d) {
  require_square(a, "apply_simplification_rules");
  const auto n = static_cast<std::size_t>(a.rows());
  if (p.size() != n || d.size() != n)
    throw Error(ErrorCode::LengthMismatch, "permutation, matrix and diagonal sizes disagree");
  if (!is_permutation(p)) throw Error(ErrorCode::LengthMismatch, "p is not a permutation");
  Complex<Real> prefactor(1);
  for (const auto& di : d) prefactor *= di;
  return {permute_rows<Real>(p, a), prefactor};
}

/// P A P^T, i.e. out_{ij} = a_{p[i], p[j]}. Leaves the permanent unchanged.
template <typename Real>
Matrix<Real> permute_symmetric(std::span<const std::size_t> p, const Matrix<Real>& a) {
  require_square(a, "permute_symmetric");
  if (p.size() != static_cast<std::size_t>(a.rows()) || !is_permutation(p))
    throw Error(ErrorCode::LengthMismatch, "p is not a permutation of the matrix indices");
  Matrix<Real> out(a.rows(), a.cols());
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < p.size(); ++j) out(i, j) = a(p[i], p[j]);
  return out;
}

}  // namespace mpsperm
