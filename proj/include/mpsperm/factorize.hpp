#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <random>
#include <vector>

#include <Eigen/SVD>

#include "mpsperm/factorization.hpp"
#include "mpsperm/types.hpp"

namespace mpsperm {

inline constexpr Eigen::Index kDecomposeMaxSize = 8;

/// sigma_min / sigma_max at or below this is rejected as singular.
inline constexpr double kSingularThreshold = 1e-12;

template <typename Real>
struct Decomposition {
  BlockFactorization<Real> factorization;
  Real condition_number = 0;
};

namespace detail {

template <typename Real>
using Mat2 = Eigen::Matrix<Complex<Real>, 2, 2, Eigen::RowMajor>;

/// Identity except for one 2x2 block on (start, start + 1).
template <typename Real>
BlockDiagonalFactor<Real> elementary_factor(std::size_t dim, std::size_t start, const Mat2<Real>& block) {
  BlockDiagonalFactor<Real> f{dim, {}};
  for (std::size_t k = 0; k < start; ++k) f.blocks.push_back(Block<Real>::scalar(k, Complex<Real>(1)));
  f.blocks.push_back(Block<Real>::pair(start, block(0, 0), block(0, 1), block(1, 0), block(1, 1)));
  for (std::size_t k = start + 2; k < dim; ++k) f.blocks.push_back(Block<Real>::scalar(k, Complex<Real>(1)));
  return f;
}

template <typename Real>
struct RowOp {
  std::size_t start;
  Mat2<Real> op;
};

}  // namespace detail

namespace detail {

/// Clears the strict lower triangle of r column by column, bottom-up, with
/// adjacent Givens rotations applied from the left. Returns the rotations in
/// application order, so r_out = G_K ... G_1 r_in.
template <typename Real>
std::vector<RowOp<Real>> givens_triangularize(Matrix<Real>& r) {
  const Eigen::Index n = r.rows();
  std::vector<RowOp<Real>> rotations;
  for (Eigen::Index c = 0; c + 1 < n; ++c) {
    for (Eigen::Index i = n - 1; i > c; --i) {
      const Complex<Real> x = r(i - 1, c);
      const Complex<Real> y = r(i, c);
      if (y == Complex<Real>(0)) continue;
      const Real norm = std::hypot(std::abs(x), std::abs(y));
      Mat2<Real> g;
      g << std::conj(x) / norm, std::conj(y) / norm, -y / norm, x / norm;
      Matrix<Real> rows = g * r.middleRows(i - 1, 2);
      r.middleRows(i - 1, 2) = rows;
      r(i, c) = Complex<Real>(0);
      rotations.push_back({static_cast<std::size_t>(i - 1), g});
    }
  }
  return rotations;
}

}  // namespace detail

/// Writes an invertible n x n matrix (n <= 8) as a product of factors that are
/// the identity except for one adjacent 2x2 block, plus one diagonal factor.
///
/// With m = U S V^H, both unitaries are brought to diagonal form by adjacent
/// Givens rotations (a triangular unitary is diagonal):
///   G_K ... G_1 U = P,   H_J ... H_1 V = Q,
/// so m = G_1^H ... G_K^H (P S Q^H) H_J ... H_1. Every factor except the
/// diagonal one is unitary, which keeps the permanent engine well conditioned.
template <typename Real>
Decomposition<Real> decompose_dense_block(const Matrix<Real>& m) {
  require_square(m, "decompose_dense_block");
  const Eigen::Index n = m.rows();
  if (n > kDecomposeMaxSize)
    throw Error(ErrorCode::TooLarge, "decompose_dense_block: n = " + std::to_string(n) + " exceeds 8");
  if (!all_finite(m)) throw Error(ErrorCode::NonFiniteEntry, "decompose_dense_block: non-finite entry");

  using Dense = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::JacobiSVD<Dense> jacobi(Dense(m), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RealVector<Real>& sigma = jacobi.singularValues();
  const Real smax = sigma(0);
  const Real smin = sigma(sigma.size() - 1);
  if (smax == Real(0) || smin <= static_cast<Real>(kSingularThreshold) * smax)
    throw Error(ErrorCode::Singular, "decompose_dense_block: matrix is singular (sigma_min/sigma_max = " +
                                         std::to_string(static_cast<double>(smax > 0 ? smin / smax : 0)) + ")");

  const auto dim = static_cast<std::size_t>(n);
  Decomposition<Real> out{{dim, {}}, smax / smin};
  if (n == 1) {
    out.factorization.factors.push_back(
        BlockDiagonalFactor<Real>{1, {Block<Real>::scalar(0, m(0, 0))}});
    return out;
  }
  if (n == 2) {
    out.factorization.factors.push_back(
        detail::elementary_factor<Real>(2, 0, detail::Mat2<Real>(m)));
    return out;
  }

  Matrix<Real> u = jacobi.matrixU();
  Matrix<Real> v = jacobi.matrixV();
  const auto left = detail::givens_triangularize(u);
  const auto right = detail::givens_triangularize(v);

  auto& factors = out.factorization.factors;
  for (const auto& op : left)
    factors.push_back(detail::elementary_factor<Real>(dim, op.start, op.op.adjoint()));
  std::vector<Complex<Real>> diagonal(dim);
  for (Eigen::Index k = 0; k < n; ++k)
    diagonal[static_cast<std::size_t>(k)] = u(k, k) * sigma(k) * std::conj(v(k, k));
  factors.push_back(BlockDiagonalFactor<Real>::diagonal(diagonal));
  for (auto it = right.rbegin(); it != right.rend(); ++it)
    factors.push_back(detail::elementary_factor<Real>(dim, it->start, it->op));
  return out;
}

/// Reverse Cuthill-McKee ordering of the symmetrized pattern {|a_ij| > zero_threshold}.
/// Position i of the result holds the original index placed there, so the
/// reordered matrix is permute_symmetric(result, a).
template <typename Derived>
std::vector<std::size_t> rcm_permutation(const Eigen::MatrixBase<Derived>& expr, double zero_threshold = 0.0) {
  const typename Derived::PlainObject a = expr;
  require_square(a, "rcm_permutation");
  const auto n = static_cast<std::size_t>(a.rows());
  std::vector<std::vector<std::size_t>> adjacent(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      if (static_cast<double>(std::abs(a(ii, jj))) > zero_threshold ||
          static_cast<double>(std::abs(a(jj, ii))) > zero_threshold) {
        adjacent[i].push_back(j);
        adjacent[j].push_back(i);
      }
    }
  auto degree = [&](std::size_t v) { return adjacent[v].size(); };
  for (auto& nbrs : adjacent)
    std::stable_sort(nbrs.begin(), nbrs.end(), [&](auto x, auto y) { return degree(x) < degree(y); });

  // Breadth-first level structure from `root`, restricted to unvisited vertices.
  std::vector<bool> placed(n, false);
  auto levels_from = [&](std::size_t root) {
    std::vector<std::vector<std::size_t>> levels{{root}};
    std::vector<bool> seen = placed;
    seen[root] = true;
    while (true) {
      std::vector<std::size_t> next;
      for (auto v : levels.back())
        for (auto w : adjacent[v])
          if (!seen[w]) {
            seen[w] = true;
            next.push_back(w);
          }
      if (next.empty()) break;
      levels.push_back(std::move(next));
    }
    return levels;
  };

  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (placed[seed]) continue;
    // Minimum-degree start in this component, pushed outward to a pseudo-peripheral vertex.
    std::size_t root = seed;
    for (auto level : levels_from(seed))
      for (auto v : level)
        if (degree(v) < degree(root)) root = v;
    auto levels = levels_from(root);
    while (true) {
      const auto& last = levels.back();
      const std::size_t candidate =
          *std::min_element(last.begin(), last.end(), [&](auto x, auto y) { return degree(x) < degree(y); });
      auto trial = levels_from(candidate);
      if (trial.size() <= levels.size()) break;
      root = candidate;
      levels = std::move(trial);
    }

    std::deque<std::size_t> queue{root};
    placed[root] = true;
    while (!queue.empty()) {
      const auto v = queue.front();
      queue.pop_front();
      order.push_back(v);
      for (auto w : adjacent[v])
        if (!placed[w]) {
          placed[w] = true;
          queue.push_back(w);
        }
    }
  }
  std::reverse(order.begin(), order.end());
  return order;
}

namespace detail {

/// Uniform in [lo, hi) from the top 53 bits, identical on every standard library.
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

}  // namespace detail

/// Random factorization: each factor is tiled left to right, opening a 2x2
/// block with probability block_density wherever two sites remain, and a 1x1
/// block otherwise. Entries have real and imaginary parts uniform in [-1, 1).
template <typename Real = double>
BlockFactorization<Real> generate_random_factorization(std::size_t n, std::size_t l, std::uint64_t seed,
                                                       double block_density) {
  if (n == 0 || l == 0) throw Error(ErrorCode::SizeMismatch, "generate: n and l must be >= 1");
  if (!(block_density >= 0.0 && block_density <= 1.0))
    throw Error(ErrorCode::OutOfRange, "generate: density must lie in [0, 1]");
  std::mt19937_64 rng(seed);
  auto entry = [&] {
    const double re = detail::uniform(rng, -1.0, 1.0);
    const double im = detail::uniform(rng, -1.0, 1.0);
    return Complex<Real>(static_cast<Real>(re), static_cast<Real>(im));
  };
  BlockFactorization<Real> f{n, {}};
  for (std::size_t layer = 0; layer < l; ++layer) {
    BlockDiagonalFactor<Real> factor{n, {}};
    std::size_t site = 0;
    while (site < n) {
      const bool pair = site + 1 < n && detail::uniform(rng, 0.0, 1.0) < block_density;
      if (pair) {
        const auto a = entry();
        const auto b = entry();
        const auto c = entry();
        const auto d = entry();
        factor.blocks.push_back(Block<Real>::pair(site, a, b, c, d));
        site += 2;
      } else {
        factor.blocks.push_back(Block<Real>::scalar(site, entry()));
        site += 1;
      }
    }
    f.factors.push_back(std::move(factor));
  }
  return f;
}

}  // namespace mpsperm
