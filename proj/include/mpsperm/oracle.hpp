#pragma once

// Brute-force permanents. These are test equipment: independent of the MPS
// engine and capped in size so nobody starts a multi-hour run by accident.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <vector>

#include "mpsperm/factorization.hpp"
#include "mpsperm/types.hpp"

namespace mpsperm {

inline constexpr Eigen::Index kNaiveMaxSize = 10;
inline constexpr Eigen::Index kRyserMaxSize = 24;

/// Sum over all N! permutations of prod_i a_{i, pi(i)}.
template <typename Derived>
auto permanent_naive(const Eigen::MatrixBase<Derived>& expr) -> typename Derived::Scalar {
  const typename Derived::PlainObject a = expr;
  using Scalar = typename Derived::Scalar;
  require_square(a, "permanent_naive");
  const Eigen::Index n = a.rows();
  if (n > kNaiveMaxSize)
    throw Error(ErrorCode::TooLarge, "permanent_naive: N = " + std::to_string(n) + " exceeds 10");
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  Scalar total(0);
  do {
    Scalar term(1);
    for (Eigen::Index i = 0; i < n; ++i) term *= a(i, perm[static_cast<std::size_t>(i)]);
    total += term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

/// Ryser's formula (-1)^N sum_S (-1)^{|S|} prod_i sum_{j in S} a_ij, walking
/// subsets in Gray-code order so each step updates the row sums by one column.
template <typename Derived>
auto permanent_ryser(const Eigen::MatrixBase<Derived>& expr) -> typename Derived::Scalar {
  const typename Derived::PlainObject a = expr;
  using Scalar = typename Derived::Scalar;
  require_square(a, "permanent_ryser");
  const Eigen::Index n = a.rows();
  if (n > kRyserMaxSize)
    throw Error(ErrorCode::TooLarge, "permanent_ryser: N = " + std::to_string(n) + " exceeds 24");

  std::vector<Scalar> row_sums(static_cast<std::size_t>(n), Scalar(0));
  std::vector<bool> in_subset(static_cast<std::size_t>(n), false);
  Scalar total(0);
  int subset_size = 0;
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t g = 1; g < count; ++g) {
    // Gray code g ^ (g >> 1) flips exactly the bit at the lowest set bit of g.
    const auto j = static_cast<Eigen::Index>(std::countr_zero(g));
    const auto ju = static_cast<std::size_t>(j);
    if (in_subset[ju]) {
      for (Eigen::Index i = 0; i < n; ++i) row_sums[static_cast<std::size_t>(i)] -= a(i, j);
      --subset_size;
    } else {
      for (Eigen::Index i = 0; i < n; ++i) row_sums[static_cast<std::size_t>(i)] += a(i, j);
      ++subset_size;
    }
    in_subset[ju] = !in_subset[ju];

    Scalar product(1);
    for (const auto& s : row_sums) product *= s;
    if ((n - subset_size) % 2 == 0)
      total += product;
    else
      total -= product;
  }
  return total;
}

/// Three-term recurrence p_k = a_kk p_{k-1} + a_{k,k-1} a_{k-1,k} p_{k-2}.
template <typename Derived>
auto permanent_tridiagonal(const Eigen::MatrixBase<Derived>& expr) -> typename Derived::Scalar {
  const typename Derived::PlainObject a = expr;
  using Scalar = typename Derived::Scalar;
  require_square(a, "permanent_tridiagonal");
  if (bandwidth(a) > 1) throw Error(ErrorCode::NotTridiagonal, "permanent_tridiagonal: bandwidth > 1");
  Scalar before_previous(1);
  Scalar previous(1);
  for (Eigen::Index k = 0; k < a.rows(); ++k) {
    Scalar current = a(k, k) * previous;
    if (k > 0) current += a(k, k - 1) * a(k - 1, k) * before_previous;
    before_previous = previous;
    previous = current;
  }
  return previous;
}

}  // namespace mpsperm
