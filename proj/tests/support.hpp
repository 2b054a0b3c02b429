#pragma once

// Test-only helpers. Everything here is written against plain loops so it
// stays independent of the library code it checks.

#include <cstdint>
#include <random>
#include <vector>

#include "mpsperm/factorization.hpp"
#include "mpsperm/types.hpp"

namespace mpsperm::testing {

inline Complexd random_complex(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double re = u(rng);
  const double im = u(rng);
  return {re, im};
}

inline Matrixd random_matrix(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Matrixd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = random_complex(rng);
  return m;
}

inline Blockd random_pair_block(std::size_t start, std::mt19937_64& rng) {
  const auto a = random_complex(rng);
  const auto b = random_complex(rng);
  const auto c = random_complex(rng);
  const auto d = random_complex(rng);
  return Blockd::pair(start, a, b, c, d);
}

/// Triple-loop product, no Eigen expression templates involved.
inline Matrixd naive_matmul(const Matrixd& a, const Matrixd& b) {
  Matrixd c(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      Complexd s(0);
      for (Eigen::Index k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

/// Dense matrix of a factor, filled entry by entry from its blocks.
inline Matrixd dense_factor(const BlockDiagonalFactord& f) {
  Matrixd m(static_cast<Eigen::Index>(f.dim), static_cast<Eigen::Index>(f.dim));
  m.setZero();
  for (const auto& b : f.blocks)
    for (std::size_t r = 0; r < b.size(); ++r)
      for (std::size_t c = 0; c < b.size(); ++c)
        m(static_cast<Eigen::Index>(b.start + r), static_cast<Eigen::Index>(b.start + c)) =
            b.entries(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  return m;
}

inline Matrixd naive_reconstruct(const BlockFactorizationd& f) {
  Matrixd m = dense_factor(f.factors.front());
  for (std::size_t i = 1; i < f.factors.size(); ++i) m = naive_matmul(m, dense_factor(f.factors[i]));
  return m;
}

inline double frobenius_relative(const Matrixd& a, const Matrixd& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace mpsperm::testing
