#pragma once

#include <algorithm>
#include <array>
#include <limits>
#include <optional>
#include <ostream>
#include <string>

#include "mpsperm/factorization.hpp"
#include "mpsperm/types.hpp"

namespace mpsperm {

/// Largest n for which every C(n, k) is an exactly representable double.
inline constexpr std::size_t kBinomialMax = 56;

/// C(n, k) from an additive Pascal table; exact for n <= 56.
inline double binomial(std::size_t n, std::size_t k) {
  if (n > kBinomialMax || k > n)
    throw Error(ErrorCode::OutOfRange,
                "binomial(" + std::to_string(n) + ", " + std::to_string(k) + ") outside supported range");
  static const auto table = [] {
    std::array<std::array<double, kBinomialMax + 1>, kBinomialMax + 1> t{};
    for (std::size_t i = 0; i <= kBinomialMax; ++i) {
      t[i][0] = 1.0;
      for (std::size_t j = 1; j <= i; ++j) t[i][j] = t[i - 1][j - 1] + (j < i ? t[i - 1][j] : 0.0);
    }
    return t;
  }();
  return table[n][k];
}

/// Diagonal gate of a 1x1 block (a): |n> -> a^n |n>. Output levels above
/// d_in (when d_out > d_in) are zero-padded.
template <typename Real>
struct SingleSiteGate {
  std::size_t site = 0;
  std::size_t d_in = 0;
  std::size_t d_out = 0;
  Vector<Real> diag;  // d_in + 1 entries, diag[n] = a^n
};

/// Two-site gate of a 2x2 block, stored densely as a ((d_out+1)^2) x ((d_in+1)^2)
/// matrix. Row (p, q) -> p * (d_out + 1) + q, column (m, n) -> m * (d_in + 1) + n.
template <typename Real>
struct TwoSiteGate {
  std::size_t site = 0;  // left site k; the gate acts on (k, k + 1)
  std::size_t d_in = 0;
  std::size_t d_out = 0;
  Matrix<Real> coeffs;

  std::size_t in_index(std::size_t m, std::size_t n) const { return m * (d_in + 1) + n; }
  std::size_t out_index(std::size_t p, std::size_t q) const { return p * (d_out + 1) + q; }

  /// coeffs[p][q][m][n] in the (n'_k, n'_{k+1}, n_k, n_{k+1}) convention.
  const Complex<Real>& operator()(std::size_t p, std::size_t q, std::size_t m, std::size_t n) const {
    return coeffs(static_cast<Eigen::Index>(out_index(p, q)), static_cast<Eigen::Index>(in_index(m, n)));
  }
};

using SingleSiteGated = SingleSiteGate<double>;
using TwoSiteGated = TwoSiteGate<double>;

namespace detail {

template <typename Real>
Vector<Real> powers(const Complex<Real>& x, std::size_t up_to) {
  Vector<Real> p(static_cast<Eigen::Index>(up_to + 1));
  p(0) = Complex<Real>(1);
  for (Eigen::Index i = 1; i < p.size(); ++i) p(i) = p(i - 1) * x;
  return p;
}

}  // namespace detail

template <typename Real>
SingleSiteGate<Real> build_single_site_gate(const Block<Real>& b, std::size_t site, std::size_t d_in,
                                            std::optional<std::size_t> d_out = std::nullopt) {
  if (b.size() != 1) throw Error(ErrorCode::WrongBlockSize, "single-site gate needs a 1x1 block");
  const std::size_t out = d_out.value_or(d_in);
  if (out < d_in)
    throw Error(ErrorCode::DegreeCapTooSmall, "single-site gate: d_out " + std::to_string(out) +
                                                  " < d_in " + std::to_string(d_in));
  return {site, d_in, out, detail::powers(b.entries(0, 0), d_in)};
}

/// Expands (a X_k + b X_{k+1})^m (c X_k + d X_{k+1})^n binomially for every
/// input pair (m, n) with m, n <= d_in:
///   |m, n> -> sum_{r<=m, s<=n} C(m,r) C(n,s) a^r b^{m-r} c^{n-s} d^s |r+n-s, m-r+s>.
/// Outputs with a component above d_out are dropped, which is lossless whenever
/// d_out >= min(2 d_in, degree_ceiling) and the state's total degree is at most
/// degree_ceiling.
template <typename Real>
TwoSiteGate<Real> build_two_site_gate(const Block<Real>& blk, std::size_t site, std::size_t d_in,
                                      std::size_t d_out,
                                      std::size_t degree_ceiling = std::numeric_limits<std::size_t>::max()) {
  if (blk.size() != 2) throw Error(ErrorCode::WrongBlockSize, "two-site gate needs a 2x2 block");
  const std::size_t required = std::min(2 * d_in, degree_ceiling);
  if (d_out < required)
    throw Error(ErrorCode::DegreeCapTooSmall, "two-site gate: d_out " + std::to_string(d_out) +
                                                  " < " + std::to_string(required));
  if (d_in > kBinomialMax)
    throw Error(ErrorCode::OutOfRange, "two-site gate: d_in " + std::to_string(d_in) + " exceeds 56");

  const auto pa = detail::powers(blk.entries(0, 0), d_in);
  const auto pb = detail::powers(blk.entries(0, 1), d_in);
  const auto pc = detail::powers(blk.entries(1, 0), d_in);
  const auto pd = detail::powers(blk.entries(1, 1), d_in);

  TwoSiteGate<Real> g{site, d_in, d_out, {}};
  const auto out_sq = static_cast<Eigen::Index>((d_out + 1) * (d_out + 1));
  const auto in_sq = static_cast<Eigen::Index>((d_in + 1) * (d_in + 1));
  g.coeffs = Matrix<Real>::Zero(out_sq, in_sq);
  for (std::size_t m = 0; m <= d_in; ++m) {
    for (std::size_t n = 0; n <= d_in; ++n) {
      const auto col = static_cast<Eigen::Index>(g.in_index(m, n));
      for (std::size_t r = 0; r <= m; ++r) {
        const Complex<Real> left = static_cast<Real>(binomial(m, r)) * pa(r) * pb(m - r);
        for (std::size_t s = 0; s <= n; ++s) {
          const std::size_t p = r + n - s;
          const std::size_t q = m - r + s;
          if (p > d_out || q > d_out) continue;
          const Complex<Real> right = static_cast<Real>(binomial(n, s)) * pc(n - s) * pd(s);
          g.coeffs(static_cast<Eigen::Index>(g.out_index(p, q)), col) += left * right;
        }
      }
    }
  }
  return g;
}

/// Text dump of the nonzero coefficients, one "p q <- m n : re im" line each.
template <typename Real>
std::ostream& dump_nonzeros(std::ostream& os, const TwoSiteGate<Real>& g) {
  os << "two-site gate at sites (" << g.site << ", " << g.site + 1 << "), d_in " << g.d_in << ", d_out "
     << g.d_out << "\n";
  for (std::size_t p = 0; p <= g.d_out; ++p)
    for (std::size_t q = 0; q <= g.d_out; ++q)
      for (std::size_t m = 0; m <= g.d_in; ++m)
        for (std::size_t n = 0; n <= g.d_in; ++n)
          if (const auto& c = g(p, q, m, n); c != Complex<Real>(0))
            os << "  " << p << " " << q << " <- " << m << " " << n << " : " << c.real() << " " << c.imag()
               << "\n";
  return os;
}

template <typename Real>
std::ostream& dump_nonzeros(std::ostream& os, const SingleSiteGate<Real>& g) {
  os << "single-site gate at site " << g.site << ", d_in " << g.d_in << ", d_out " << g.d_out << "\n";
  for (Eigen::Index n = 0; n < g.diag.size(); ++n)
    if (g.diag(n) != Complex<Real>(0))
      os << "  " << n << " : " << g.diag(n).real() << " " << g.diag(n).imag() << "\n";
  return os;
}

}  // namespace mpsperm
