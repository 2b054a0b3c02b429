#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "mpsperm/gates.hpp"
#include "mpsperm/scaled_complex.hpp"
#include "mpsperm/types.hpp"

namespace mpsperm {

/// B^[k]: one D_{k-1} x D_k matrix per physical level n_k = 0..d.
template <typename Real>
struct SiteTensor {
  std::vector<Matrix<Real>> slices;

  std::size_t phys_dim() const { return slices.size(); }
  Eigen::Index left_dim() const { return slices.empty() ? 0 : slices.front().rows(); }
  Eigen::Index right_dim() const { return slices.empty() ? 0 : slices.front().cols(); }

  Real max_abs() const {
    Real m(0);
    for (const auto& s : slices)
      if (s.size() > 0) m = std::max(m, s.cwiseAbs().maxCoeff());
    return m;
  }
};

/// Chain of site tensors; the represented vector is
/// log_scale * sum_n B^[1]_{n_1} ... B^[N]_{n_N} |n_1 ... n_N>.
template <typename Real>
struct MatrixProductState {
  std::vector<SiteTensor<Real>> sites;
  ScaledComplex<Real> log_scale = ScaledComplex<Real>::one();

  std::size_t size() const { return sites.size(); }

  Eigen::Index max_bond() const {
    Eigen::Index m = 1;
    for (const auto& s : sites) m = std::max(m, s.right_dim());
    return m;
  }

  /// Throws DimMismatch if boundary or adjacent bond dimensions disagree.
  void check_invariants() const {
    if (sites.empty()) throw Error(ErrorCode::DimMismatch, "MPS has no sites");
    for (std::size_t k = 0; k < sites.size(); ++k) {
      const auto& s = sites[k];
      if (s.phys_dim() == 0) throw Error(ErrorCode::DimMismatch, "site " + std::to_string(k) + " is empty");
      for (const auto& slice : s.slices)
        if (slice.rows() != s.left_dim() || slice.cols() != s.right_dim() || slice.size() == 0)
          throw Error(ErrorCode::DimMismatch, "site " + std::to_string(k) + " has ragged slices");
      if (k + 1 < sites.size() && s.right_dim() != sites[k + 1].left_dim())
        throw Error(ErrorCode::DimMismatch, "bond " + std::to_string(k) + " dimensions disagree");
    }
    if (sites.front().left_dim() != 1 || sites.back().right_dim() != 1)
      throw Error(ErrorCode::DimMismatch, "boundary bond dimensions must be 1");
  }
};

template <typename Real>
struct SvdResult {
  Matrix<Real> u;           // rows x k, orthonormal columns
  RealVector<Real> singular;  // non-increasing, >= 0
  Matrix<Real> v;           // cols x k, orthonormal columns; m = u diag(s) v^H
  std::size_t rank = 0;
};

using MatrixProductStated = MatrixProductState<double>;
using SvdResultd = SvdResult<double>;

/// Thin SVD backed by Eigen's divide-and-conquer solver.
template <typename Derived>
auto svd(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  if (m.size() == 0) throw Error(ErrorCode::DimMismatch, "svd of an empty matrix");
  using ColMajor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::BDCSVD<ColMajor> solver(m.derived().template cast<Scalar>().eval(),
                                 Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::ConvergenceFailure, "svd did not converge (" + std::to_string(m.rows()) + "x" +
                                                   std::to_string(m.cols()) + ")");
  SvdResult<Real> out{solver.matrixU(), solver.singularValues(), solver.matrixV(), 0};
  out.rank = static_cast<std::size_t>(out.singular.size());
  if (!all_finite(out.u) || !all_finite(out.v) || !out.singular.allFinite())
    throw Error(ErrorCode::ConvergenceFailure, "svd produced non-finite factors");
  return out;
}

/// Number of singular values kept at relative tolerance `tolerance`:
/// those with sigma > tolerance * sigma_max, at least one. Tolerance 0 keeps all.
template <typename Real>
std::size_t retained_rank(const RealVector<Real>& singular, Real tolerance) {
  if (singular.size() == 0) return 0;
  if (tolerance <= Real(0)) return static_cast<std::size_t>(singular.size());
  const Real cutoff = tolerance * singular(0);
  std::size_t keep = 0;
  for (Eigen::Index i = 0; i < singular.size(); ++i)
    if (singular(i) > cutoff) ++keep;
  return std::max<std::size_t>(keep, 1);
}

/// |1 1 ... 1>: every site holds B_0 = 0, B_1 = 1 with unit bonds.
template <typename Real>
MatrixProductState<Real> init_all_ones_state(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::DimMismatch, "init_all_ones_state: n must be >= 1");
  MatrixProductState<Real> state;
  state.sites.resize(n);
  for (auto& site : state.sites) {
    site.slices.assign(2, Matrix<Real>::Zero(1, 1));
    site.slices[1](0, 0) = Complex<Real>(1);
  }
  return state;
}

/// Scales slice n by diag[n]; zero slices are appended up to d_out + 1 levels.
template <typename Real>
void apply_single_site_gate(MatrixProductState<Real>& state, const SingleSiteGate<Real>& g) {
  if (g.site >= state.size()) throw Error(ErrorCode::DimMismatch, "single-site gate site out of range");
  auto& site = state.sites[g.site];
  if (site.phys_dim() != g.d_in + 1 || static_cast<std::size_t>(g.diag.size()) != g.d_in + 1)
    throw Error(ErrorCode::DimMismatch, "single-site gate d_in " + std::to_string(g.d_in) +
                                            " does not match phys_dim " + std::to_string(site.phys_dim()) +
                                            " at site " + std::to_string(g.site));
  for (std::size_t n = 0; n <= g.d_in; ++n)
    if (g.diag(static_cast<Eigen::Index>(n)) != Complex<Real>(1)) site.slices[n] *= g.diag(static_cast<Eigen::Index>(n));
  site.slices.resize(g.d_out + 1, Matrix<Real>::Zero(site.left_dim(), site.right_dim()));
}

/// What a two-site update did to the bond between k and k + 1.
template <typename Real>
struct TwoSiteUpdate {
  std::size_t bond = 0;
  std::size_t full_rank = 0;  // min(rows, cols) of the regrouped matrix
  std::size_t kept = 0;
  RealVector<Real> singular;  // full spectrum, before truncation
};

/// Contracts B^[k] B^[k+1], applies the gate on the physical legs, regroups to
/// ((d_out+1) D_{k-1}) x ((d_out+1) D_{k+1}), splits by SVD and keeps the
/// singular values above tolerance * sigma_max. B'^[k] = U sigma, B'^[k+1] = V^H.
template <typename Real>
TwoSiteUpdate<Real> apply_two_site_gate(MatrixProductState<Real>& state, const TwoSiteGate<Real>& g,
                                        Real tolerance) {
  const std::size_t k = g.site;
  if (k + 1 >= state.size()) throw Error(ErrorCode::DimMismatch, "two-site gate sites out of range");
  auto& left = state.sites[k];
  auto& right = state.sites[k + 1];
  if (left.phys_dim() != g.d_in + 1 || right.phys_dim() != g.d_in + 1)
    throw Error(ErrorCode::DimMismatch, "two-site gate d_in " + std::to_string(g.d_in) +
                                            " does not match phys_dims " + std::to_string(left.phys_dim()) +
                                            ", " + std::to_string(right.phys_dim()) + " at sites " +
                                            std::to_string(k) + ", " + std::to_string(k + 1));
  if (left.right_dim() != right.left_dim())
    throw Error(ErrorCode::DimMismatch, "bond " + std::to_string(k) + " dimensions disagree");

  const Eigen::Index dl = left.left_dim();
  const Eigen::Index dr = right.right_dim();
  const auto in_levels = static_cast<Eigen::Index>(g.d_in + 1);
  const auto out_levels = static_cast<Eigen::Index>(g.d_out + 1);

  // theta row (m, n) holds the flattened D_{k-1} x D_{k+1} matrix B_m B_n.
  Matrix<Real> theta(in_levels * in_levels, dl * dr);
  for (Eigen::Index m = 0; m < in_levels; ++m)
    for (Eigen::Index n = 0; n < in_levels; ++n) {
      const Matrix<Real> pair = left.slices[m] * right.slices[n];
      theta.row(m * in_levels + n) = Eigen::Map<const Eigen::Matrix<Complex<Real>, 1, Eigen::Dynamic>>(
          pair.data(), dl * dr);
    }
  const Matrix<Real> gated = g.coeffs * theta;

  // Regroup to rows (p, alpha), cols (q, beta).
  Matrix<Real> grouped(out_levels * dl, out_levels * dr);
  for (Eigen::Index p = 0; p < out_levels; ++p)
    for (Eigen::Index q = 0; q < out_levels; ++q)
      for (Eigen::Index a = 0; a < dl; ++a)
        grouped.block(p * dl + a, q * dr, 1, dr) = gated.block(p * out_levels + q, a * dr, 1, dr);

  auto dec = svd(grouped);
  const std::size_t keep = retained_rank(dec.singular, tolerance);
  const auto kept = static_cast<Eigen::Index>(keep);

  left.slices.assign(static_cast<std::size_t>(out_levels), Matrix<Real>(dl, kept));
  right.slices.assign(static_cast<std::size_t>(out_levels), Matrix<Real>(kept, dr));
  for (Eigen::Index p = 0; p < out_levels; ++p) {
    left.slices[p] = dec.u.block(p * dl, 0, dl, kept) *
                     dec.singular.head(kept).template cast<Complex<Real>>().asDiagonal();
    right.slices[p] = dec.v.block(p * dr, 0, dr, kept).adjoint();
  }
  return {k, dec.rank, keep, std::move(dec.singular)};
}

/// Divides site tensor `site` by its largest entry magnitude and moves that
/// factor into log_scale. The represented vector does not change.
template <typename Real>
void normalize_and_accumulate(MatrixProductState<Real>& state, std::size_t site) {
  if (site >= state.size()) throw Error(ErrorCode::DimMismatch, "normalize: site out of range");
  auto& t = state.sites[site];
  const Real m = t.max_abs();
  if (m > Real(0) && m != Real(1)) {
    for (auto& s : t.slices) s /= m;
    state.log_scale *= Complex<Real>(m);
  }
}

/// Coefficient of |1 1 ... 1>: log_scale * B^[1]_1 B^[2]_1 ... B^[N]_1,
/// renormalizing the running row vector so long chains cannot overflow.
template <typename Real>
ScaledComplex<Real> readout_all_ones(const MatrixProductState<Real>& state) {
  for (std::size_t k = 0; k < state.size(); ++k)
    if (state.sites[k].phys_dim() < 2)
      throw Error(ErrorCode::DimMismatch, "readout: site " + std::to_string(k) + " has no level 1");
  ScaledComplex<Real> scale = state.log_scale;
  Eigen::Matrix<Complex<Real>, 1, Eigen::Dynamic> row = Eigen::Matrix<Complex<Real>, 1, Eigen::Dynamic>::Ones(1);
  for (const auto& site : state.sites) {
    row = (row * site.slices[1]).eval();
    const Real m = row.cwiseAbs().maxCoeff();
    if (m == Real(0)) return ScaledComplex<Real>();
    row /= m;
    scale *= Complex<Real>(m);
  }
  return scale * row(0);
}

/// Full coefficient array over (n_1, ..., n_N), row-major with n_N fastest.
template <typename Real>
struct DenseCoefficients {
  std::vector<std::size_t> dims;
  std::vector<Complex<Real>> values;

  std::size_t flat_index(const std::vector<std::size_t>& levels) const {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < dims.size(); ++k) idx = idx * dims[k] + levels[k];
    return idx;
  }
  const Complex<Real>& at(const std::vector<std::size_t>& levels) const { return values[flat_index(levels)]; }

  /// Level tuple of a flat index.
  std::vector<std::size_t> levels(std::size_t flat) const {
    std::vector<std::size_t> out(dims.size());
    for (std::size_t k = dims.size(); k-- > 0;) {
      out[k] = flat % dims[k];
      flat /= dims[k];
    }
    return out;
  }
};

inline constexpr std::size_t kDenseCoefficientLimit = 10'000'000;

/// Expands the MPS (including log_scale) into all coefficients. Testing only.
template <typename Real>
DenseCoefficients<Real> dense_coefficients(const MatrixProductState<Real>& state) {
  state.check_invariants();
  DenseCoefficients<Real> out;
  std::size_t total = 1;
  for (const auto& s : state.sites) {
    out.dims.push_back(s.phys_dim());
    total *= s.phys_dim();
    if (total > kDenseCoefficientLimit)
      throw Error(ErrorCode::TooLarge, "dense_coefficients: more than 1e7 coefficients");
  }
  // Row vectors for every prefix configuration, extended one site at a time.
  using Row = Eigen::Matrix<Complex<Real>, 1, Eigen::Dynamic>;
  std::vector<Row> prefixes{Row::Ones(1)};
  for (const auto& site : state.sites) {
    std::vector<Row> next;
    next.reserve(prefixes.size() * site.phys_dim());
    for (const auto& p : prefixes)
      for (const auto& slice : site.slices) next.push_back(p * slice);
    prefixes = std::move(next);
  }
  const Complex<Real> scale = state.log_scale.to_complex();
  out.values.reserve(total);
  for (const auto& p : prefixes) out.values.push_back(scale * p(0));
  return out;
}

/// Left-to-right SVD sweep turning a dense coefficient array into an MPS,
/// keeping singular values above tolerance * sigma_max at each cut. Testing only.
template <typename Real>
MatrixProductState<Real> from_dense_coefficients(const DenseCoefficients<Real>& dense, Real tolerance) {
  const std::size_t n = dense.dims.size();
  if (n == 0) throw Error(ErrorCode::DimMismatch, "from_dense_coefficients: no sites");
  MatrixProductState<Real> state;
  state.sites.resize(n);
  std::size_t rest = dense.values.size();
  Matrix<Real> remainder = Eigen::Map<const Matrix<Real>>(dense.values.data(), 1, static_cast<Eigen::Index>(rest));
  Eigen::Index bond = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const auto d = static_cast<Eigen::Index>(dense.dims[k]);
    rest /= dense.dims[k];
    const auto cols = static_cast<Eigen::Index>(rest);
    // (bond, d * cols) -> (bond * d, cols) is a reinterpretation in row-major layout.
    Matrix<Real> grouped = Eigen::Map<const Matrix<Real>>(remainder.data(), bond * d, cols);
    auto dec = svd(grouped);
    const auto keep = static_cast<Eigen::Index>(retained_rank(dec.singular, tolerance));
    auto& site = state.sites[k];
    site.slices.assign(static_cast<std::size_t>(d), Matrix<Real>(bond, keep));
    for (Eigen::Index a = 0; a < bond; ++a)
      for (Eigen::Index level = 0; level < d; ++level)
        site.slices[static_cast<std::size_t>(level)].row(a) = dec.u.block(a * d + level, 0, 1, keep);
    remainder = dec.singular.head(keep).template cast<Complex<Real>>().asDiagonal() *
                dec.v.leftCols(keep).adjoint();
    bond = keep;
  }
  const auto d = static_cast<Eigen::Index>(dense.dims[n - 1]);
  auto& last = state.sites[n - 1];
  last.slices.assign(static_cast<std::size_t>(d), Matrix<Real>(bond, 1));
  for (Eigen::Index level = 0; level < d; ++level) last.slices[static_cast<std::size_t>(level)] = remainder.col(level);
  return state;
}

}  // namespace mpsperm
