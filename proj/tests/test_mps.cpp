#include <random>

#include "doctest.h"

#include "mpsperm/gates.hpp"
#include "mpsperm/mps.hpp"
#include "support.hpp"

using namespace mpsperm;

namespace {

Matrixd random_rect(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Matrixd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = testing::random_complex(rng);
  return m;
}

MatrixProductStated random_state(std::size_t n, std::size_t phys, Eigen::Index bond, std::uint64_t seed) {
  MatrixProductStated s;
  s.sites.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Eigen::Index left = k == 0 ? 1 : bond;
    const Eigen::Index right = k + 1 == n ? 1 : bond;
    for (std::size_t p = 0; p < phys; ++p) s.sites[k].slices.push_back(random_rect(left, right, seed * 1000 + k * 10 + p));
  }
  return s;
}

/// Applies a two-site gate to a dense coefficient array directly.
DenseCoefficients<double> apply_dense(const DenseCoefficients<double>& in, const TwoSiteGated& g) {
  DenseCoefficients<double> out;
  out.dims = in.dims;
  out.dims[g.site] = out.dims[g.site + 1] = g.d_out + 1;
  std::size_t total = 1;
  for (auto d : out.dims) total *= d;
  out.values.assign(total, Complexd(0));
  for (std::size_t flat = 0; flat < in.values.size(); ++flat) {
    if (in.values[flat] == Complexd(0)) continue;
    auto levels = in.levels(flat);
    const std::size_t m = levels[g.site];
    const std::size_t n = levels[g.site + 1];
    for (std::size_t p = 0; p <= g.d_out; ++p)
      for (std::size_t q = 0; q <= g.d_out; ++q) {
        const Complexd c = g(p, q, m, n);
        if (c == Complexd(0)) continue;
        levels[g.site] = p;
        levels[g.site + 1] = q;
        out.values[out.flat_index(levels)] += c * in.values[flat];
      }
  }
  return out;
}

double max_diff(const DenseCoefficients<double>& a, const DenseCoefficients<double>& b) {
  REQUIRE(a.values.size() == b.values.size());
  double m = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

}  // namespace

TEST_CASE("init_all_ones_state") {
  const auto one = init_all_ones_state<double>(1);
  REQUIRE(one.size() == 1);
  CHECK(one.sites[0].slices[0](0, 0) == Complexd(0));
  CHECK(one.sites[0].slices[1](0, 0) == Complexd(1));

  const auto three = dense_coefficients(init_all_ones_state<double>(3));
  for (std::size_t flat = 0; flat < three.values.size(); ++flat)
    CHECK(three.values[flat] == Complexd(three.levels(flat) == std::vector<std::size_t>{1, 1, 1} ? 1 : 0));

  for (std::size_t n = 1; n <= 20; ++n) {
    const auto s = init_all_ones_state<double>(n);
    CHECK_NOTHROW(s.check_invariants());
    CHECK(readout_all_ones(s).to_complex() == Complexd(1));
  }
}

TEST_CASE("svd") {
  const auto id = svd(Matrixd::Identity(2, 2));
  CHECK(id.singular(0) == doctest::Approx(1.0));
  CHECK(id.singular(1) == doctest::Approx(1.0));

  Matrixd d = Matrixd::Zero(2, 2);
  d(0, 0) = 3.0;
  const auto dd = svd(d);
  CHECK(dd.singular(0) == doctest::Approx(3.0));
  CHECK(dd.singular(1) == 0.0);
  CHECK(retained_rank(dd.singular, 1e-12) == 1);
  CHECK(retained_rank(dd.singular, 0.0) == 2);

  for (auto [rows, cols] : std::vector<std::pair<int, int>>{{8, 5}, {5, 8}, {40, 33}, {1, 7}, {60, 60}}) {
    const Matrixd m = random_rect(rows, cols, static_cast<std::uint64_t>(rows * 100 + cols));
    const auto r = svd(m);
    const Matrixd back = r.u * r.singular.cast<Complexd>().asDiagonal() * r.v.adjoint();
    CAPTURE(rows);
    CAPTURE(cols);
    CHECK((back - m).norm() <= 1e-10 * m.norm());
    for (Eigen::Index i = 0; i + 1 < r.singular.size(); ++i) CHECK(r.singular(i) >= r.singular(i + 1));
    CHECK(r.singular.minCoeff() >= 0.0);
    const auto k = r.singular.size();
    CHECK((r.u.adjoint() * r.u - Matrixd::Identity(k, k)).norm() <= 1e-10);
    CHECK((r.v.adjoint() * r.v - Matrixd::Identity(k, k)).norm() <= 1e-10);
  }
  CHECK_THROWS_AS(svd(Matrixd(0, 3)), Error);
}

TEST_CASE("single-site gate on the MPS") {
  SUBCASE("identity gate leaves the state bitwise unchanged") {
    auto s = random_state(4, 3, 3, 5);
    const auto before = s;
    apply_single_site_gate(s, build_single_site_gate(Blockd::scalar(2, 1.0), 2, 2));
    for (std::size_t k = 0; k < 4; ++k)
      for (std::size_t p = 0; p < 3; ++p) CHECK(s.sites[k].slices[p] == before.sites[k].slices[p]);
  }
  SUBCASE("scaling a site of |1...1>") {
    auto s = init_all_ones_state<double>(5);
    apply_single_site_gate(s, build_single_site_gate(Blockd::scalar(0, 2.0), 0, 1));
    CHECK(readout_all_ones(s).to_complex() == Complexd(2));
    apply_single_site_gate(s, build_single_site_gate(Blockd::scalar(3, 0.0), 3, 1));
    CHECK(readout_all_ones(s).is_zero());
  }
  SUBCASE("padding keeps bonds") {
    auto s = random_state(3, 2, 2, 8);
    apply_single_site_gate(s, build_single_site_gate(Blockd::scalar(1, Complexd(0, 1)), 1, 1, 4));
    CHECK(s.sites[1].phys_dim() == 5);
    CHECK(s.sites[1].left_dim() == 2);
    CHECK(s.sites[1].right_dim() == 2);
    CHECK(s.sites[1].slices[4].isZero());
  }
  SUBCASE("dimension mismatch") {
    auto s = init_all_ones_state<double>(3);
    CHECK_THROWS_AS(apply_single_site_gate(s, build_single_site_gate(Blockd::scalar(0, 2.0), 0, 2)), Error);
  }
}

TEST_CASE("two-site gate on |11>") {
  SUBCASE("identity block") {
    auto s = init_all_ones_state<double>(2);
    apply_two_site_gate(s, build_two_site_gate(Blockd::pair(0, 1, 0, 0, 1), 0, 1, 2), 1e-12);
    CHECK(std::abs(readout_all_ones(s).to_complex() - Complexd(1)) <= 1e-15);
    const auto dense = dense_coefficients(s);
    for (std::size_t flat = 0; flat < dense.values.size(); ++flat) {
      const bool is_11 = dense.levels(flat) == std::vector<std::size_t>{1, 1};
      CHECK(std::abs(dense.values[flat] - Complexd(is_11 ? 1 : 0)) <= 1e-15);
    }
  }
  SUBCASE("general block gives ad + bc and the expanded product") {
    const Complexd a(1, 2), b(-1, 0.5), c(0.25, -2), d(3, 1);
    auto s = init_all_ones_state<double>(2);
    apply_two_site_gate(s, build_two_site_gate(Blockd::pair(0, a, b, c, d), 0, 1, 2), 1e-12);
    CHECK(std::abs(readout_all_ones(s).to_complex() - (a * d + b * c)) <= 1e-13);
    const auto dense = dense_coefficients(s);
    CHECK(std::abs(dense.at({2, 0}) - a * c) <= 1e-13);
    CHECK(std::abs(dense.at({1, 1}) - (a * d + b * c)) <= 1e-13);
    CHECK(std::abs(dense.at({0, 2}) - b * d) <= 1e-13);
  }
  SUBCASE("all-ones block") {
    auto s = init_all_ones_state<double>(2);
    apply_two_site_gate(s, build_two_site_gate(Blockd::pair(0, 1, 1, 1, 1), 0, 1, 2), 1e-12);
    CHECK(std::abs(readout_all_ones(s).to_complex() - Complexd(2)) <= 1e-14);
  }
  SUBCASE("dimension mismatch") {
    auto s = init_all_ones_state<double>(3);
    CHECK_THROWS_AS(apply_two_site_gate(s, build_two_site_gate(Blockd::pair(0, 1, 0, 0, 1), 0, 2, 4), 1e-12),
                    Error);
    CHECK_THROWS_AS(apply_two_site_gate(s, build_two_site_gate(Blockd::pair(2, 1, 0, 0, 1), 2, 1, 2), 1e-12),
                    Error);
  }
}

TEST_CASE("MPS gate application matches dense application") {
  std::mt19937_64 rng(4242);
  for (std::size_t n = 2; n <= 5; ++n)
    for (std::size_t d_in = 1; d_in <= 2; ++d_in) {
      const std::size_t d_out = 2 * d_in;  // <= 4
      for (std::size_t site = 0; site + 1 < n; ++site) {
        auto s = random_state(n, d_in + 1, 2, n * 100 + d_in * 10 + site);
        const auto g = build_two_site_gate(testing::random_pair_block(site, rng), site, d_in, d_out);
        const auto before = dense_coefficients(s);
        const Eigen::Index dl = s.sites[site].left_dim();
        const Eigen::Index dr = s.sites[site + 1].right_dim();
        const auto update = apply_two_site_gate(s, g, 0.0);
        CAPTURE(n);
        CAPTURE(site);
        CHECK_NOTHROW(s.check_invariants());
        // Bond growth bound.
        CHECK(static_cast<Eigen::Index>(update.kept) <=
              std::min(static_cast<Eigen::Index>(d_out + 1) * dl, static_cast<Eigen::Index>(d_out + 1) * dr));
        const auto expected = apply_dense(before, g);
        const auto after = dense_coefficients(s);
        double scale = 0;
        for (const auto& v : expected.values) scale = std::max(scale, std::abs(v));
        CHECK(max_diff(after, expected) <= 1e-10 * std::max(1.0, scale));

        // Re-MPS-ification of the dense result carries the same vector.
        const auto rebuilt = dense_coefficients(from_dense_coefficients(expected, 1e-13));
        CHECK(max_diff(rebuilt, expected) <= 1e-10 * std::max(1.0, scale));
      }
    }
}

TEST_CASE("split and recombine reproduces the gated tensor") {
  std::mt19937_64 rng(7);
  auto s = random_state(4, 3, 3, 21);
  const auto g = build_two_site_gate(testing::random_pair_block(1, rng), 1, 2, 4);
  // M = gate applied to B1 B2, computed densely over the two sites.
  const auto& b1 = s.sites[1];
  const auto& b2 = s.sites[2];
  std::vector<Matrixd> gated(25, Matrixd::Zero(b1.left_dim(), b2.right_dim()));
  for (std::size_t p = 0; p <= 4; ++p)
    for (std::size_t q = 0; q <= 4; ++q)
      for (std::size_t m = 0; m <= 2; ++m)
        for (std::size_t n = 0; n <= 2; ++n) gated[p * 5 + q] += g(p, q, m, n) * (b1.slices[m] * b2.slices[n]);
  apply_two_site_gate(s, g, 0.0);
  double norm = 0, err = 0;
  for (std::size_t p = 0; p <= 4; ++p)
    for (std::size_t q = 0; q <= 4; ++q) {
      const Matrixd recombined = s.sites[1].slices[p] * s.sites[2].slices[q];
      norm += gated[p * 5 + q].squaredNorm();
      err += (recombined - gated[p * 5 + q]).squaredNorm();
    }
  CHECK(std::sqrt(err) <= 1e-10 * std::sqrt(norm));
}

TEST_CASE("Schmidt bound after re-MPS-ification") {
  for (std::size_t n = 2; n <= 6; ++n) {
    const std::size_t d = 2;
    const auto dense = dense_coefficients(random_state(n, d + 1, 6, 300 + n));
    const auto s = from_dense_coefficients(dense, 1e-13);
    double bound = 1;
    for (std::size_t i = 0; i < n / 2; ++i) bound *= static_cast<double>(d + 1);
    for (std::size_t k = 0; k + 1 < n; ++k) CHECK(static_cast<double>(s.sites[k].right_dim()) <= bound);
  }
}

TEST_CASE("particle number is conserved from |1...1>") {
  std::mt19937_64 rng(123);
  const std::size_t n = 5;
  auto s = init_all_ones_state<double>(n);
  std::size_t d = 1;
  for (std::size_t layer = 0; layer < 3; ++layer) {
    const std::size_t d_out = std::min<std::size_t>(2 * d, n);
    const std::size_t offset = layer % 2;
    for (std::size_t k = 0; k < n;) {
      if (k >= offset && k + 1 < n) {
        apply_two_site_gate(s, build_two_site_gate(testing::random_pair_block(k, rng), k, d, d_out, n), 1e-12);
        k += 2;
      } else {
        apply_single_site_gate(s, build_single_site_gate(Blockd::scalar(k, testing::random_complex(rng)), k, d, d_out));
        k += 1;
      }
    }
    d = d_out;
  }
  const auto dense = dense_coefficients(s);
  double largest = 0;
  for (const auto& v : dense.values) largest = std::max(largest, std::abs(v));
  for (std::size_t flat = 0; flat < dense.values.size(); ++flat) {
    const auto levels = dense.levels(flat);
    std::size_t total = 0;
    for (auto l : levels) total += l;
    if (total != n) CHECK(std::abs(dense.values[flat]) <= 1e-12 * largest);
  }
}

TEST_CASE("normalize_and_accumulate") {
  SUBCASE("already normalized") {
    auto s = init_all_ones_state<double>(3);
    normalize_and_accumulate(s, 1);
    CHECK(s.log_scale == ScaledComplex<double>::one());
  }
  SUBCASE("uniform 1e6 entries") {
    auto s = init_all_ones_state<double>(2);
    for (auto& slice : s.sites[0].slices) slice.setConstant(1e6);
    normalize_and_accumulate(s, 0);
    CHECK(s.log_scale.exponent10() == 6);
    CHECK(std::abs(s.log_scale.mantissa() - Complexd(1)) <= 1e-15);
    for (const auto& slice : s.sites[0].slices) CHECK(slice(0, 0) == Complexd(1));
  }
  SUBCASE("readout unchanged on random states") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto s = random_state(6, 3, 4, 40 + seed);
      for (auto& slice : s.sites[2].slices) slice *= 1e8;
      const auto before = readout_all_ones(s).to_complex();
      for (std::size_t k = 0; k < s.size(); ++k) normalize_and_accumulate(s, k);
      const auto after = readout_all_ones(s).to_complex();
      CHECK(std::abs(after - before) <= 1e-12 * std::abs(before));
    }
  }
}

TEST_CASE("readout scales linearly and survives long chains") {
  auto s = init_all_ones_state<double>(3);
  s.sites[0].slices[1] *= Complexd(0, 3);
  CHECK(readout_all_ones(s).to_complex() == Complexd(0, 3));

  // 400 sites each carrying 1e3 overflow a double, not the scaled readout.
  auto big = init_all_ones_state<double>(400);
  for (auto& site : big.sites) site.slices[1] *= 1e3;
  const auto r = readout_all_ones(big);
  CHECK(r.exponent10() == 1200);
  CHECK(std::abs(r.mantissa() - Complexd(1)) <= 1e-9);
}

TEST_CASE("dense_coefficients size cap") {
  MatrixProductStated s;
  s.sites.resize(8);
  for (auto& site : s.sites) site.slices.assign(8, Matrixd::Zero(1, 1));
  CHECK_THROWS_AS(dense_coefficients(s), Error);
}
