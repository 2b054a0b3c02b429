#pragma once

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mpsperm/factorization.hpp"
#include "mpsperm/gates.hpp"
#include "mpsperm/mps.hpp"
#include "mpsperm/scaled_complex.hpp"

namespace mpsperm {

inline constexpr double kDefaultTolerance = 1e-12;

struct RunStats {
  std::size_t max_bond = 1;
  std::vector<std::size_t> per_layer_bonds;  // max D_k after each layer
  std::vector<std::size_t> per_layer_phys;   // degree cap d after each layer, measured on the state
  double wall_time = 0.0;                    // seconds
  std::size_t svd_count = 0;
  std::size_t truncated_rank_total = 0;      // singular values dropped over the whole run
};

template <typename Real>
struct PermanentResult {
  ScaledComplex<Real> permanent;
  RunStats stats;
};

/// Snapshot handed to EngineOptions::on_layer after each layer is normalized.
template <typename Real>
struct LayerReport {
  std::size_t layer = 0;
  const MatrixProductState<Real>& state;
};

template <typename Real>
struct EngineOptions {
  Real tolerance = static_cast<Real>(kDefaultTolerance);
  /// Apply each layer's blocks in descending site order. They commute, so the
  /// result must not change.
  bool reverse_block_order = false;
  std::function<void(const LayerReport<Real>&)> on_layer;
  std::function<void(std::size_t layer, const TwoSiteUpdate<Real>&)> on_svd;
  std::function<void(std::size_t layer, const TwoSiteGate<Real>&)> on_gate;
};

/// Output degree cap per layer: min(2^(i+1), n) for i = 0..l-1.
inline std::vector<std::size_t> degree_schedule(std::size_t n, std::size_t l) {
  std::vector<std::size_t> caps;
  caps.reserve(l);
  std::size_t cap = 2;
  for (std::size_t i = 0; i < l; ++i) {
    caps.push_back(std::min(cap, n));
    if (cap < n) cap *= 2;
  }
  return caps;
}

/// Runs the layered circuit Phi_{F_L} ... Phi_{F_1} on |1...1> as an MPS and
/// reads out the |1...1> amplitude, which equals per(F_1 F_2 ... F_L).
template <typename Real>
PermanentResult<Real> compute_permanent(const BlockFactorization<Real>& f, const EngineOptions<Real>& options) {
  validate_factorization(f);
  const auto started = std::chrono::steady_clock::now();
  const std::size_t n = f.dim;
  const auto caps = degree_schedule(n, f.layers());

  RunStats stats;
  auto state = init_all_ones_state<Real>(n);
  std::size_t d_in = 1;
  for (std::size_t layer = 0; layer < f.layers(); ++layer) {
    const std::size_t d_out = caps[layer];
    const auto& blocks = f.factors[layer].blocks;
    auto apply = [&](const Block<Real>& b) {
      if (b.size() == 1) {
        apply_single_site_gate(state, build_single_site_gate(b, b.start, d_in, d_out));
        return;
      }
      const auto gate = build_two_site_gate(b, b.start, d_in, d_out, n);
      if (options.on_gate) options.on_gate(layer, gate);
      auto update = apply_two_site_gate(state, gate, options.tolerance);
      ++stats.svd_count;
      stats.truncated_rank_total += update.full_rank - update.kept;
      if (options.on_svd) options.on_svd(layer, update);
    };
    if (options.reverse_block_order)
      std::for_each(blocks.rbegin(), blocks.rend(), apply);
    else
      std::for_each(blocks.begin(), blocks.end(), apply);

    for (std::size_t k = 0; k < n; ++k) {
      normalize_and_accumulate(state, k);
      if (state.sites[k].phys_dim() != d_out + 1)
        throw Error(ErrorCode::DimMismatch, "layer " + std::to_string(layer) + ": site " + std::to_string(k) +
                                                " has phys_dim " + std::to_string(state.sites[k].phys_dim()) +
                                                ", expected " + std::to_string(d_out + 1));
    }
    const auto bond = static_cast<std::size_t>(state.max_bond());
    stats.per_layer_bonds.push_back(bond);
    stats.per_layer_phys.push_back(d_out);
    stats.max_bond = std::max(stats.max_bond, bond);
    if (options.on_layer) options.on_layer(LayerReport<Real>{layer, state});
    d_in = d_out;
  }

  PermanentResult<Real> result{readout_all_ones(state), std::move(stats)};
  result.stats.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

template <typename Real>
PermanentResult<Real> compute_permanent(const BlockFactorization<Real>& f,
                                        Real tolerance = static_cast<Real>(kDefaultTolerance)) {
  EngineOptions<Real> options;
  options.tolerance = tolerance;
  return compute_permanent(f, options);
}

/// Upper bound on max_bond: prod_{i=1}^{L} (min(2^i, N) + 1).
inline double bond_bound(std::size_t n, std::size_t l) {
  double bound = 1.0;
  for (auto cap : degree_schedule(n, l)) bound *= static_cast<double>(cap + 1);
  return bound;
}

/// Polynomial-level reference: expands Phi_{F_L} ... Phi_{F_1}(X_1 ... X_N)
/// monomial by monomial, with no gates and no MPS, and returns the
/// coefficient of X_1 ... X_N. Testing only; N <= 8.
template <typename Real>
Complex<Real> compute_permanent_dense_reference(const BlockFactorization<Real>& f) {
  validate_factorization(f);
  if (f.dim > 8) throw Error(ErrorCode::TooLarge, "dense reference supports N <= 8");
  using Exponents = std::vector<unsigned>;
  using Polynomial = std::map<Exponents, Complex<Real>>;
  const std::size_t n = f.dim;

  Polynomial poly{{Exponents(n, 1u), Complex<Real>(1)}};
  for (const auto& factor : f.factors) {
    const Matrix<Real> dense = to_dense(factor);
    Polynomial next;
    for (const auto& [exponents, coeff] : poly) {
      // prod_i (sum_j F_ij X_j)^{n_i}, multiplied out one linear form at a time.
      Polynomial term{{Exponents(n, 0u), coeff}};
      for (std::size_t i = 0; i < n; ++i) {
        for (unsigned power = 0; power < exponents[i]; ++power) {
          Polynomial grown;
          for (const auto& [e, c] : term)
            for (std::size_t j = 0; j < n; ++j) {
              const auto& fij = dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
              if (fij == Complex<Real>(0)) continue;
              Exponents raised = e;
              ++raised[j];
              grown[raised] += c * fij;
            }
          term = std::move(grown);
        }
      }
      for (const auto& [e, c] : term) next[e] += c;
    }
    poly = std::move(next);
  }
  const auto it = poly.find(Exponents(n, 1u));
  return it == poly.end() ? Complex<Real>(0) : it->second;
}

}  // namespace mpsperm
