#pragma once

#include <vector>

#include "fracafd/poafd.hpp"

namespace fracafd::oracles {

/// Uniform grid on [-extent, extent].
struct OracleGrid {
  double spacing = 0.01;
  double extent = 50.0;

  void validate() const;
  std::vector<double> nodes() const;
};

/// int K_{alpha, q.t}(q.x - z) K_{alpha, p.t}(p.x - z) dz, integrated cell by
/// cell over the grid window plus power-law-bounded tails beyond it.
double convolution_gram_oracle(double alpha, const HalfSpacePoint& q, const HalfSpacePoint& p,
                               const OracleGrid& grid);

/// Poisson Gram on the frequency side:
///   c^2 int G_sigma(q.t v) G_sigma(p.t v) cos(2 pi (q.x - p.x) v) dv.
double plancherel_gram_oracle(double sigma, const HalfSpacePoint& q, const HalfSpacePoint& p);

struct FunctionalGramSchmidt {
  std::vector<double> nodes;
  /// orthonormal[k][i] = E_k(nodes[i]).
  std::vector<std::vector<double>> orthonormal;
  /// a_matrix[i][j] = <K~_{q_j}, E_i> on the grid (upper-triangular).
  std::vector<std::vector<double>> a_matrix;
};

/// Modified Gram-Schmidt on sampled normalized kernels with trapezoidal
/// inner products. Throws DegeneracyError on rank deficiency.
FunctionalGramSchmidt functional_gs_oracle(const KernelFamily& family, const std::vector<HalfSpacePoint>& params,
                                           const OracleGrid& grid);

/// Best preortho_objective over every node of the dense grid (same tie rule
/// as select_next).
HalfSpacePoint exhaustive_argmax_oracle(const PoafdState& state, const SearchConfig& dense_grid);

/// |<K_p, E_q>| = |K(p, q)| / ||K_q|| for each q.
std::vector<double> boundary_decay_profile(const GramContext& ctx, const HalfSpacePoint& p,
                                           const std::vector<HalfSpacePoint>& qs);

}  // namespace fracafd::oracles
