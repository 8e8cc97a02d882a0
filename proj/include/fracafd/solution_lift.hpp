#pragma once

#include <stdexcept>
#include <vector>

#include "fracafd/poafd.hpp"

namespace fracafd {

/// u(p) = sum_k c_k K~_{q_k}(p) on the upper half-plane.
class SolutionField {
 public:
  SolutionField(SparseRepresentation rep, const GramContext& ctx);

  const SparseRepresentation& representation() const { return rep_; }
  const GramContext& context() const { return *ctx_; }

 private:
  SparseRepresentation rep_;
  const GramContext* ctx_;
};

class NumericalInconsistency : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Heat: sum c_k K_{alpha, p.t + t_k}(x_k - p.x) / ||K_{q_k}||.
/// Poisson: sum c_k gram(q_k, p) / ||K_{q_k}||. Requires p.t > 0.
double evaluate_solution(const SolutionField& sol, const HalfSpacePoint& p);

/// Row-major u[i][j] = evaluate_solution((t_values[i], x_values[j])).
std::vector<std::vector<double>> evaluate_grid(const SolutionField& sol, const std::vector<double>& t_values,
                                               const std::vector<double>& x_values);

struct IsometryReport {
  double l2_norm_f = 0.0;
  double hk_norm_u = 0.0;
  double residual = 0.0;
};

/// hk_norm_u = sqrt(c^T G~ c); residual = sqrt(||f||^2 - hk_norm_u^2).
IsometryReport isometry_report(const SolutionField& sol, const DataFunction& f);

}  // namespace fracafd
