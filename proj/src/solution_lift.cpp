#include "fracafd/solution_lift.hpp"

#include <cmath>

#include "fracafd/parallel.hpp"

namespace fracafd {

SolutionField::SolutionField(SparseRepresentation rep, const GramContext& ctx) : rep_(std::move(rep)), ctx_(&ctx) {
  if (!(rep_.family == ctx.family())) throw DomainError("SolutionField: representation and context families differ");
  const std::size_t n = rep_.params.size();
  if (rep_.kernel_coeffs.size() != n || rep_.kernel_norms.size() != n)
    throw DomainError("SolutionField: incomplete representation");
}

double evaluate_solution(const SolutionField& sol, const HalfSpacePoint& p) {
  if (!(p.t > 0.0)) throw DomainError("evaluate_solution: t must be > 0 (boundary values come from f_N)");
  p.validate();
  const auto& rep = sol.representation();
  const auto& ctx = sol.context();
  double sum = 0.0;
  for (std::size_t k = 0; k < rep.params.size(); ++k) {
    const auto& q = rep.params[k];
    const double value = ctx.family().is_heat() ? ctx.kernel(p.t + q.t, q.x - p.x) : gram(ctx, q, p);
    sum += rep.kernel_coeffs[k] * value / rep.kernel_norms[k];
  }
  return sum;
}

std::vector<std::vector<double>> evaluate_grid(const SolutionField& sol, const std::vector<double>& t_values,
                                               const std::vector<double>& x_values) {
  for (double t : t_values)
    if (!(t > 0.0)) throw DomainError("evaluate_grid: every t must be > 0");
  std::vector<std::vector<double>> grid(t_values.size(), std::vector<double>(x_values.size()));
  const std::size_t cols = x_values.size();
  parallel_for(t_values.size() * cols, [&](std::size_t idx) {
    const std::size_t i = idx / cols, j = idx % cols;
    grid[i][j] = evaluate_solution(sol, {t_values[i], x_values[j]});
  });
  return grid;
}

IsometryReport isometry_report(const SolutionField& sol, const DataFunction& f) {
  const auto& rep = sol.representation();
  const auto& ctx = sol.context();
  const std::size_t n = rep.params.size();
  double quadratic = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    quadratic += rep.kernel_coeffs[i] * rep.kernel_coeffs[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      const double g = gram(ctx, rep.params[i], rep.params[j]) / (rep.kernel_norms[i] * rep.kernel_norms[j]);
      quadratic += 2.0 * rep.kernel_coeffs[i] * rep.kernel_coeffs[j] * g;
    }
  }
  IsometryReport report;
  report.l2_norm_f = std::sqrt(f.norm_sq());
  report.hk_norm_u = std::sqrt(std::max(quadratic, 0.0));
  const double radicand = f.norm_sq() - quadratic;
  if (radicand < -1e-8 * f.norm_sq())
    throw NumericalInconsistency("isometry_report: ||u||_{H_K} exceeds ||f|| beyond rounding");
  report.residual = std::sqrt(std::max(radicand, 0.0));
  return report;
}

}  // namespace fracafd
