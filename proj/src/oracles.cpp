#include "fracafd/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fracafd/parallel.hpp"

namespace fracafd::oracles {

using quadrature::DecayBound;
using quadrature::QuadratureSpec;

void OracleGrid::validate() const {
  if (!(spacing > 0.0) || !(extent > 0.0)) throw DomainError("OracleGrid: spacing and extent must be > 0");
  if (spacing > extent / 100.0) throw DomainError("OracleGrid: spacing must be at most extent/100");
}

std::vector<double> OracleGrid::nodes() const {
  validate();
  const auto half = static_cast<long>(std::floor(extent / spacing + 1e-9));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(2 * half + 1));
  for (long i = -half; i <= half; ++i) out.push_back(static_cast<double>(i) * spacing);
  return out;
}

double convolution_gram_oracle(double alpha, const HalfSpacePoint& q, const HalfSpacePoint& p,
                               const OracleGrid& grid) {
  grid.validate();
  q.validate();
  p.validate();
  const auto family = KernelFamily::heat(alpha);
  const double reach = std::max(std::abs(q.x), std::abs(p.x));
  if (!(grid.extent > reach)) throw DomainError("convolution_gram_oracle: grid must cover both centers");
  auto product = [&](double z) { return family_kernel(family, q.t, q.x - z) * family_kernel(family, p.t, p.x - z); };

  const double lo = -grid.extent, hi = grid.extent;
  std::vector<double> points{lo, hi};
  for (const auto& c : {q, p}) {
    const double width = std::pow(c.t, 1.0 / (2.0 * alpha));
    auto more = graded_breakpoints(c.x, width, lo, hi);
    points.insert(points.end(), more.begin(), more.end());
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  QuadratureSpec spec;
  spec.abs_tol = 0.0;
  const double core = quadrature::integrate_adaptive(product, points, spec);

  // Beyond the window each factor is below 20 t / (t^{1/(2a)} + |y|)^{1+2a}.
  const double beta = 2.0 * alpha;
  const double gap = grid.extent - reach;
  const double scale = 400.0 * q.t * p.t;
  DecayBound bound{[=](double u) { return scale * std::pow(gap + u, -2.0 - 2.0 * beta); },
                   [=](double R) { return scale * std::pow(gap + R, -1.0 - 2.0 * beta) / (1.0 + 2.0 * beta); }};
  QuadratureSpec tail_spec = spec;
  tail_spec.abs_tol = spec.tail_tol * std::abs(core);
  const double right = quadrature::integrate_halfline_decaying([&](double u) { return product(hi + u); }, bound,
                                                               tail_spec, gap);
  const double left = quadrature::integrate_halfline_decaying([&](double u) { return product(lo - u); }, bound,
                                                              tail_spec, gap);
  return core + (left + right);
}

double plancherel_gram_oracle(double sigma, const HalfSpacePoint& q, const HalfSpacePoint& p) {
  q.validate();
  p.validate();
  const double c = poisson_normalizer(sigma);
  const double bound_scale = g_sigma_bound_scale(sigma);
  const double decay = std::numbers::pi * (q.t + p.t);
  auto envelope = [&](double v) { return g_sigma(sigma, q.t * v) * g_sigma(sigma, p.t * v); };
  DecayBound bound{[=](double v) { return bound_scale * bound_scale * std::exp(-decay * v); },
                   [=](double R) { return bound_scale * bound_scale * std::exp(-decay * R) / decay; }};
  const double frequency = 2.0 * std::numbers::pi * std::abs(q.x - p.x);
  // g_sigma is accurate to ~1e-10 G_sigma(0) in absolute terms, so the
  // envelope carries noise of that size; the floor keeps quadrature from
  // chasing it (it matters at frequency 0, where nothing else stops it).
  QuadratureSpec spec;
  spec.abs_tol = 1e-9 * bound_scale * bound_scale / decay;
  return 2.0 * c * c * quadrature::integrate_oscillatory_cosine(envelope, bound, frequency, spec);
}

FunctionalGramSchmidt functional_gs_oracle(const KernelFamily& family, const std::vector<HalfSpacePoint>& params,
                                           const OracleGrid& grid) {
  FunctionalGramSchmidt out;
  out.nodes = grid.nodes();
  const std::size_t m = out.nodes.size(), n = params.size();
  std::vector<double> weights(m, grid.spacing);
  weights.front() = weights.back() = 0.5 * grid.spacing;
  auto inner = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += weights[i] * a[i] * b[i];
    return s;
  };

  out.a_matrix.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t k = 0; k < n; ++k) {
    params[k].validate();
    std::vector<double> v(m);
    for (std::size_t i = 0; i < m; ++i) v[i] = family_kernel(family, params[k].t, params[k].x - out.nodes[i]);
    const double norm = std::sqrt(inner(v, v));
    for (double& x : v) x /= norm;
    for (std::size_t i = 0; i < k; ++i) {
      const double r = inner(v, out.orthonormal[i]);
      out.a_matrix[i][k] = r;
      for (std::size_t j = 0; j < m; ++j) v[j] -= r * out.orthonormal[i][j];
    }
    const double rest_sq = inner(v, v);
    if (!(rest_sq >= 1e-8)) throw DegeneracyError("functional_gs_oracle: sampled kernels are linearly dependent");
    const double rest = std::sqrt(rest_sq);
    out.a_matrix[k][k] = rest;
    for (double& x : v) x /= rest;
    out.orthonormal.push_back(std::move(v));
  }
  return out;
}

HalfSpacePoint exhaustive_argmax_oracle(const PoafdState& state, const SearchConfig& dense_grid) {
  const auto nodes = dense_grid.coarse_nodes();
  std::vector<std::optional<double>> values(nodes.size());
  parallel_for(nodes.size(), [&](std::size_t i) { values[i] = preortho_objective(state, nodes[i]); });
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!values[i]) continue;
    if (!best || better_candidate(*values[i], nodes[i], *values[*best], nodes[*best])) best = i;
  }
  if (!best) throw DictionaryExhausted("exhaustive_argmax_oracle: every node is degenerate");
  return nodes[*best];
}

std::vector<double> boundary_decay_profile(const GramContext& ctx, const HalfSpacePoint& p,
                                           const std::vector<HalfSpacePoint>& qs) {
  std::vector<double> out;
  out.reserve(qs.size());
  for (const auto& q : qs) out.push_back(std::abs(gram(ctx, p, q)) / std::sqrt(norm_sq(ctx, q)));
  return out;
}

}  // namespace fracafd::oracles
