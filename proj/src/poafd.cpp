#include "fracafd/poafd.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "fracafd/parallel.hpp"

namespace fracafd {

void TriangularMatrix::append_column(std::vector<double> column) {
  if (column.size() != columns_.size() + 1) throw std::invalid_argument("TriangularMatrix: bad column length");
  columns_.push_back(std::move(column));
}

std::vector<std::vector<double>> TriangularMatrix::dense() const {
  const std::size_t n = size();
  std::vector<std::vector<double>> out(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i <= j; ++i) out[i][j] = columns_[j][i];
  return out;
}

double SparseRepresentation::evaluate(const GramContext& ctx, double x) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k)
    sum += kernel_coeffs[k] * ctx.kernel(params[k].t, params[k].x - x) / kernel_norms[k];
  return sum;
}

// ---------------------------------------------------------------------------

void SearchConfig::validate() const {
  if (!(t_range.first > 0.0) || !(t_range.second > t_range.first) || !std::isfinite(t_range.second))
    throw DomainError("SearchConfig: need 0 < t_min < t_max");
  if (!(x_range.second > x_range.first) || !std::isfinite(x_range.first) || !std::isfinite(x_range.second))
    throw DomainError("SearchConfig: need x_min < x_max");
  if (n_t < 2 || n_x < 2) throw DomainError("SearchConfig: grid needs at least 2 nodes per axis");
  if (refine_rounds < 0) throw DomainError("SearchConfig: refine_rounds must be >= 0");
  if (!(refine_shrink > 0.0 && refine_shrink < 1.0)) throw DomainError("SearchConfig: refine_shrink must lie in (0, 1)");
  if (!(degeneracy_floor > 0.0)) throw DomainError("SearchConfig: degeneracy floor must be > 0");
}

double SearchConfig::coarse_t_ratio() const {
  return std::pow(t_range.second / t_range.first, 1.0 / (n_t - 1));
}

double SearchConfig::coarse_x_spacing() const { return (x_range.second - x_range.first) / (n_x - 1); }

std::vector<HalfSpacePoint> SearchConfig::coarse_nodes() const {
  validate();
  std::vector<HalfSpacePoint> nodes;
  nodes.reserve(static_cast<std::size_t>(n_t) * n_x);
  const double log_lo = std::log(t_range.first), log_hi = std::log(t_range.second);
  for (int i = 0; i < n_t; ++i) {
    double t = i == n_t - 1 ? t_range.second : std::exp(log_lo + (log_hi - log_lo) * i / (n_t - 1));
    if (i == 0) t = t_range.first;
    for (int j = 0; j < n_x; ++j) {
      double x = j == n_x - 1 ? x_range.second : x_range.first + coarse_x_spacing() * j;
      nodes.push_back({t, x});
    }
  }
  return nodes;
}

bool better_candidate(double value, const HalfSpacePoint& q, double incumbent_value,
                      const HalfSpacePoint& incumbent) {
  constexpr double kTieBand = 1e-12;
  const double band = kTieBand * std::max(std::abs(value), std::abs(incumbent_value));
  if (value > incumbent_value + band) return true;
  if (value < incumbent_value - band) return false;
  return std::pair(q.t, q.x) < std::pair(incumbent.t, incumbent.x);
}

// ---------------------------------------------------------------------------

struct CoarseCache {
  std::mutex mutex;
  SearchConfig cfg;
  bool built = false;
  std::vector<HalfSpacePoint> nodes;
  std::vector<double> inner;        // <f, K~_q>
  std::vector<double> kernel_norm;  // ||K_q||
  std::vector<HalfSpacePoint> basis;
  std::vector<std::vector<double>> projections;
};

PoafdState::PoafdState(const GramContext& ctx, const DataFunction& f, double degeneracy_floor)
    : ctx_(&ctx),
      data_(&f),
      degeneracy_floor_(degeneracy_floor),
      residual_sq_(f.norm_sq()),
      cache_(std::make_shared<CoarseCache>()) {
  if (!(degeneracy_floor > 0.0)) throw DomainError("PoafdState: degeneracy floor must be > 0");
  if (!(f.norm_sq() > 0.0)) throw DomainError("PoafdState: data has zero norm");
}

std::vector<double> PoafdState::normalized_gram_row(const HalfSpacePoint& q) const {
  const double norm_q = std::sqrt(norm_sq(*ctx_, q));
  std::vector<double> row(params_.size());
  for (std::size_t j = 0; j < params_.size(); ++j)
    row[j] = gram(*ctx_, q, params_[j]) / (norm_q * kernel_norms_[j]);
  return row;
}

std::vector<double> PoafdState::projections(const std::vector<double>& normalized_gram) const {
  // A^T a = b, forward substitution.
  const std::size_t k = params_.size();
  std::vector<double> a(k);
  for (std::size_t j = 0; j < k; ++j) {
    const auto& col = a_.column(j);
    double s = normalized_gram[j];
    for (std::size_t i = 0; i < j; ++i) s -= col[i] * a[i];
    a[j] = s / col[j];
  }
  return a;
}

std::optional<double> preortho_objective(const PoafdState& state, double data_inner_normalized,
                                         const std::vector<double>& projections) {
  double proj_sq = 0.0, explained = 0.0;
  for (std::size_t j = 0; j < projections.size(); ++j) {
    proj_sq += projections[j] * projections[j];
    explained += state.ortho_coeffs()[j] * projections[j];
  }
  const double denom_sq = 1.0 - proj_sq;
  if (!(denom_sq >= state.degeneracy_floor())) return std::nullopt;
  return std::abs(data_inner_normalized - explained) / std::sqrt(denom_sq);
}

std::optional<double> preortho_objective(const PoafdState& state, const HalfSpacePoint& q) {
  q.validate();
  const double inner = data_kernel_inner(state.context(), state.data(), q) / std::sqrt(norm_sq(state.context(), q));
  return preortho_objective(state, inner, state.projections(state.normalized_gram_row(q)));
}

namespace {

void sync_cache(CoarseCache& cache, const GramContext& ctx, const DataFunction& f, const SearchConfig& cfg,
                const std::vector<HalfSpacePoint>& params, const TriangularMatrix& a) {
  if (!cache.built || !(cache.cfg == cfg)) {
    cache.cfg = cfg;
    cache.nodes = cfg.coarse_nodes();
    const std::size_t n = cache.nodes.size();
    cache.inner.assign(n, 0.0);
    cache.kernel_norm.assign(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
      cache.kernel_norm[i] = std::sqrt(norm_sq(ctx, cache.nodes[i]));
      cache.inner[i] = data_kernel_inner(ctx, f, cache.nodes[i]) / cache.kernel_norm[i];
    });
    cache.basis.clear();
    cache.projections.assign(n, {});
    cache.built = true;
  }
  // Stored projections are valid only for a prefix of the current parameters.
  std::size_t common = 0;
  while (common < cache.basis.size() && common < params.size() && cache.basis[common] == params[common]) ++common;
  if (common < cache.basis.size()) {
    cache.basis.resize(common);
    for (auto& p : cache.projections) p.resize(common);
  }
  for (std::size_t j = common; j < params.size(); ++j) {
    const HalfSpacePoint qj = params[j];
    const double norm_j = std::sqrt(norm_sq(ctx, qj));
    const auto& col = a.column(j);
    parallel_for(cache.nodes.size(), [&](std::size_t i) {
      auto& proj = cache.projections[i];
      double s = gram(ctx, cache.nodes[i], qj) / (cache.kernel_norm[i] * norm_j);
      for (std::size_t r = 0; r < j; ++r) s -= col[r] * proj[r];
      proj.push_back(s / col[j]);
    });
    cache.basis.push_back(qj);
  }
}

}  // namespace

HalfSpacePoint select_next(const PoafdState& state, const SearchConfig& cfg, StepReport* report) {
  cfg.validate();
  CoarseCache& cache = *state.cache_;
  std::lock_guard lock(cache.mutex);
  sync_cache(cache, *state.ctx_, *state.data_, cfg, state.params_, state.a_);

  const std::size_t n = cache.nodes.size();
  std::vector<std::optional<double>> values(n);
  parallel_for(n, [&](std::size_t i) { values[i] = preortho_objective(state, cache.inner[i], cache.projections[i]); });

  std::optional<std::size_t> best;
  std::size_t degenerate = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!values[i]) {
      ++degenerate;
      continue;
    }
    if (!best || better_candidate(*values[i], cache.nodes[i], *values[*best], cache.nodes[*best])) best = i;
  }
  if (!best) throw DictionaryExhausted("select_next: every coarse candidate is degenerate");

  HalfSpacePoint incumbent = cache.nodes[*best];
  double incumbent_value = *values[*best];
  const double coarse_value = incumbent_value;

  double log_step = std::log(cfg.coarse_t_ratio());
  double x_step = cfg.coarse_x_spacing();
  for (int round = 0; round < cfg.refine_rounds; ++round) {
    log_step *= cfg.refine_shrink;
    x_step *= cfg.refine_shrink;
    std::vector<HalfSpacePoint> stencil;
    for (int i = -1; i <= 1; ++i)
      for (int j = -1; j <= 1; ++j) {
        if (i == 0 && j == 0) continue;
        double t = std::clamp(incumbent.t * std::exp(i * log_step), cfg.t_range.first, cfg.t_range.second);
        double x = std::clamp(incumbent.x + j * x_step, cfg.x_range.first, cfg.x_range.second);
        stencil.push_back({t, x});
      }
    std::vector<std::optional<double>> stencil_values(stencil.size());
    parallel_for(stencil.size(), [&](std::size_t i) { stencil_values[i] = preortho_objective(state, stencil[i]); });
    HalfSpacePoint next = incumbent;
    double next_value = incumbent_value;
    for (std::size_t i = 0; i < stencil.size(); ++i) {
      if (!stencil_values[i]) {
        ++degenerate;
        continue;
      }
      if (better_candidate(*stencil_values[i], stencil[i], next_value, next)) {
        next = stencil[i];
        next_value = *stencil_values[i];
      }
    }
    incumbent = next;
    incumbent_value = next_value;
  }

  if (report) {
    report->coarse_objective = coarse_value;
    report->objective = incumbent_value;
    report->degenerate_skipped = degenerate;
  }
  return incumbent;
}

PoafdState gram_schmidt_update(const PoafdState& state, const HalfSpacePoint& q, StepReport* report) {
  q.validate();
  PoafdState next = state;
  const std::size_t k = state.size();
  const double norm_q = std::sqrt(norm_sq(*state.ctx_, q));
  const std::vector<double> row = state.normalized_gram_row(q);
  std::vector<double> column = state.projections(row);

  double proj_sq = 0.0;
  for (double v : column) proj_sq += v * v;
  if (!(1.0 - proj_sq >= state.degeneracy_floor_))
    throw DegeneracyError("gram_schmidt_update: candidate lies in the span of the selected kernels");

  // Drift between the Gram entries and A^T A for the new column; one sweep of
  // re-orthogonalization if it exceeds the bound.
  auto drift = [&](const std::vector<double>& col) {
    std::vector<double> r(k);
    for (std::size_t j = 0; j < k; ++j) {
      const auto& cj = state.a_.column(j);
      double s = 0.0;
      for (std::size_t i = 0; i <= j; ++i) s += cj[i] * col[i];
      r[j] = s - row[j];
    }
    return r;
  };
  constexpr double kDriftBound = 1e-8;
  auto residual = drift(column);
  double worst = 0.0;
  for (double v : residual) worst = std::max(worst, std::abs(v));
  bool reorthogonalized = false;
  if (worst > kDriftBound) {
    auto correction = state.projections(residual);
    for (std::size_t j = 0; j < k; ++j) column[j] -= correction[j];
    proj_sq = 0.0;
    for (double v : column) proj_sq += v * v;
    if (!(1.0 - proj_sq >= state.degeneracy_floor_))
      throw DegeneracyError("gram_schmidt_update: candidate lies in the span of the selected kernels");
    reorthogonalized = true;
  }

  const double diagonal = std::sqrt(1.0 - proj_sq);
  const double inner = data_kernel_inner(*state.ctx_, *state.data_, q) / norm_q;
  double explained = 0.0;
  for (std::size_t j = 0; j < k; ++j) explained += state.ortho_[j] * column[j];
  const double coeff = (inner - explained) / diagonal;

  column.push_back(diagonal);
  next.a_.append_column(std::move(column));
  next.params_.push_back(q);
  next.kernel_norms_.push_back(norm_q);
  next.ortho_.push_back(coeff);
  next.residual_sq_ = state.residual_sq_ - coeff * coeff;
  if (report) report->reorthogonalized = reorthogonalized;
  return next;
}

std::vector<double> coefficients_from_orthonormal(const TriangularMatrix& a, const std::vector<double>& ortho_coeffs,
                                                  double floor) {
  const std::size_t n = a.size();
  if (ortho_coeffs.size() != n) throw std::invalid_argument("coefficients_from_orthonormal: size mismatch");
  std::vector<double> c(n);
  for (std::size_t ii = n; ii-- > 0;) {
    const double diagonal = a(ii, ii);
    if (!(diagonal > floor)) throw SingularSystemError("coefficients_from_orthonormal: diagonal entry below floor");
    double s = ortho_coeffs[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= a(ii, j) * c[j];
    c[ii] = s / diagonal;
  }
  return c;
}

SparseRepresentation make_representation(const PoafdState& state, std::vector<StepReport> steps) {
  SparseRepresentation rep;
  rep.family = state.context().family();
  rep.params = state.params();
  rep.ortho_coeffs = state.ortho_coeffs();
  rep.a_matrix = state.a_matrix();
  rep.kernel_coeffs = coefficients_from_orthonormal(rep.a_matrix, rep.ortho_coeffs);
  rep.data_norm = std::sqrt(state.data().norm_sq());
  double remaining = state.data().norm_sq();
  for (std::size_t k = 0; k < rep.params.size(); ++k) {
    remaining -= rep.ortho_coeffs[k] * rep.ortho_coeffs[k];
    rep.residual_norms.push_back(std::sqrt(std::max(remaining, 0.0)));
    rep.kernel_norms.push_back(std::sqrt(norm_sq(state.context(), rep.params[k])));
  }
  rep.steps = std::move(steps);
  return rep;
}

SparseRepresentation decompose(const DataFunction& f, const GramContext& ctx, const SearchConfig& cfg, StopRule stop) {
  cfg.validate();
  if (stop.max_terms < 0) throw DomainError("decompose: max_terms must be >= 0");
  if (stop.rel_error && !(*stop.rel_error >= 0.0)) throw DomainError("decompose: rel_error must be >= 0");
  PoafdState state(ctx, f, cfg.degeneracy_floor);
  std::vector<StepReport> steps;
  const double norm = std::sqrt(f.norm_sq());
  while (static_cast<int>(state.size()) < stop.max_terms) {
    if (stop.rel_error && std::sqrt(std::max(state.residual_sq(), 0.0)) <= *stop.rel_error * norm) break;
    StepReport report;
    HalfSpacePoint q;
    try {
      q = select_next(state, cfg, &report);
    } catch (const DictionaryExhausted& e) {
      throw DictionaryExhausted(e.what(), std::make_shared<SparseRepresentation>(make_representation(state, steps)));
    }
    state = gram_schmidt_update(state, q, &report);
    steps.push_back(report);
  }
  return make_representation(state, std::move(steps));
}

}  // namespace fracafd
