#include "fracafd/rkhs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fracafd {

using quadrature::DecayBound;
using quadrature::QuadratureSpec;

std::vector<double> graded_breakpoints(double center, double width, double lo, double hi) {
  std::vector<double> points;
  if (center > lo && center < hi) points.push_back(center);
  for (double d = width; d > 0.0 && std::isfinite(d); d *= 2.0) {
    bool any = false;
    if (center - d > lo && center - d < hi) {
      points.push_back(center - d);
      any = true;
    }
    if (center + d > lo && center + d < hi) {
      points.push_back(center + d);
      any = true;
    }
    if (!any && (center - d <= lo && center + d >= hi)) break;
  }
  return points;
}

namespace {

// Sorted, de-duplicated breakpoints with the given ends.
std::vector<double> assemble(double lo, double hi, std::vector<double> interior) {
  interior.push_back(lo);
  interior.push_back(hi);
  std::sort(interior.begin(), interior.end());
  std::vector<double> out;
  for (double p : interior) {
    if (p < lo || p > hi) continue;
    if (!out.empty() && p <= out.back()) continue;
    out.push_back(p);
  }
  return out;
}

std::vector<double> data_breakpoints(double window, double core, double pitch) {
  std::vector<double> points;
  const double c = std::min(core, window);
  const auto n = static_cast<long>(std::ceil(c / pitch));
  for (long i = -n; i <= n; ++i) points.push_back(std::clamp(static_cast<double>(i) * pitch, -c, c));
  for (double d = 2.0 * c; d < 2.0 * window; d *= 2.0) {
    points.push_back(-d);
    points.push_back(d);
  }
  points.push_back(-window);
  points.push_back(window);
  return points;
}

}  // namespace

DataFunction::DataFunction(std::function<double(double)> evaluate, double window,
                           QuadratureSpec quad, double core, double core_pitch)
    : evaluate_(std::move(evaluate)), window_(window), quad_(quad) {
  if (!evaluate_) throw DomainError("DataFunction: missing evaluator");
  if (!(window > 0.0) || !std::isfinite(window)) throw DomainError("DataFunction: window must be > 0");
  if (!(core > 0.0) || !(core_pitch > 0.0)) throw DomainError("DataFunction: core and pitch must be > 0");
  quad_.validate();
  breakpoints_ = data_breakpoints(window, core, core_pitch);

  auto square = [this](double x) {
    double v = evaluate_(x);
    return v * v;
  };
  std::vector<double> inner, outer;
  for (double p : breakpoints_) (std::abs(p) <= window ? inner : outer).push_back(p);
  norm_sq_ = quadrature::integrate_adaptive(square, assemble(-window, window, inner), quad_);
  if (!std::isfinite(norm_sq_)) throw DomainError("DataFunction: f is not square integrable on the window");
  // Outer shell window < |x| <= 2*window.
  QuadratureSpec shell = quad_;
  shell.abs_tol = std::max(quad_.abs_tol, quad_.rel_tol * norm_sq_);
  std::vector<double> left{-2.0 * window}, right{window};
  for (double p : outer) (p < 0 ? left : right).push_back(p);
  left.push_back(-window);
  right.push_back(2.0 * window);
  std::sort(left.begin(), left.end());
  std::sort(right.begin(), right.end());
  double tail = quadrature::integrate_adaptive(square, left, shell) +
                quadrature::integrate_adaptive(square, right, shell);
  tail_fraction_ = norm_sq_ + tail > 0.0 ? tail / (norm_sq_ + tail) : 0.0;
}

// ---------------------------------------------------------------------------

std::optional<GramCache::Key> GramCache::key(const HalfSpacePoint& q, const HalfSpacePoint& p) {
  constexpr double kScale = 1e12;
  constexpr double kLimit = 9e6;
  for (double v : {q.t, q.x, p.t, p.x})
    if (!(std::abs(v) < kLimit)) return std::nullopt;
  auto r = [](double v) { return static_cast<std::int64_t>(std::llround(v * kScale)); };
  std::array<std::int64_t, 2> a{r(q.t), r(q.x)}, b{r(p.t), r(p.x)};
  if (b < a) std::swap(a, b);
  return Key{a[0], a[1], b[0], b[1]};
}

std::size_t GramCache::KeyHash::operator()(const Key& k) const {
  std::size_t h = 0;
  for (auto v : k) h = h * 1000003u ^ std::hash<std::int64_t>{}(v);
  return h;
}

std::optional<double> GramCache::find(const Key& key) const {
  const Shard& shard = shards_[KeyHash{}(key) % kShards];
  std::lock_guard lock(shard.mutex);
  auto it = shard.map.find(key);
  if (it == shard.map.end()) return std::nullopt;
  return it->second;
}

void GramCache::store(const Key& key, double value) {
  Shard& shard = shards_[KeyHash{}(key) % kShards];
  std::lock_guard lock(shard.mutex);
  shard.map.emplace(key, value);
}

std::size_t GramCache::size() const {
  std::size_t n = 0;
  for (const auto& shard : shards_) {
    std::lock_guard lock(shard.mutex);
    n += shard.map.size();
  }
  return n;
}

// ---------------------------------------------------------------------------

GramContext::GramContext(KernelFamily family, QuadratureSpec quad)
    : family_(family), quad_(quad), cache_(std::make_shared<GramCache>()) {
  quad_.validate();
  if (!family_.is_heat()) {
    const double sigma = family_.order();
    auto f = [sigma](double u) { return std::pow(1.0 + u * u, -1.0 - sigma); };
    DecayBound bound{[sigma](double u) { return std::pow(u, -2.0 - 2.0 * sigma); },
                     [sigma](double R) { return std::pow(R, -1.0 - 2.0 * sigma) / (1.0 + 2.0 * sigma); }};
    poisson_b_ = 2.0 * quadrature::integrate_halfline_decaying(f, bound, quad_);
  }
}

double GramContext::kernel_width(double t) const {
  return family_.is_heat() ? std::pow(t, 1.0 / (2.0 * family_.order())) : t;
}

namespace {

double poisson_gram(const GramContext& ctx, const HalfSpacePoint& q, const HalfSpacePoint& p) {
  const double sigma = ctx.family().order();
  const double c = poisson_normalizer(sigma);
  auto integrand = [&](double z) { return poisson_kernel(sigma, q.t, q.x - z) * poisson_kernel(sigma, p.t, p.x - z); };

  const double margin = 10.0 * std::max(q.t, p.t);
  const double lo = std::min(q.x, p.x) - margin;
  const double hi = std::max(q.x, p.x) + margin;
  auto points = graded_breakpoints(q.x, q.t, lo, hi);
  auto more = graded_breakpoints(p.x, p.t, lo, hi);
  points.insert(points.end(), more.begin(), more.end());
  const double core = quadrature::integrate_adaptive(integrand, assemble(lo, hi, points), ctx.quad());

  // Beyond the core both centers are at least `margin` away.
  const double scale = c * c * std::pow(q.t * p.t, sigma);
  const double power = 1.0 + sigma;
  DecayBound bound{[=](double u) { return scale * std::pow(u + margin, -2.0 * power); },
                   [=](double R) { return scale * std::pow(R + margin, 1.0 - 2.0 * power) / (2.0 * power - 1.0); }};
  QuadratureSpec tail_spec = ctx.quad();
  tail_spec.abs_tol = std::max(tail_spec.abs_tol, tail_spec.tail_tol * std::abs(core));
  const double right = quadrature::integrate_halfline_decaying([&](double u) { return integrand(hi + u); }, bound,
                                                               tail_spec, margin);
  const double left = quadrature::integrate_halfline_decaying([&](double u) { return integrand(lo - u); }, bound,
                                                              tail_spec, margin);
  return core + (left + right);
}

}  // namespace

double norm_sq(const GramContext& ctx, const HalfSpacePoint& q) {
  q.validate();
  if (ctx.family().is_heat()) return ctx.kernel(2.0 * q.t, 0.0);
  const double c = poisson_normalizer(ctx.family().order());
  return c * c * ctx.poisson_norm_integral() / q.t;
}

double gram(const GramContext& ctx, const HalfSpacePoint& q, const HalfSpacePoint& p) {
  q.validate();
  p.validate();
  if (ctx.family().is_heat()) return ctx.kernel(q.t + p.t, q.x - p.x);
  if (q == p) return norm_sq(ctx, q);
  auto key = GramCache::key(q, p);
  if (key) {
    if (auto hit = ctx.cache().find(*key)) return *hit;
  }
  // Canonical argument order keeps the value symmetric bit for bit.
  const bool swap = std::pair(p.t, p.x) < std::pair(q.t, q.x);
  const double value = swap ? poisson_gram(ctx, p, q) : poisson_gram(ctx, q, p);
  if (key) ctx.cache().store(*key, value);
  return value;
}

double data_kernel_inner(const GramContext& ctx, const DataFunction& f, const HalfSpacePoint& q) {
  q.validate();
  const double width = ctx.kernel_width(q.t);
  const double extension = std::max(10.0 * width, 10.0 * q.t);
  const double lo = std::min(-f.window(), q.x) - extension;
  const double hi = std::max(f.window(), q.x) + extension;
  std::vector<double> points = f.breakpoints();
  auto around = graded_breakpoints(q.x, width, lo, hi);
  points.insert(points.end(), around.begin(), around.end());
  auto integrand = [&](double z) { return f(z) * ctx.kernel(q.t, q.x - z); };
  // f may oscillate against the kernel and cancel; accuracy is then measured
  // against the Cauchy-Schwarz scale ||f|| ||K_q||.
  QuadratureSpec spec = f.quad();
  spec.abs_tol = std::max(spec.abs_tol, spec.rel_tol * std::sqrt(f.norm_sq() * norm_sq(ctx, q)));
  return quadrature::integrate_adaptive(integrand, assemble(lo, hi, std::move(points)), spec);
}

double normalized_objective_k1(const GramContext& ctx, const DataFunction& f, const HalfSpacePoint& q) {
  return std::abs(data_kernel_inner(ctx, f, q)) / std::sqrt(norm_sq(ctx, q));
}

}  // namespace fracafd
