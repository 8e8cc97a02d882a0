#include "fracafd/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>

namespace fracafd::quadrature {

void QuadratureSpec::validate() const {
  if (!(rel_tol > 0.0)) throw std::invalid_argument("QuadratureSpec: rel_tol must be > 0");
  if (!(abs_tol >= 0.0)) throw std::invalid_argument("QuadratureSpec: abs_tol must be >= 0");
  if (max_subdivisions < 1)
    throw std::invalid_argument("QuadratureSpec: max_subdivisions must be >= 1");
  if (!(tail_tol > 0.0 && tail_tol < 1.0))
    throw std::invalid_argument("QuadratureSpec: tail_tol must lie in (0, 1)");
}

namespace {

GaussRule build_rule(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

struct Segment {
  double a, b;
  double coarse;  // single-panel value on [a, b]
  double left, right;
  double err;
  double value() const { return left + right; }
};

struct ByError {
  bool operator()(const Segment& s, const Segment& t) const { return s.err < t.err; }
};

Segment make_segment(const Integrand& f, double a, double b, double coarse) {
  double m = 0.5 * (a + b);
  Segment s{a, b, coarse, gauss_panel(f, a, m), gauss_panel(f, m, b), 0.0};
  s.err = std::abs(s.coarse - s.value());
  // Panels that can no longer be split in floating point are frozen.
  if (!(m > a && m < b)) s.err = 0.0;
  return s;
}

}  // namespace

const GaussRule& gauss_legendre_rule() {
  static const GaussRule rule = build_rule(kGaussOrder);
  return rule;
}

double gauss_panel(const Integrand& f, double a, double b) {
  const auto& rule = gauss_legendre_rule();
  double half = 0.5 * (b - a);
  double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return sum * half;
}

double pairwise_sum(const std::vector<double>& values) {
  auto rec = [&](auto&& self, std::size_t lo, std::size_t hi) -> double {
    if (hi - lo <= 8) {
      double s = 0.0;
      for (std::size_t i = lo; i < hi; ++i) s += values[i];
      return s;
    }
    std::size_t mid = lo + (hi - lo) / 2;
    return self(self, lo, mid) + self(self, mid, hi);
  };
  return rec(rec, 0, values.size());
}

double integrate_adaptive(const Integrand& f, std::vector<double> breakpoints,
                          const QuadratureSpec& spec) {
  if (breakpoints.size() < 2) throw std::invalid_argument("integrate_adaptive: need an interval");
  if (!std::is_sorted(breakpoints.begin(), breakpoints.end()))
    throw std::invalid_argument("integrate_adaptive: breakpoints must be ascending");
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
  if (breakpoints.size() < 2) return 0.0;

  std::priority_queue<Segment, std::vector<Segment>, ByError> heap;
  double total = 0.0, total_err = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    double a = breakpoints[i], b = breakpoints[i + 1];
    Segment s = make_segment(f, a, b, gauss_panel(f, a, b));
    total += s.value();
    total_err += s.err;
    heap.push(s);
  }

  int subdivisions = 0;
  while (total_err > std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
    if (!std::isfinite(total)) throw ConvergenceError("integrate_adaptive: non-finite integrand", total, total_err);
    const Segment worst = heap.top();
    if (worst.err == 0.0) break;
    if (subdivisions >= spec.max_subdivisions)
      throw ConvergenceError("integrate_adaptive: subdivision budget exhausted", total, total_err);
    heap.pop();
    double m = 0.5 * (worst.a + worst.b);
    Segment l = make_segment(f, worst.a, m, worst.left);
    Segment r = make_segment(f, m, worst.b, worst.right);
    total += l.value() + r.value() - worst.value();
    total_err += l.err + r.err - worst.err;
    heap.push(l);
    heap.push(r);
    ++subdivisions;
    // Running sums drift; refresh the error total now and then.
    if (subdivisions % 256 == 0) {
      auto copy = heap;
      double e = 0.0;
      while (!copy.empty()) {
        e += copy.top().err;
        copy.pop();
      }
      total_err = e;
    }
  }

  // Final value by pairwise summation in interval order for determinism.
  std::vector<Segment> segs;
  segs.reserve(heap.size());
  while (!heap.empty()) {
    segs.push_back(heap.top());
    heap.pop();
  }
  std::sort(segs.begin(), segs.end(), [](const Segment& s, const Segment& t) { return s.a < t.a; });
  std::vector<double> values;
  values.reserve(segs.size());
  for (const auto& s : segs) values.push_back(s.value());
  return pairwise_sum(values);
}

double integrate_adaptive(const Integrand& f, double a, double b, const QuadratureSpec& spec) {
  if (!(a <= b)) throw std::invalid_argument("integrate_adaptive: require a <= b");
  if (a == b) return 0.0;
  return integrate_adaptive(f, std::vector<double>{a, b}, spec);
}

double integrate_halfline_decaying(const Integrand& f, const DecayBound& bound,
                                   const QuadratureSpec& spec, double initial_radius) {
  constexpr int kMaxDoublings = 400;
  double radius = initial_radius > 0.0 ? initial_radius : 1.0;
  std::vector<double> pieces{integrate_adaptive(f, 0.0, radius, spec)};
  double estimate = pieces.back();
  for (int k = 0; k < kMaxDoublings; ++k) {
    if (bound.tail(radius) <= std::max(spec.tail_tol * std::abs(estimate), spec.abs_tol))
      return pairwise_sum(pieces);
    pieces.push_back(integrate_adaptive(f, radius, 2.0 * radius, spec));
    radius *= 2.0;
    estimate = pairwise_sum(pieces);
    if (!std::isfinite(radius)) break;
  }
  throw TruncationError("integrate_halfline_decaying: tail bound never met", estimate, radius);
}

double integrate_oscillatory_cosine(const Integrand& envelope, const DecayBound& envelope_bound,
                                    double frequency, const QuadratureSpec& spec) {
  if (!(frequency >= 0.0))
    throw std::invalid_argument("integrate_oscillatory_cosine: frequency must be >= 0");
  auto product = [&](double r) { return envelope(r) * std::cos(frequency * r); };
  if (frequency == 0.0) return integrate_halfline_decaying(envelope, envelope_bound, spec);

  // Truncation radius of the envelope alone decides whether oscillation matters.
  double radius = 1.0;
  for (int k = 0; k < 400; ++k) {
    double mass = gauss_panel(envelope, 0.0, radius);
    if (envelope_bound.tail(radius) <= spec.tail_tol * std::abs(mass)) break;
    radius *= 2.0;
  }
  const double half_period = std::numbers::pi / frequency;
  if (radius < 2.0 * half_period)
    return integrate_halfline_decaying(product, envelope_bound, spec, radius);

  // Acceleration depth: the estimate is the binomially weighted mean of the
  // last kDepth+1 partial sums (kDepth rounds of averaging adjacent sums).
  constexpr int kDepth = 10;
  const long max_panels = 200L * spec.max_subdivisions;
  std::vector<double> panels;
  std::vector<double> partial;
  double running = 0.0, compensation = 0.0, peak = 0.0;
  double prev_acc = 0.0, prev_diff = INFINITY;

  auto accelerated = [&]() {
    std::vector<double> level(partial.end() - (kDepth + 1), partial.end());
    for (int d = 0; d < kDepth; ++d)
      for (std::size_t i = 0; i + 1 < level.size() - d; ++i) level[i] = 0.5 * (level[i] + level[i + 1]);
    return level.front();
  };

  // Panels end on the zeros (k + 1/2) * half_period, so each one carries a
  // single sign of the cosine.
  QuadratureSpec panel_spec = spec;
  for (long k = 0; k < max_panels; ++k) {
    double a = k == 0 ? 0.0 : (k - 0.5) * half_period, b = (k + 0.5) * half_period;
    double p = integrate_adaptive(product, a, b, panel_spec);
    panels.push_back(p);
    // Kahan running sum for the partial-sum sequence.
    double y = p - compensation;
    double t = running + y;
    compensation = (t - running) - y;
    running = t;
    partial.push_back(running);
    peak = std::max(peak, std::abs(running));
    panel_spec.abs_tol = std::max(spec.abs_tol, 1e-3 * spec.rel_tol * peak);

    if (envelope_bound.tail(b) <= std::max(spec.tail_tol * std::abs(running), spec.abs_tol))
      return pairwise_sum(panels);
    if (static_cast<int>(partial.size()) > kDepth + 1) {
      double acc = accelerated();
      double diff = std::abs(acc - prev_acc);
      double tol = std::max(spec.abs_tol, spec.rel_tol * std::abs(acc));
      if (diff <= tol && prev_diff <= tol) return acc;
      prev_diff = diff;
      prev_acc = acc;
    }
  }
  throw TruncationError("integrate_oscillatory_cosine: panel budget exhausted", running,
                        max_panels * half_period);
}

}  // namespace fracafd::quadrature
