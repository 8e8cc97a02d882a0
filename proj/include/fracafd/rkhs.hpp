#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <vector>

#include "fracafd/kernels.hpp"
#include "fracafd/quadrature.hpp"

namespace fracafd {

/// The initial/boundary datum f. Integrals of f run over [-window, window];
/// the region |x| <= core is pre-split into panels of width core_pitch so
/// that adaptive quadrature cannot step over its features.
class DataFunction {
 public:
  DataFunction(std::function<double(double)> evaluate, double window,
               quadrature::QuadratureSpec quad = {}, double core = 10.0, double core_pitch = 0.25);

  double operator()(double x) const { return evaluate_(x); }
  double window() const { return window_; }
  const quadrature::QuadratureSpec& quad() const { return quad_; }
  /// ||f||^2 over the window.
  double norm_sq() const { return norm_sq_; }
  /// Relative L^2 mass found in window < |x| <= 2*window; a large value means
  /// the window truncates f.
  double tail_fraction() const { return tail_fraction_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }

 private:
  std::function<double(double)> evaluate_;
  double window_;
  quadrature::QuadratureSpec quad_;
  std::vector<double> breakpoints_;
  double norm_sq_ = 0.0;
  double tail_fraction_ = 0.0;
};

/// Thread-safe memo of Gram entries keyed by parameters rounded at 1e-12.
class GramCache {
 public:
  using Key = std::array<std::int64_t, 4>;
  static std::optional<Key> key(const HalfSpacePoint& q, const HalfSpacePoint& p);

  std::optional<double> find(const Key& key) const;
  void store(const Key& key, double value);
  std::size_t size() const;

 private:
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };
  static constexpr std::size_t kShards = 16;
  struct Shard {
    mutable std::mutex mutex;
    std::unordered_map<Key, double, KeyHash> map;
  };
  std::array<Shard, kShards> shards_;
};

/// Family plus quadrature settings; owns the Gram cache.
class GramContext {
 public:
  GramContext(KernelFamily family, quadrature::QuadratureSpec quad = {});

  const KernelFamily& family() const { return family_; }
  const quadrature::QuadratureSpec& quad() const { return quad_; }
  GramCache& cache() const { return *cache_; }
  /// Kernel k_t(x) of the family (h_q(z) = k_{q.t}(q.x - z)).
  double kernel(double t, double x) const { return family_kernel(family_, t, x); }
  /// Spatial scale of k_t: t^{1/(2 alpha)} for heat, t for Poisson.
  double kernel_width(double t) const;
  /// int_R (1 + u^2)^{-1-sigma} du for the Poisson family (0 for heat).
  double poisson_norm_integral() const { return poisson_b_; }

 private:
  KernelFamily family_;
  quadrature::QuadratureSpec quad_;
  std::shared_ptr<GramCache> cache_;
  double poisson_b_ = 0.0;
};

/// K(q, p) = <h_q, h_p>_{L^2}. Heat: K_{alpha, q.t + p.t}(q.x - p.x) by the
/// semigroup law. Poisson: the product integral by quadrature (cached).
double gram(const GramContext& ctx, const HalfSpacePoint& q, const HalfSpacePoint& p);

/// ||K_q||^2 = K(q, q).
double norm_sq(const GramContext& ctx, const HalfSpacePoint& q);

/// <f, h_q>_{L^2}; also the solution value u(q).
double data_kernel_inner(const GramContext& ctx, const DataFunction& f, const HalfSpacePoint& q);

/// |<f, E_q>| with E_q = K_q / ||K_q||.
double normalized_objective_k1(const GramContext& ctx, const DataFunction& f, const HalfSpacePoint& q);

/// Breakpoints graded geometrically around `center`: center +- width * 2^k,
/// clipped to [lo, hi].
std::vector<double> graded_breakpoints(double center, double width, double lo, double hi);

}  // namespace fracafd
