#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fracafd/quadrature.hpp"

namespace fracafd {

/// Invalid parameter for a kernel, point or family.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A dictionary parameter q = (t, x) in the open upper half-plane.
struct HalfSpacePoint {
  double t = 1.0;
  double x = 0.0;

  void validate() const;
  friend bool operator==(const HalfSpacePoint&, const HalfSpacePoint&) = default;
};

enum class FamilyKind { FractionalHeat, FractionalPoisson };

/// Which dictionary: fractional heat kernels of order alpha in (0, 1], or
/// fractional Poisson kernels of order sigma > 0.
class KernelFamily {
 public:
  static KernelFamily heat(double alpha);
  static KernelFamily poisson(double sigma);

  FamilyKind kind() const { return kind_; }
  bool is_heat() const { return kind_ == FamilyKind::FractionalHeat; }
  /// alpha for the heat family, sigma for the Poisson family.
  double order() const { return order_; }
  std::string name() const { return is_heat() ? "heat" : "poisson"; }

  friend bool operator==(const KernelFamily&, const KernelFamily&) = default;

 private:
  KernelFamily(FamilyKind kind, double order) : kind_(kind), order_(order) {}
  FamilyKind kind_;
  double order_;
};

// ---------------------------------------------------------------------------
// Fractional heat kernel
// ---------------------------------------------------------------------------

enum class HeatPath {
  Auto,     ///< closed forms at alpha = 1/2 and alpha = 1, quadrature otherwise
  General,  ///< always the Fourier quadrature
};

/// K_{alpha,t}(x) = (1/pi) * int_0^inf exp(-t r^{2 alpha}) cos(x r) dr.
///
/// Evaluated at t = 1 and rescaled, K_t(x) = t^{-1/(2a)} K_1(x t^{-1/(2a)}).
/// For |scaled x| <= 2 the real-axis integral is summed over half-period
/// panels. Farther out that integral cancels to many orders below its
/// terms, so the same Fourier integral is taken along a deformed contour:
/// the imaginary axis when 2*alpha <= 1, otherwise the imaginary axis up to
/// the saddle height followed by a horizontal line. The contour pieces carry
/// no catastrophic cancellation, so relative accuracy holds even where the
/// kernel is exponentially small (alpha = 1).
double heat_kernel(double alpha, double t, double x, HeatPath path = HeatPath::Auto);

/// K_{alpha,1}(r) for r >= 0 through the quadrature path.
double unit_heat_kernel(double alpha, double r);

/// K_{alpha,t}(x) * (t^{1/(2 alpha)} + |x|)^{1 + 2 alpha} / t.
double heat_envelope_ratio(double alpha, double t, double x);

struct EnvelopeConstants {
  double lower = 0.01;
  double upper = 20.0;
};

/// Two-sided power-law envelope check. For alpha = 1 the envelope only holds
/// on |x| <= 6 t^{1/2}; outside that region there is nothing to check and the
/// result is true.
bool heat_kernel_envelope_check(double alpha, double t, double x,
                                EnvelopeConstants constants = {});

/// Memoized K_{alpha,1}. Nodes are uniform in v = log(1 + r/s), with s the
/// curvature scale of the kernel at the origin (capped at 1); values are
/// stored as log K, and a four-point Lagrange cubic interpolates between
/// nodes. Beyond the last node the quadrature path is used directly.
class HeatKernelTable {
 public:
  /// Shared, lazily built table for the given order (thread-safe).
  static std::shared_ptr<const HeatKernelTable> for_order(double alpha);

  explicit HeatKernelTable(double alpha, double pitch = kDefaultPitch, double v_max = kDefaultVMax);

  double alpha() const { return alpha_; }
  double unit(double r) const;
  double operator()(double t, double x) const;
  std::size_t size() const { return log_values_.size(); }

  static constexpr double kDefaultPitch = 0.002;
  static constexpr double kDefaultVMax = 30.0;

 private:
  double alpha_;
  double pitch_;
  double v_max_;
  double scale_ = 1.0;
  std::vector<double> log_values_;
};

// ---------------------------------------------------------------------------
// Fractional Poisson kernel
// ---------------------------------------------------------------------------

/// c(1, sigma) = Gamma((1 + sigma)/2) / (sqrt(pi) Gamma(sigma/2)).
double poisson_normalizer(double sigma);

/// p^sigma_t(x) = c(1, sigma) t^sigma / (x^2 + t^2)^{(1 + sigma)/2}.
double poisson_kernel(double sigma, double t, double x);

/// G_sigma(r) = int_R exp(-2 pi i r x) (1 + x^2)^{-(1+sigma)/2} dx, by quadrature.
/// The error is controlled relative to G_sigma(0), not to G_sigma(r).
double g_sigma(double sigma, double r);
double g_sigma(double sigma, double r, const quadrature::QuadratureSpec& spec);

/// Rigorous bound G_sigma(r) <= g_sigma_bound_scale(sigma) * exp(-pi r), from
/// shifting the integration line by i/2.
double g_sigma_bound_scale(double sigma);

// ---------------------------------------------------------------------------

/// The family's spatial kernel k_t(x): K_{alpha,t}(x) or p^sigma_t(x). Heat
/// kernels of general order come from the memo table.
double family_kernel(const KernelFamily& family, double t, double x);

/// Tolerances used inside single kernel evaluations.
const quadrature::QuadratureSpec& kernel_quadrature_spec();

}  // namespace fracafd
