#include "fracafd/kernels.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>

namespace fracafd {

using quadrature::DecayBound;
using quadrature::QuadratureSpec;
constexpr double kPi = std::numbers::pi;

void HalfSpacePoint::validate() const {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("HalfSpacePoint: t must be positive and finite");
  if (!std::isfinite(x)) throw DomainError("HalfSpacePoint: x must be finite");
}

KernelFamily KernelFamily::heat(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("heat family: alpha must lie in (0, 1]");
  return {FamilyKind::FractionalHeat, alpha};
}

KernelFamily KernelFamily::poisson(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("poisson family: sigma must be > 0");
  return {FamilyKind::FractionalPoisson, sigma};
}

const QuadratureSpec& kernel_quadrature_spec() {
  static const QuadratureSpec spec{1e-12, 0.0, 20000, 1e-13};
  return spec;
}

namespace {

constexpr double kRealAxisLimit = 2.0;

void check_heat_args(double alpha, double t) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("heat_kernel: alpha must lie in (0, 1]");
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("heat_kernel: t must be positive");
}

// (1/pi) int_0^inf exp(-u^beta) cos(r u) du on the real axis.
double real_axis(double beta, double r) {
  const auto& spec = kernel_quadrature_spec();
  const double inv_beta = 1.0 / beta;
  const double full_mass = std::tgamma(inv_beta) * inv_beta;
  DecayBound bound{
      [beta](double u) { return std::exp(-std::pow(u, beta)); },
      [=](double R) { return full_mass * boost::math::gamma_q(inv_beta, std::pow(R, beta)); }};
  return quadrature::integrate_oscillatory_cosine(bound.bound, bound, r, spec) / kPi;
}

// Contour route for r > kRealAxisLimit. With s = sin(beta pi / 2) and
// c = cos(beta pi / 2), the imaginary-axis piece of Re(int exp(-z^beta + i r z) dz)
// is int exp(-c u^beta - r u) sin(s u^beta) du.
double contour(double beta, double r) {
  const auto& spec = kernel_quadrature_spec();
  // Trigonometric values written so that beta = 2 gives s = 0, c = -1 exactly.
  const double s = std::sin(kPi * (2.0 - beta) / 2.0);
  const double c = -std::cos(kPi * (2.0 - beta) / 2.0);

  auto vertical = [=](double u) {
    double ub = std::pow(u, beta);
    return std::exp(-c * ub - r * u) * std::sin(s * ub);
  };

  if (beta <= 1.0) {
    DecayBound bound{[r](double u) { return std::exp(-r * u); },
                     [r](double R) { return std::exp(-r * R) / r; }};
    return quadrature::integrate_halfline_decaying(vertical, bound, spec, 8.0 / r) / kPi;
  }

  // Height where the modulus along the imaginary axis is smallest; the
  // horizontal line through it starts at a stationary point of the phase.
  const double s1 = -c;  // sin((beta - 1) pi / 2)
  const double height = std::pow(r / (beta * s1), 1.0 / (beta - 1.0));

  double vert = 0.0;
  if (s != 0.0) {
    auto modulus = [=](double u) { return std::exp(s1 * std::pow(u, beta) - r * u); };
    double R = std::min(height, 8.0 / r);
    std::vector<double> pieces{quadrature::integrate_adaptive(vertical, 0.0, R, spec)};
    double est = pieces.back();
    int guard = 0;
    while (R < height && modulus(R) * (height - R) > spec.tail_tol * std::abs(est)) {
      double next = std::min(2.0 * R, height);
      pieces.push_back(quadrature::integrate_adaptive(vertical, R, next, spec));
      est = quadrature::pairwise_sum(pieces);
      R = next;
      if (++guard > 400) throw quadrature::TruncationError("heat kernel contour: vertical tail", est, R);
    }
    vert = est;
  }

  auto re_g = [=](double x) {
    double mod = std::hypot(x, height);
    double theta = std::atan2(height, x);
    return -std::pow(mod, beta) * std::cos(beta * theta) - r * height;
  };
  auto horizontal = [=](double x) {
    double mod = std::hypot(x, height);
    double theta = std::atan2(height, x);
    double rb = std::pow(mod, beta);
    double re = -rb * std::cos(beta * theta) - r * height;
    double im = -rb * std::sin(beta * theta) + r * x;
    return std::exp(re) * std::cos(im);
  };
  DecayBound hbound{[=](double x) { return std::exp(re_g(x)); },
                    [=](double R) {
                      double mod = std::hypot(R, height);
                      double theta = std::atan2(height, R);
                      double slope = beta * std::pow(mod, beta - 1.0) * std::cos((beta - 1.0) * theta);
                      return std::exp(re_g(R)) / slope;
                    }};
  // Horizontal piece: its scale is set by the vertical piece when the latter
  // dominates, so an absolute floor relative to it keeps the cost bounded.
  QuadratureSpec hspec = spec;
  hspec.abs_tol = 1e-3 * spec.rel_tol * std::abs(vert);
  double horiz = 0.0;
  if (std::exp(re_g(0.0)) * 1e3 > hspec.abs_tol || hspec.abs_tol == 0.0)
    horiz = quadrature::integrate_halfline_decaying(horizontal, hbound, hspec, 1.0);
  return (vert + horiz) / kPi;
}

}  // namespace

double unit_heat_kernel(double alpha, double r) {
  check_heat_args(alpha, 1.0);
  r = std::abs(r);
  const double beta = 2.0 * alpha;
  if (r <= kRealAxisLimit) return real_axis(beta, r);
  return contour(beta, r);
}

double heat_kernel(double alpha, double t, double x, HeatPath path) {
  check_heat_args(alpha, t);
  x = std::abs(x);
  if (path == HeatPath::Auto) {
    if (alpha == 1.0) return std::exp(-x * x / (4.0 * t)) / std::sqrt(4.0 * kPi * t);
    if (alpha == 0.5) return t / (kPi * (t * t + x * x));
  }
  const double scale = std::pow(t, -1.0 / (2.0 * alpha));
  return scale * unit_heat_kernel(alpha, x * scale);
}

double heat_envelope_ratio(double alpha, double t, double x) {
  double k = heat_kernel(alpha, t, x);
  return k * std::pow(std::pow(t, 1.0 / (2.0 * alpha)) + std::abs(x), 1.0 + 2.0 * alpha) / t;
}

bool heat_kernel_envelope_check(double alpha, double t, double x, EnvelopeConstants constants) {
  check_heat_args(alpha, t);
  if (alpha == 1.0 && std::abs(x) > 6.0 * std::sqrt(t)) return true;
  double ratio = heat_envelope_ratio(alpha, t, x);
  return ratio >= constants.lower && ratio <= constants.upper;
}

// ---------------------------------------------------------------------------

HeatKernelTable::HeatKernelTable(double alpha, double pitch, double v_max)
    : alpha_(alpha), pitch_(pitch), v_max_(v_max) {
  check_heat_args(alpha, 1.0);
  // Curvature scale of K_1 at the origin, sqrt(K(0) / |K''(0)|); it is tiny
  // for small alpha, where the kernel has a sharp central spike.
  const double beta = 2.0 * alpha;
  scale_ = std::min(1.0, std::exp(0.5 * (std::lgamma(1.0 / beta) - std::lgamma(3.0 / beta))));
  const auto n = static_cast<std::size_t>(std::ceil(v_max / pitch)) + 1;
  log_values_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double r = scale_ * std::expm1(pitch * static_cast<double>(i));
    log_values_[i] = std::log(unit_heat_kernel(alpha, r));
  }
}

double HeatKernelTable::unit(double r) const {
  r = std::abs(r);
  const double v = std::log1p(r / scale_);
  const auto n = static_cast<long>(log_values_.size());
  const double u = v / pitch_;
  long i = static_cast<long>(std::floor(u));
  if (i >= n - 2) return unit_heat_kernel(alpha_, r);
  long base = std::clamp(i - 1, 0L, n - 4);
  // Four-point Lagrange on nodes base..base+3 at offset s from node `base`.
  const double s = u - static_cast<double>(base);
  const double* y = &log_values_[static_cast<std::size_t>(base)];
  double l0 = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0;
  double l1 = s * (s - 2.0) * (s - 3.0) / 2.0;
  double l2 = -s * (s - 1.0) * (s - 3.0) / 2.0;
  double l3 = s * (s - 1.0) * (s - 2.0) / 6.0;
  return std::exp(l0 * y[0] + l1 * y[1] + l2 * y[2] + l3 * y[3]);
}

double HeatKernelTable::operator()(double t, double x) const {
  const double scale = std::pow(t, -1.0 / (2.0 * alpha_));
  return scale * unit(x * scale);
}

std::shared_ptr<const HeatKernelTable> HeatKernelTable::for_order(double alpha) {
  static std::mutex mutex;
  static std::map<double, std::shared_ptr<const HeatKernelTable>> tables;
  std::lock_guard lock(mutex);
  auto& slot = tables[alpha];
  if (!slot) slot = std::make_shared<const HeatKernelTable>(alpha);
  return slot;
}

// ---------------------------------------------------------------------------

double poisson_normalizer(double sigma) {
  if (!(sigma > 0.0)) throw DomainError("poisson_normalizer: sigma must be > 0");
  // Hot path: the kernel is evaluated at a fixed order many times in a row.
  thread_local double last_sigma = -1.0;
  thread_local double last_value = 0.0;
  if (sigma != last_sigma) {
    last_value = std::exp(std::lgamma(0.5 * (1.0 + sigma)) - std::lgamma(0.5 * sigma)) / std::sqrt(kPi);
    last_sigma = sigma;
  }
  return last_value;
}

double poisson_kernel(double sigma, double t, double x) {
  if (!(sigma > 0.0)) throw DomainError("poisson_kernel: sigma must be > 0");
  if (!(t > 0.0)) throw DomainError("poisson_kernel: t must be > 0");
  return poisson_normalizer(sigma) * std::pow(t, sigma) / std::pow(x * x + t * t, 0.5 * (1.0 + sigma));
}

double g_sigma(double sigma, double r) { return g_sigma(sigma, r, kernel_quadrature_spec()); }

double g_sigma(double sigma, double r, const QuadratureSpec& spec) {
  if (!(sigma > 0.0)) throw DomainError("g_sigma: sigma must be > 0");
  if (!(r >= 0.0)) throw DomainError("g_sigma: r must be >= 0");
  const double p = 0.5 * (1.0 + sigma);
  auto envelope = [p](double x) { return std::pow(1.0 + x * x, -p); };
  DecayBound bound{envelope, [sigma](double R) {
                     return R > 0.0 ? std::pow(R, -sigma) / sigma : INFINITY;
                   }};
  // G_sigma(r) falls like exp(-2 pi r) while the real-line integral cancels
  // terms of size G_sigma(0); accuracy is absolute on that scale.
  QuadratureSpec floored = spec;
  const double at_zero = std::sqrt(kPi) * std::exp(std::lgamma(0.5 * sigma) - std::lgamma(p));
  floored.abs_tol = std::max(spec.abs_tol, 0.5 * spec.rel_tol * at_zero);
  return 2.0 * quadrature::integrate_oscillatory_cosine(envelope, bound, 2.0 * kPi * r, floored);
}

double g_sigma_bound_scale(double sigma) {
  // int (x^2 + 3/4)^{-(1+sigma)/2} dx = (3/4)^{-sigma/2} B(1/2, sigma/2)
  return std::pow(0.75, -0.5 * sigma) * std::sqrt(kPi) *
         std::exp(std::lgamma(0.5 * sigma) - std::lgamma(0.5 * (1.0 + sigma)));
}

double family_kernel(const KernelFamily& family, double t, double x) {
  if (family.is_heat()) {
    const double alpha = family.order();
    if (alpha == 1.0 || alpha == 0.5) return heat_kernel(alpha, t, x);
    return (*HeatKernelTable::for_order(alpha))(t, x);
  }
  return poisson_kernel(family.order(), t, x);
}

}  // namespace fracafd
