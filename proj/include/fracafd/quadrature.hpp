#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracafd::quadrature {

using Integrand = std::function<double(double)>;

/// Tolerances shared by every integral in the library.
struct QuadratureSpec {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  int max_subdivisions = 20000;
  /// Tail mass (relative to the running estimate) below which an improper
  /// integral is truncated.
  double tail_tol = 1e-12;

  void validate() const;
};

/// Upper bound on |f(u)| for u >= 0 together with its tail mass.
///   bound(u)  >= |f(u)|
///   tail(R)   >= integral of bound over [R, inf)
struct DecayBound {
  std::function<double(double)> bound;
  std::function<double(double)> tail;
};

/// Subdivision budget exhausted before the tolerance was met.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double estimate, double error)
      : std::runtime_error(what), estimate_(estimate), error_(error) {}
  double estimate() const { return estimate_; }
  double error() const { return error_; }

 private:
  double estimate_;
  double error_;
};

/// No finite truncation radius met the tail criterion.
class TruncationError : public std::runtime_error {
 public:
  TruncationError(const std::string& what, double estimate, double radius)
      : std::runtime_error(what), estimate_(estimate), radius_(radius) {}
  double estimate() const { return estimate_; }
  double radius() const { return radius_; }

 private:
  double estimate_;
  double radius_;
};

/// Nodes and weights of the fixed-order Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre_rule();
constexpr int kGaussOrder = 15;

/// One Gauss-Legendre panel, no error control.
double gauss_panel(const Integrand& f, double a, double b);

/// Globally adaptive Gauss-Legendre quadrature on [a, b]. The panel with the
/// largest error estimate (coarse panel vs. its bisection) is split until the
/// summed estimate satisfies max(abs_tol, rel_tol*|I|).
double integrate_adaptive(const Integrand& f, double a, double b,
                          const QuadratureSpec& spec);

/// Same, with the interval pre-split at the given interior points.
double integrate_adaptive(const Integrand& f, std::vector<double> breakpoints,
                          const QuadratureSpec& spec);

/// Integral over [0, inf). The radius is doubled until the bound's tail mass
/// falls below tail_tol * |estimate| (or abs_tol).
double integrate_halfline_decaying(const Integrand& f, const DecayBound& bound,
                                   const QuadratureSpec& spec,
                                   double initial_radius = 1.0);

/// Integral of envelope(r) * cos(frequency * r) over [0, inf) for a positive
/// decreasing envelope. Panels end on the zeros of the cosine;
/// the partial sums are accelerated by repeated pairwise averaging, which
/// converges quickly even when the envelope has an algebraic tail.
double integrate_oscillatory_cosine(const Integrand& envelope,
                                    const DecayBound& envelope_bound,
                                    double frequency,
                                    const QuadratureSpec& spec);

/// Pairwise (cascade) summation.
double pairwise_sum(const std::vector<double>& values);

}  // namespace fracafd::quadrature
