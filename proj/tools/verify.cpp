#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <sstream>

#include "app.hpp"

namespace fracafd::cli {

namespace {

struct Check {
  std::string name;
  std::function<std::string(bool&)> run;  // sets ok, returns detail
};

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

std::string label(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

std::string sci(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

const std::vector<HalfSpacePoint> kLeft = {{0.3, 0.5}, {1.0, 0.5}, {2.0, 0.5}};
const std::vector<HalfSpacePoint> kRight = {{0.7, -1.0}, {0.7, 0.0}, {0.7, 2.5}};

std::string semigroup_check(double alpha, bool& ok) {
  const GramContext ctx(KernelFamily::heat(alpha));
  const oracles::OracleGrid grid{0.5, 200.0};
  double worst = 0.0;
  for (const auto& q : kLeft)
    for (const auto& p : kRight)
      worst = std::max(worst, rel_diff(gram(ctx, q, p), oracles::convolution_gram_oracle(alpha, q, p, grid)));
  ok = worst <= 1e-6;
  return "max rel diff " + sci(worst) + " (tol 1e-6)";
}

std::string poisson_semigroup_check(bool& ok) {
  const GramContext ctx(KernelFamily::poisson(1.0));
  double worst = 0.0;
  for (const auto& q : kLeft)
    for (const auto& p : kRight) worst = std::max(worst, rel_diff(gram(ctx, q, p), poisson_kernel(1.0, q.t + p.t, q.x - p.x)));
  ok = worst <= 1e-8;
  return "max rel diff " + sci(worst) + " (tol 1e-8)";
}

std::string plancherel_check(double sigma, std::size_t pairs, bool& ok) {
  static const std::vector<std::pair<HalfSpacePoint, HalfSpacePoint>> kPairs = {
      {{1.0, 0.0}, {0.5, 1.0}}, {{0.3, -0.7}, {1.2, 0.4}}, {{2.0, 1.5}, {0.8, -2.0}},
      {{0.6, 0.2}, {0.6, 3.0}}, {{1.5, -1.0}, {0.25, -0.5}}};
  const GramContext ctx(KernelFamily::poisson(sigma));
  double worst = 0.0;
  for (std::size_t i = 0; i < std::min(pairs, kPairs.size()); ++i) {
    const auto& [q, p] = kPairs[i];
    worst = std::max(worst, rel_diff(gram(ctx, q, p), oracles::plancherel_gram_oracle(sigma, q, p)));
  }
  ok = worst <= 1e-6;
  return "max rel diff " + sci(worst) + " (tol 1e-6)";
}

std::string functional_gs_check(bool& ok) {
  const auto family = KernelFamily::heat(1.0);
  const GramContext ctx(family);
  const std::vector<HalfSpacePoint> params = {{0.5, 0.0}, {1.0, 1.0}, {0.3, -1.5}, {2.0, 0.5}, {0.8, 2.5}};
  const DataFunction f([](double x) { return std::exp(-x * x); }, 20.0);
  PoafdState state(ctx, f);
  for (const auto& q : params) state = gram_schmidt_update(state, q);
  const auto oracle = oracles::functional_gs_oracle(family, params, {0.005, 40.0});
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i)
    for (std::size_t j = 0; j < params.size(); ++j)
      worst = std::max(worst, std::abs(state.a_matrix()(i, j) - oracle.a_matrix[i][j]));
  ok = worst <= 1e-5;
  return "max abs diff in A " + sci(worst) + " (tol 1e-5)";
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

std::string decay_check(const KernelFamily& family, bool& ok) {
  const GramContext ctx(family);
  std::vector<HalfSpacePoint> toward_boundary, outward;
  for (int k = 1; k <= 6; ++k) toward_boundary.push_back({std::pow(10.0, -k), 0.0});
  for (int x = 2; x <= 64; x += 2) outward.push_back({1.0, static_cast<double>(x)});
  const auto a = oracles::boundary_decay_profile(ctx, {1.0, 0.0}, toward_boundary);
  const auto b = oracles::boundary_decay_profile(ctx, {1.0, 0.0}, outward);
  ok = strictly_decreasing(a) && strictly_decreasing(b);
  return "t -> 0: " + sci(a.front()) + " .. " + sci(a.back()) + "; |x| -> inf: " + sci(b.front()) + " .. " +
         sci(b.back());
}

std::string closed_form_check(bool& ok) {
  double worst = 0.0;
  for (double t : {0.1, 1.0, 10.0})
    for (int i = 0; i <= 40; ++i) {
      const double x = -10.0 + 0.5 * i;
      const double gauss = std::exp(-x * x / (4.0 * t)) / std::sqrt(4.0 * std::numbers::pi * t);
      const double cauchy = t / (std::numbers::pi * (t * t + x * x));
      worst = std::max(worst, rel_diff(heat_kernel(1.0, t, x, HeatPath::General), gauss));
      worst = std::max(worst, rel_diff(heat_kernel(0.5, t, x, HeatPath::General), cauchy));
    }
  ok = worst <= 1e-9;
  return "max rel diff " + sci(worst) + " (tol 1e-9)";
}

std::string envelope_check(bool& ok) {
  std::size_t failures = 0, total = 0;
  for (double alpha : {0.3, 0.5, 0.8, 1.0})
    for (double t : {0.01, 0.1, 1.0, 10.0})
      for (double x : {0.0, 0.1, 1.0, 5.0, 30.0}) {
        ++total;
        if (!heat_kernel_envelope_check(alpha, t, x)) ++failures;
      }
  ok = failures == 0;
  return std::to_string(total - failures) + "/" + std::to_string(total) + " points inside the envelope";
}

std::string table_check(bool& ok) {
  double worst = 0.0;
  for (double alpha : {0.3, 0.7}) {
    const auto table = HeatKernelTable::for_order(alpha);
    for (double r = 0.0; r < 1e5; r = r * 1.37 + 0.013) worst = std::max(worst, rel_diff(table->unit(r), unit_heat_kernel(alpha, r)));
  }
  ok = worst <= 1e-9;
  return "max rel diff " + sci(worst) + " (tol 1e-9)";
}

}  // namespace

int cmd_verify(const std::string& depth, std::ostream& out) {
  const bool full = depth == "full";
  std::vector<Check> checks;
  for (double alpha : {0.3, 0.5, 0.8, 1.0})
    checks.push_back({"heat semigroup alpha=" + label(alpha), [alpha](bool& ok) { return semigroup_check(alpha, ok); }});
  checks.push_back({"poisson semigroup sigma=1", poisson_semigroup_check});
  for (double sigma : {0.7, 1.0, 1.5})
    checks.push_back({"plancherel dual route sigma=" + label(sigma),
                      [sigma, full](bool& ok) { return plancherel_check(sigma, full ? 5 : 2, ok); }});
  checks.push_back({"functional gram-schmidt", functional_gs_check});
  for (double alpha : {0.5, 0.8})
    checks.push_back({"boundary decay heat alpha=" + label(alpha),
                      [alpha](bool& ok) { return decay_check(KernelFamily::heat(alpha), ok); }});
  for (double sigma : {0.7, 1.0})
    checks.push_back({"boundary decay poisson sigma=" + label(sigma),
                      [sigma](bool& ok) { return decay_check(KernelFamily::poisson(sigma), ok); }});
  if (full) {
    checks.push_back({"classical closed forms", closed_form_check});
    checks.push_back({"two-sided kernel envelope", envelope_check});
    checks.push_back({"heat kernel memo table", table_check});
  }

  int failed = 0;
  for (const auto& check : checks) {
    const auto start = std::chrono::steady_clock::now();
    bool ok = false;
    std::string detail;
    try {
      detail = check.run(ok);
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out << (ok ? "PASS " : "FAIL ") << check.name << ": " << detail << " [" << sci(secs) << " s]\n";
    if (!ok) ++failed;
  }
  out << (failed == 0 ? "all checks passed" : std::to_string(failed) + " check(s) failed") << "\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace fracafd::cli
