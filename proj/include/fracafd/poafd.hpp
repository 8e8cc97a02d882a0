#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fracafd/rkhs.hpp"

namespace fracafd {

/// Upper-triangular matrix stored by columns; column j holds rows 0..j.
class TriangularMatrix {
 public:
  std::size_t size() const { return columns_.size(); }
  double operator()(std::size_t row, std::size_t col) const {
    return row <= col ? columns_[col][row] : 0.0;
  }
  const std::vector<double>& column(std::size_t j) const { return columns_[j]; }
  void append_column(std::vector<double> column);
  std::vector<std::vector<double>> dense() const;

 private:
  std::vector<std::vector<double>> columns_;
};

/// What happened while choosing one parameter.
struct StepReport {
  double coarse_objective = 0.0;
  double objective = 0.0;
  std::size_t degenerate_skipped = 0;
  bool reorthogonalized = false;
};

/// f_N = sum ortho_coeffs[k] E_k = sum kernel_coeffs[k] K~_{q_k}, with
/// K~_{q_j} = sum_i A(i, j) E_i.
struct SparseRepresentation {
  KernelFamily family = KernelFamily::heat(0.5);
  std::vector<HalfSpacePoint> params;
  std::vector<double> ortho_coeffs;
  std::vector<double> kernel_coeffs;
  TriangularMatrix a_matrix;
  std::vector<double> residual_norms;
  std::vector<double> kernel_norms;
  double data_norm = 0.0;
  std::vector<StepReport> steps;

  std::size_t size() const { return params.size(); }
  /// f_N(x) = sum c_k K_{q_k}(x) / ||K_{q_k}||.
  double evaluate(const GramContext& ctx, double x) const;
};

struct SearchConfig {
  std::pair<double, double> t_range{0.02, 5.0};
  std::pair<double, double> x_range{-5.0, 5.0};
  int n_t = 40;
  int n_x = 161;
  int refine_rounds = 6;
  double refine_shrink = 0.5;
  double degeneracy_floor = 1e-8;

  void validate() const;
  double coarse_t_ratio() const;
  double coarse_x_spacing() const;
  std::vector<HalfSpacePoint> coarse_nodes() const;
  friend bool operator==(const SearchConfig&, const SearchConfig&) = default;
};

class DegeneracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every candidate was (numerically) in the span of the selected kernels.
class DictionaryExhausted : public std::runtime_error {
 public:
  DictionaryExhausted(const std::string& what, std::shared_ptr<const SparseRepresentation> partial = nullptr)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const SparseRepresentation* partial() const { return partial_.get(); }

 private:
  std::shared_ptr<const SparseRepresentation> partial_;
};

/// Objective comparison used by every search: strictly larger beyond a
/// relative tie band, or tied and lexicographically smaller in (t, x).
bool better_candidate(double value, const HalfSpacePoint& q, double incumbent_value,
                      const HalfSpacePoint& incumbent);

struct CoarseCache;

/// Decomposition after k - 1 steps. Copies share the search cache.
class PoafdState {
 public:
  PoafdState(const GramContext& ctx, const DataFunction& f, double degeneracy_floor = 1e-8);

  const GramContext& context() const { return *ctx_; }
  const DataFunction& data() const { return *data_; }
  std::size_t size() const { return params_.size(); }
  const std::vector<HalfSpacePoint>& params() const { return params_; }
  const TriangularMatrix& a_matrix() const { return a_; }
  const std::vector<double>& ortho_coeffs() const { return ortho_; }
  /// ||f||^2 - sum <f, E_k>^2.
  double residual_sq() const { return residual_sq_; }
  double degeneracy_floor() const { return degeneracy_floor_; }

  /// <K~_q, E_j> for j < k, given G~(q, q_j).
  std::vector<double> projections(const std::vector<double>& normalized_gram) const;
  /// G~(q, q_j) for the selected q_j.
  std::vector<double> normalized_gram_row(const HalfSpacePoint& q) const;

 private:
  friend PoafdState gram_schmidt_update(const PoafdState&, const HalfSpacePoint&, StepReport*);
  friend HalfSpacePoint select_next(const PoafdState&, const SearchConfig&, StepReport*);

  const GramContext* ctx_;
  const DataFunction* data_;
  double degeneracy_floor_;
  std::vector<HalfSpacePoint> params_;
  std::vector<double> kernel_norms_;
  TriangularMatrix a_;
  std::vector<double> ortho_;
  double residual_sq_;
  std::shared_ptr<CoarseCache> cache_;
};

/// |<f, E_k^q>| where E_k^q orthonormalizes K_q against E_1..E_{k-1};
/// nullopt when 1 - sum <K~_q, E_j>^2 falls below the degeneracy floor.
std::optional<double> preortho_objective(const PoafdState& state, const HalfSpacePoint& q);

/// Same, from precomputed <f, K~_q> and projections.
std::optional<double> preortho_objective(const PoafdState& state, double data_inner_normalized,
                                         const std::vector<double>& projections);

/// Coarse grid search followed by local 3x3 refinement.
HalfSpacePoint select_next(const PoafdState& state, const SearchConfig& cfg, StepReport* report = nullptr);

/// Appends q as the next parameter: new column of A, <f, E_k>, residual.
PoafdState gram_schmidt_update(const PoafdState& state, const HalfSpacePoint& q, StepReport* report = nullptr);

/// Solves A c = ortho_coeffs by back-substitution.
std::vector<double> coefficients_from_orthonormal(const TriangularMatrix& a, const std::vector<double>& ortho_coeffs,
                                                  double floor = 1e-12);

struct StopRule {
  int max_terms = 0;
  std::optional<double> rel_error;

  static StopRule terms(int n) { return {n, std::nullopt}; }
  static StopRule relative(double tau, int cap = 200) { return {cap, tau}; }
};

/// Packages a state as a representation (kernel coefficients included).
SparseRepresentation make_representation(const PoafdState& state, std::vector<StepReport> steps = {});

SparseRepresentation decompose(const DataFunction& f, const GramContext& ctx, const SearchConfig& cfg,
                               StopRule stop);

}  // namespace fracafd
