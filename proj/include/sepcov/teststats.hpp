#pragma once

// Projection statistics T_N(r,s) and the aggregate statistics built on them.
//
// T_N(r,s) = sqrt(N) * [ (1/N) sum_k (u_r^T (X_k - Xbar) v_s)^2 - lambda_r gamma_s ]
//
// where (lambda_r, u_r) are eigenpairs of the row marginal c1 and
// (gamma_s, v_s) of the column marginal c2. It equals
// sqrt(N) <D_N (u_r (x) v_s), u_r (x) v_s> without ever forming D_N.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sepcov/covariance.hpp"

namespace sepcov {

/// 1-based eigendirection indices.
struct IndexPair {
  int r = 1;
  int s = 1;
  friend bool operator==(const IndexPair&, const IndexPair&) = default;
};

class ProjectionSet {
 public:
  /// {1..p} x {1..q}, ordered row-major.
  static ProjectionSet rectangular(int p, int q);
  /// Validates distinctness and positivity; detects rectangular sets in any order.
  static ProjectionSet from_pairs(std::vector<IndexPair> pairs);
  /// "pxq" (e.g. "2x2") or "(r,s);(r,s);...".
  static ProjectionSet parse(std::string_view text);

  const std::vector<IndexPair>& pairs() const noexcept { return pairs_; }
  std::size_t size() const noexcept { return pairs_.size(); }
  bool is_rectangular() const noexcept { return rectangular_; }
  int p() const noexcept { return p_; }
  int q() const noexcept { return q_; }
  int max_r() const noexcept;
  int max_s() const noexcept;

  /// Canonical text form, "pxq" when rectangular.
  std::string to_string() const;

 private:
  std::vector<IndexPair> pairs_;
  bool rectangular_ = false;
  int p_ = 0;
  int q_ = 0;
};

/// T_N values, one per pair of the projection set (same order).
struct TMatrix {
  ProjectionSet proj;
  std::vector<double> values;

  double at(int r, int s) const;
  /// p x q matrix; throws NonRectangularSet otherwise.
  Matrix as_matrix() const;
};

/// Everything the projection statistics need from one sample.
struct SeparableFit {
  CenteredSample centered;
  MarginalPair marginals;
  EigenSystem eig1;
  EigenSystem eig2;
};

SeparableFit fit_separable(const SampleSet& s);

/// Throws ZeroEigenvalue if lambda_r * gamma_s <= 1e-12 * lambda_1 * gamma_1
/// for a requested pair, InvalidArgument if an index exceeds the grid.
TMatrix t_stat(const SeparableFit& fit, const ProjectionSet& proj);
TMatrix t_stat(const SampleSet& s, const ProjectionSet& proj);

/// Gaussian-case asymptotic variance of T_N(r,s). Throws DegenerateVariance if
/// the value is <= 1e-15 * (lambda_1 gamma_1)^2.
double sigma_hat_sq(const MarginalPair& mp, const EigenSystem& eig1, const EigenSystem& eig2,
                    int r, int s);

/// sigma_hat_sq for every pair in proj, same order.
std::vector<double> sigma_hat_sq_all(const SeparableFit& fit, const ProjectionSet& proj);

/// Row and column covariance factors of the p x q matrix of T_N values. Their
/// Kronecker product is the Gaussian-case asymptotic covariance, so
/// sigma_l(r,r) * sigma_r(s,s) == sigma_hat_sq(r,s).
std::pair<SymMatrix, SymMatrix> sigma_lr(const MarginalPair& mp, const EigenSystem& eig1,
                                         const EigenSystem& eig2, int p, int q);

/// sum of T^2 over the projection set.
double g_stat(const TMatrix& t);

/// sum of T^2 / sigma^2; sigmas in the same order as t.proj.
double g_tilde_a(const TMatrix& t, const std::vector<double>& sigmas);

/// |sl^{-1/2} T sr^{-1/2}|^2 with symmetric inverse square roots.
double g_tilde(const TMatrix& t, const SymMatrix& sl, const SymMatrix& sr);
/// Same, for a p x q matrix directly.
double g_tilde(const Matrix& t, const SymMatrix& sl, const SymMatrix& sr);

/// One warning per near-tie (gap < 1e-8 * leading eigenvalue) that touches a
/// requested direction.
std::vector<std::string> eigen_tie_warnings(const SeparableFit& fit, const ProjectionSet& proj);

enum class Statistic { G, GTilde, GTildeA, HS };

std::string_view to_string(Statistic stat) noexcept;
/// Accepts "g", "g-tilde", "g-tilde-a", "hs" (underscores also accepted).
Statistic parse_statistic(std::string_view text);

/// H_N for the chosen statistic. The projection set is ignored for HS.
double evaluate_statistic(const SampleSet& s, Statistic stat, const ProjectionSet& proj);
double evaluate_statistic(const SeparableFit& fit, const SampleSet& s, Statistic stat,
                          const ProjectionSet& proj);

}  // namespace sepcov
