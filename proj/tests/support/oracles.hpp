#pragma once

// Independent reference computations for the tests. Everything here is
// written with plain loops over the four-index definitions and deliberately
// avoids the library's fast paths and vector kernels.

#include <random>
#include <utility>

#include "sepcov/covariance.hpp"

namespace oracle {

using sepcov::Matrix;
using sepcov::SampleSet;

/// Entries are N(0,1) times a random per-entry scale plus a shared
/// low-rank component, so samples are neither separable nor isotropic.
SampleSet random_sample(std::mt19937_64& rng, int n, int d1, int d2);

/// Exactly rank-one data X_m = xi_m * u v^T with unit u, v.
SampleSet rank_one_sample(std::mt19937_64& rng, int n, int d1, int d2);

/// (1/N) sum_m A_m(i,j) A_m(k,l) on index (i*d2 + j, k*d2 + l).
Matrix dense_cov(const SampleSet& s);

/// Normalized marginals by the double-sum definition.
std::pair<Matrix, Matrix> naive_marginals(const SampleSet& s);

/// a(i,k) b(j,l) on index (i*d2 + j, k*d2 + l).
Matrix kron(const Matrix& a, const Matrix& b);

/// C_N - c1 (x) c2.
Matrix dense_d(const SampleSet& s);

/// sqrt(N) <D_N (u_r (x) v_s), u_r (x) v_s> with 1-based r, s.
double dense_t(const SampleSet& s, int r, int s_idx);

double dense_hs(const SampleSet& s);
double dense_hs_diff(const SampleSet& boot, const SampleSet& orig);

/// Descending eigenpairs by Eigen's solver, no sign convention.
std::pair<Eigen::VectorXd, Matrix> eig_desc(const Matrix& m);

/// Kolmogorov-Smirnov statistic of a sample against a continuous CDF.
template <class Cdf>
double ks_statistic(std::vector<double> x, Cdf&& cdf);

/// Asymptotic KS p-value (Kolmogorov distribution) for statistic d and size n.
double ks_pvalue(double d, std::size_t n);

}  // namespace oracle

#include <algorithm>
#include <vector>

template <class Cdf>
double oracle::ks_statistic(std::vector<double> x, Cdf&& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}
