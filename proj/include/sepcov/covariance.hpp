#pragma once

#include <span>
#include <vector>

#include "sepcov/linalg.hpp"

namespace sepcov {

/// N replicates of a d1 x d2 real matrix, stored contiguously, each replicate
/// row-major.
class SampleSet {
 public:
  SampleSet() = default;
  /// Zero-filled.
  SampleSet(Eigen::Index n, Eigen::Index d1, Eigen::Index d2);
  /// data.size() must equal n*d1*d2; entries must be finite.
  SampleSet(Eigen::Index n, Eigen::Index d1, Eigen::Index d2, std::vector<double> data);

  static SampleSet from_matrices(std::span<const Matrix> replicates);

  Eigen::Index n() const noexcept { return n_; }
  Eigen::Index d1() const noexcept { return d1_; }
  Eigen::Index d2() const noexcept { return d2_; }

  Eigen::Map<const RowMatrix> operator[](Eigen::Index m) const {
    return {data_.data() + m * d1_ * d2_, d1_, d2_};
  }
  Eigen::Map<RowMatrix> operator[](Eigen::Index m) {
    return {data_.data() + m * d1_ * d2_, d1_, d2_};
  }

  const std::vector<double>& data() const noexcept { return data_; }

  /// Replicates picked by index, repeats allowed.
  SampleSet select(std::span<const Eigen::Index> indices) const;

  bool same_shape(const SampleSet& other) const noexcept {
    return n_ == other.n_ && d1_ == other.d1_ && d2_ == other.d2_;
  }

 private:
  Eigen::Index n_ = 0;
  Eigen::Index d1_ = 0;
  Eigen::Index d2_ = 0;
  std::vector<double> data_;
};

/// Normalized marginal covariances c1 = tr_2(C_N)/sqrt(tr C_N) and
/// c2 = tr_1(C_N)/sqrt(tr C_N). Both traces equal sqrt(tr C_N).
struct MarginalPair {
  SymMatrix c1;
  SymMatrix c2;
  double trace_c1 = 0.0;
  double trace_c2 = 0.0;
  double hs_sq_c1 = 0.0;
  double hs_sq_c2 = 0.0;
  /// tr(C_N), the total centered variance divided by N.
  double total_trace = 0.0;
};

/// Centered data in the two stacked layouts used by the vector kernels:
/// by_row holds d1 rows of length N*d2 with row k = [A_1(k,:) ... A_N(k,:)];
/// by_col holds d2 rows of length N*d1 with row l = [A_1(:,l) ... A_N(:,l)],
/// where A_m = X_m - mean.
struct CenteredSample {
  Eigen::Index n = 0;
  Eigen::Index d1 = 0;
  Eigen::Index d2 = 0;
  RowMatrix mean;
  std::vector<double> by_row;
  std::vector<double> by_col;

  const double* row(Eigen::Index k) const { return by_row.data() + k * n * d2; }
  const double* col(Eigen::Index l) const { return by_col.data() + l * n * d1; }
};

RowMatrix sample_mean(const SampleSet& s);

CenteredSample center(const SampleSet& s);

/// Divisor N, not N-1. Throws DegenerateSample when the centered sum of squares
/// is below 1e-300 and EmptySample when n < 2.
MarginalPair marginal_covariances(const SampleSet& s);
MarginalPair marginal_covariances(const CenteredSample& cs);

/// C(i,j,k,l) = (1/N) sum_m A_m(i,j) A_m(k,l). Small grids only.
FullCov4 full_covariance(const SampleSet& s);

/// ||C_N - c1 (x) c2||_HS^2 evaluated entry by entry without storing C_N.
double hs_norm_dn_streaming(const SampleSet& s);

/// ||D*_N - D_N||_HS^2 for a bootstrap sample against the original sample.
double hs_norm_dn_diff_streaming(const SampleSet& boot, const SampleSet& orig);

}  // namespace sepcov
