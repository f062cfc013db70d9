#pragma once

// Parametric (Gaussian) and empirical bootstrap approximations of the null
// distribution of the separability statistics.
//
// Every replicate b draws from its own stream RngStream(seed, b), so p-values
// are identical for any worker count.

#include <cstdint>
#include <random>
#include <vector>

#include "sepcov/asymptotic.hpp"

namespace sepcov {

/// SplitMix64 finalizer; used to derive independent seeds from (seed, tag).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) noexcept;

/// Reproducible random stream identified by (seed, stream_id).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  double normal();
  double chi_squared(double df);
  /// Uniform on {0, ..., n-1}.
  Eigen::Index uniform_index(Eigen::Index n);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

struct BootstrapConfig {
  int B = 1000;
  Statistic statistic = Statistic::GTilde;
  ProjectionSet proj = ProjectionSet::rectangular(1, 1);
  std::uint64_t seed = 0;
  /// 0 means SEPCOV_THREADS or 1.
  unsigned threads = 0;
};

/// Draws mean + A G B^T with A A^T = c1, B B^T = c2 and G standard normal, so
/// Cov(X(i,j), X(k,l)) = c1(i,k) c2(j,l). Square roots are symmetric PSD roots.
class SeparableGaussianSampler {
 public:
  SeparableGaussianSampler(RowMatrix mean, const SymMatrix& c1, const SymMatrix& c2);

  void draw(RngStream& rng, Eigen::Map<RowMatrix> out) const;
  RowMatrix draw(RngStream& rng) const;
  SampleSet draw_sample(RngStream& rng, Eigen::Index n) const;

 private:
  RowMatrix mean_;
  Matrix row_root_;
  Matrix col_root_;
};

RowMatrix sample_separable_gaussian(const RowMatrix& mean, const SymMatrix& c1,
                                    const SymMatrix& c2, RngStream& rng);

/// n uniform draws with replacement from {0, ..., n-1}.
std::vector<Eigen::Index> resample_indices(Eigen::Index n, RngStream& rng);
SampleSet resample(const SampleSet& s, RngStream& rng);

/// Gaussian parametric bootstrap: p = (1/B) #{H_b > H_N}.
TestReport parametric_bootstrap_test(const SampleSet& s, const BootstrapConfig& cfg);

/// Empirical bootstrap with recentered statistics:
///   g        sum (T* - T)^2
///   g-tilde  |Sl*^{-1/2} (T* - T) Sr*^{-1/2}|^2
///   g-tilde-a sum (T* - T)^2 / sigma*^2
///   hs       ||D*_N - D_N||^2
/// p = (1/B) #{Delta_b > H_N}.
TestReport empirical_bootstrap_test(const SampleSet& s, const BootstrapConfig& cfg);

/// Bootstrap statistic for one resample against the original sample's fit.
double empirical_delta(const SampleSet& boot, const SampleSet& orig, const TMatrix& orig_t,
                       Statistic stat, const ProjectionSet& proj);

}  // namespace sepcov
