#pragma once

// Simulation scenarios for size and power studies: the covariance family
//
//   C_gamma(i1,j1,i2,j2) = (1-gamma) c1(i1,i2) c2(j1,j2)
//                        + gamma / ((j1-j2)^2 + 1) * exp(-(i1-i2)^2 / ((j1-j2)^2 + 1))
//
// which is separable at gamma = 0, with Gaussian and multivariate-t(6) draws.

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "sepcov/bootstrap.hpp"

namespace sepcov {

enum class Family { Gaussian, T6 };

std::string_view to_string(Family family) noexcept;
Family parse_family(std::string_view text);

FullCov4 build_c_gamma(Eigen::Index d1, Eigen::Index d2, double gamma, const SymMatrix& c1,
                       const SymMatrix& c2);

/// Stand-in marginals: squared-exponential kernels exp(-(a-b)^2 / l^2) on the
/// grid 1..d with length scale l = d/3. Unit diagonal.
std::pair<SymMatrix, SymMatrix> default_marginals(Eigen::Index d1, Eigen::Index d2);

struct ScenarioConfig {
  Eigen::Index d1 = 32;
  Eigen::Index d2 = 7;
  double gamma = 0.0;
  Family family = Family::Gaussian;
  Eigen::Index n = 100;
  std::uint64_t seed = 0;
};

/// Draws replicates from a scenario. The spectral factor of C_gamma (or of its
/// correlation matrix for t6) is computed once at construction.
class ScenarioSampler {
 public:
  explicit ScenarioSampler(const ScenarioConfig& cfg);
  ScenarioSampler(const ScenarioConfig& cfg, const SymMatrix& c1, const SymMatrix& c2);

  void draw(RngStream& rng, Eigen::Map<RowMatrix> out) const;
  SampleSet draw_sample(RngStream& rng, Eigen::Index n) const;

  /// Covariance of one draw, including the nu/(nu-2) inflation for t6.
  Matrix covariance() const;

 private:
  ScenarioConfig cfg_;
  Matrix factor_;
};

/// N replicates from RngStream(cfg.seed, 0).
SampleSet sample_scenario(const ScenarioConfig& cfg);
SampleSet sample_scenario(const ScenarioConfig& cfg, RngStream& rng);

struct TestSpec {
  Statistic statistic = Statistic::GTilde;
  Method method = Method::EmpBoot;
  ProjectionSet proj = ProjectionSet::rectangular(1, 1);
  int B = 200;
};

/// Runs one test on a sample. Asymptotic tests with G use the single-pair
/// variant, with g-tilde the studentized full variant.
TestReport run_test(const SampleSet& s, const TestSpec& spec, std::uint64_t seed,
                    unsigned threads = 1);

struct PowerStudy {
  Family family = Family::Gaussian;
  Eigen::Index d1 = 32;
  Eigen::Index d2 = 7;
  std::vector<double> gammas{0.0};
  std::vector<Eigen::Index> ns{100};
  int replications = 500;
  double alpha = 0.05;
  std::vector<TestSpec> tests;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

struct PowerRow {
  std::string scenario;
  double gamma = 0.0;
  Eigen::Index n = 0;
  std::string statistic;
  std::string method;
  std::string proj;
  int B = 0;
  int reps = 0;
  double power = 0.0;
  double se = 0.0;
  std::uint64_t seed = 0;
  /// Replications where the test itself failed on the simulated data; they
  /// count as non-rejections.
  int failures = 0;
};

/// Identifies a (gamma, N) cell independently of the grid it sits in.
std::uint64_t cell_seed(const PowerStudy& study, double gamma, Eigen::Index n);

/// Rejection rate (p < alpha) with binomial standard error for every
/// (gamma, N, test). All tests in a cell see the same simulated samples.
/// on_cell, if set, receives each finished cell's rows; skip_cell, if set and
/// returning true, skips the cell (used to resume).
std::vector<PowerRow> power_curve(
    const PowerStudy& study,
    const std::function<bool(double gamma, Eigen::Index n)>& skip_cell = {},
    const std::function<void(const std::vector<PowerRow>&)>& on_cell = {});

}  // namespace sepcov
