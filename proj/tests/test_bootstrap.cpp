#include <doctest.h>

#include <random>
#include <set>

#include "sepcov/simulation.hpp"
#include "support/check.hpp"
#include "support/oracles.hpp"

using namespace sepcov;

namespace {

Matrix ar1(int d, double rho) {
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = std::pow(rho, std::abs(i - j));
  return m;
}

}  // namespace

TEST_CASE("seed mixing and streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 50; ++s)
    for (std::uint64_t t = 0; t < 50; ++t) seen.insert(mix_seed(s, t));
  CHECK(seen.size() == 2500);

  RngStream a(7, 3), b(7, 3), c(7, 4), d(8, 3);
  const double x = a.normal();
  CHECK(x == b.normal());
  CHECK(x != c.normal());
  CHECK(x != d.normal());
  CHECK(a.seed() == 7);
  CHECK(a.stream_id() == 3);
}

TEST_CASE("resampling") {
  RngStream rng(1, 0);
  const auto idx = resample_indices(10, rng);
  CHECK(idx.size() == 10);
  for (auto i : idx) {
    CHECK(i >= 0);
    CHECK(i < 10);
  }
  std::mt19937_64 g(2);
  const SampleSet s = oracle::random_sample(g, 6, 2, 3);
  RngStream r2(5, 1);
  const SampleSet boot = resample(s, r2);
  CHECK(boot.same_shape(s));
  for (Eigen::Index m = 0; m < boot.n(); ++m) {
    bool found = false;
    for (Eigen::Index k = 0; k < s.n(); ++k) found = found || Matrix(boot[m]) == Matrix(s[k]);
    CHECK(found);
  }
  CHECK_ERROR_KIND(resample(SampleSet(1, 2, 2), r2), ErrorKind::EmptySample);
  CHECK_ERROR_KIND(resample_indices(0, r2), ErrorKind::EmptySample);
}

TEST_CASE("separable Gaussian sampler moments") {
  const Matrix a = ar1(3, 0.6), b = ar1(2, -0.4) * 2.0;
  RowMatrix mean(3, 2);
  mean << 1, -1, 0.5, 2, 0, 3;
  const SeparableGaussianSampler sampler(mean, SymMatrix(a), SymMatrix(b));
  RngStream rng(11, 0);
  const int n = 20000;
  const SampleSet s = sampler.draw_sample(rng, n);
  const Matrix c = full_covariance(s).mat();
  const Matrix target = oracle::kron(a, b);
  for (int p = 0; p < 6; ++p)
    for (int q = 0; q < 6; ++q) {
      const double se = std::sqrt((target(p, p) * target(q, q) + target(p, q) * target(p, q)) / n);
      CHECK(std::abs(c(p, q) - target(p, q)) < 5 * se);
    }
  const RowMatrix m = sample_mean(s);
  CHECK((Matrix(m) - Matrix(mean)).cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("separable Gaussian sampler handles semi-definite marginals") {
  Vector u(3);
  u << 1, 2, -1;
  const Matrix a = u * u.transpose();
  const SeparableGaussianSampler sampler(RowMatrix::Zero(3, 2), SymMatrix(a), SymMatrix(ar1(2, 0.5)));
  RngStream rng(3, 0);
  const RowMatrix x = sampler.draw(rng);
  CHECK(x.allFinite());
  // every column lies in span(u)
  const Vector un = u.normalized();
  for (int j = 0; j < 2; ++j) {
    const Vector col = x.col(j);
    CHECK((col - un * un.dot(col)).norm() < 1e-10 * (1 + col.norm()));
  }
  CHECK_ERROR_KIND(SeparableGaussianSampler(RowMatrix::Zero(2, 2), SymMatrix(a), SymMatrix(ar1(2, 0.5))),
                   ErrorKind::ShapeMismatch);
}

TEST_CASE("B = 1 with a smaller bootstrap statistic gives p = 0") {
  // Strongly non-separable data: X = g1 * P + g2 * Q with P, Q of different
  // row and column structure. The separable bootstrap world sits far below.
  Matrix p(3, 3), q(3, 3);
  p << 1, 0, 0, 0, 1, 0, 0, 0, 0;
  q << 0, 0, 1, 0, 0, 0, 1, 0, 0;
  std::vector<Matrix> reps;
  RngStream g(1, 0);
  for (int m = 0; m < 200; ++m) {
    reps.push_back(g.normal() * p + 3.0 * g.normal() * q + 0.05 * Matrix::Random(3, 3));
  }
  const SampleSet s = SampleSet::from_matrices(reps);
  BootstrapConfig cfg;
  cfg.B = 1;
  cfg.statistic = Statistic::G;
  cfg.seed = 1;
  const TestReport r = parametric_bootstrap_test(s, cfg);
  CHECK(r.p_value == 0.0);
  CHECK(*r.p_plus == 0.5);
  CHECK(r.replicates == 1);
}

TEST_CASE("bootstrap p-values do not depend on the thread count") {
  std::mt19937_64 g(4);
  const SampleSet s = oracle::random_sample(g, 25, 5, 4);
  for (auto stat : {Statistic::G, Statistic::GTilde, Statistic::GTildeA, Statistic::HS}) {
    for (int method = 0; method < 2; ++method) {
      BootstrapConfig cfg;
      cfg.B = 60;
      cfg.statistic = stat;
      cfg.proj = ProjectionSet::rectangular(2, 2);
      cfg.seed = 123;
      cfg.threads = 1;
      auto run = [&](const BootstrapConfig& c) {
        return method == 0 ? parametric_bootstrap_test(s, c) : empirical_bootstrap_test(s, c);
      };
      const TestReport one = run(cfg);
      cfg.threads = 3;
      const TestReport three = run(cfg);
      CHECK(one.p_value == three.p_value);
      CHECK(one.statistic_value == three.statistic_value);
      cfg.seed = 124;
      CHECK(run(cfg).statistic_value == one.statistic_value);
    }
  }
}

TEST_CASE("empirical delta vanishes when the resample is the sample") {
  std::mt19937_64 g(5);
  const SampleSet s = oracle::random_sample(g, 20, 4, 4);
  const auto proj = ProjectionSet::rectangular(2, 2);
  const TMatrix t = t_stat(s, proj);
  for (auto stat : {Statistic::G, Statistic::GTilde, Statistic::GTildeA, Statistic::HS}) {
    CHECK(empirical_delta(s, s, t, stat, proj) == 0.0);
  }
}

TEST_CASE("failed replicates count as exceedances") {
  // With N = 2 a resample repeats one observation half of the time, and the
  // bootstrap sample is then degenerate.
  Matrix a(2, 2), b(2, 2);
  a << 1, 2, 0, -1;
  b << -0.5, 1, 3, 0.25;
  const Matrix reps[] = {a, b};
  const SampleSet s = SampleSet::from_matrices(reps);
  BootstrapConfig cfg;
  cfg.B = 40;
  cfg.statistic = Statistic::HS;
  const TestReport r = empirical_bootstrap_test(s, cfg);
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("counted as exceedances") != std::string::npos);
  CHECK(r.p_value >= 0.2);
  CHECK(std::isfinite(r.p_value));
}

TEST_CASE("invalid bootstrap configurations") {
  std::mt19937_64 g(6);
  const SampleSet s = oracle::random_sample(g, 10, 3, 3);
  BootstrapConfig cfg;
  cfg.B = 0;
  CHECK_ERROR_KIND(parametric_bootstrap_test(s, cfg), ErrorKind::InvalidArgument);
  CHECK_ERROR_KIND(empirical_bootstrap_test(s, cfg), ErrorKind::InvalidArgument);
  cfg.B = 10;
  CHECK_ERROR_KIND(empirical_bootstrap_test(SampleSet(1, 3, 3), cfg), ErrorKind::EmptySample);
}

TEST_CASE("parametric bootstrap level on Gaussian separable data") {
  ScenarioConfig sc;
  sc.d1 = 8;
  sc.d2 = 4;
  const ScenarioSampler sampler(sc);
  TestSpec spec{Statistic::GTilde, Method::ParamBoot, ProjectionSet::rectangular(1, 1), 200};
  int reject = 0;
  const int reps = 500;
  for (int rep = 0; rep < reps; ++rep) {
    RngStream rng(9001, static_cast<std::uint64_t>(rep));
    reject += run_test(sampler.draw_sample(rng, 50), spec, mix_seed(9001, rep)).p_value < 0.05;
  }
  const double rate = static_cast<double>(reject) / reps;
  CAPTURE(rate);
  CHECK(rate >= 0.03);
  CHECK(rate <= 0.08);
}

TEST_CASE("empirical bootstrap level on t6 separable data") {
  ScenarioConfig sc;
  sc.d1 = 8;
  sc.d2 = 4;
  sc.family = Family::T6;
  const ScenarioSampler sampler(sc);
  TestSpec spec{Statistic::GTilde, Method::EmpBoot, ProjectionSet::rectangular(1, 1), 200};
  int reject = 0;
  const int reps = 500;
  for (int rep = 0; rep < reps; ++rep) {
    RngStream rng(9002, static_cast<std::uint64_t>(rep));
    reject += run_test(sampler.draw_sample(rng, 50), spec, mix_seed(9002, rep)).p_value < 0.05;
  }
  const double rate = static_cast<double>(reject) / reps;
  CAPTURE(rate);
  CHECK(rate <= 0.07);
}
