#include <doctest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <random>

#include "sepcov/bootstrap.hpp"
#include "support/check.hpp"
#include "support/oracles.hpp"

using namespace sepcov;

namespace {

const std::vector<double> kTiny{1.5,    -0.25,  0.75,  2.0,    -1.0,  0.5,   0.25,   1.25,  -0.5,
                                0.0,    2.5,    -1.75, -2.0,   0.625, 1.125, -0.375, 0.0,   1.5,
                                0.875,  -1.5,   -0.125, 0.25,  1.75,  2.25,  -0.625, 0.375, 2.25,
                                -0.875, -1.25,  -0.5,  0.5,    1.0,   -1.375, 1.875, 0.125, -2.25};

// Population marginals normalized as the estimator normalizes them.
MarginalPair population_pair(const Matrix& a, const Matrix& b) {
  const double tr = a.trace() * b.trace();
  MarginalPair mp;
  mp.c1 = SymMatrix(Matrix(a * b.trace() / std::sqrt(tr)));
  mp.c2 = SymMatrix(Matrix(b * a.trace() / std::sqrt(tr)));
  mp.trace_c1 = mp.c1.trace();
  mp.trace_c2 = mp.c2.trace();
  mp.hs_sq_c1 = mp.c1.hs_sq();
  mp.hs_sq_c2 = mp.c2.hs_sq();
  mp.total_trace = tr;
  return mp;
}

Matrix smooth_kernel(int d, double len) {
  Matrix k(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) k(i, j) = std::exp(-(i - j) * (i - j) / (len * len)) + (i == j ? 0.1 : 0.0);
  return k;
}

}  // namespace

TEST_CASE("chi2_sf against frozen scipy values") {
  CHECK(std::abs(chi2_sf(3.841459, 1) - 0.05) < 1e-5);
  const struct {
    double x;
    int df;
    double sf;
  } cases[] = {{3.841459, 1, 0.04999999465319563}, {0.5, 1, 0.47950012218695337},
               {10.0, 4, 0.04042768199451279},     {100.0, 40, 4.791357300338064e-07},
               {1e-8, 3, 0.999999999999734},       {60.0, 3, 5.878230727906921e-13},
               {250.0, 280, 0.9010626141048503}};
  for (const auto& c : cases) {
    CAPTURE(c.x);
    CAPTURE(c.df);
    CHECK(std::abs(chi2_sf(c.x, c.df) - c.sf) < 1e-12);
  }
  CHECK(chi2_sf(0.0, 2) == 1.0);
  CHECK(chi2_sf(std::numeric_limits<double>::infinity(), 2) == 0.0);
  CHECK_ERROR_KIND(chi2_sf(-1.0, 1), ErrorKind::InvalidArgument);
  CHECK_ERROR_KIND(chi2_sf(1.0, 0), ErrorKind::InvalidArgument);
}

TEST_CASE("incomplete gamma against boost") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> ua(0.5, 60.0), ux(0.0, 3.0);
  for (int rep = 0; rep < 500; ++rep) {
    const double a = std::floor(ua(rng) * 2) / 2;
    const double x = a * ux(rng) + 1e-3;
    const double q = boost::math::gamma_q(a, x);
    const double p = boost::math::gamma_p(a, x);
    CHECK(std::abs(gamma_q(a, x) - q) < 1e-12);
    CHECK(std::abs(gamma_p(a, x) - p) < 1e-12);
    CHECK(std::abs(gamma_p(a, x) + gamma_q(a, x) - 1.0) < 1e-14);
  }
}

TEST_CASE("method names") {
  for (auto m : {Method::Asymptotic, Method::ParamBoot, Method::EmpBoot}) {
    CHECK(parse_method(to_string(m)) == m);
  }
  CHECK(parse_method("emp_boot") == Method::EmpBoot);
  CHECK_ERROR_KIND(parse_method("jackknife"), ErrorKind::Parse);
}

TEST_CASE("asymptotic tests on the tiny fixture") {
  // numpy/scipy (tests/oracles/frozen_values.py)
  const SampleSet s(6, 3, 2, kTiny);
  const TestReport single = asymptotic_test(s, ProjectionSet::rectangular(1, 1), AsymptoticVariant::Single);
  CHECK(single.statistic == Statistic::G);
  CHECK(single.df == 1);
  CHECK(single.statistic_value == doctest::Approx(0.5073103942804571).epsilon(1e-11));
  CHECK(std::abs(single.p_value - 0.47630548949582563) < 1e-11);
  CHECK_FALSE(single.p_plus.has_value());

  const TestReport full =
      asymptotic_test(s, ProjectionSet::rectangular(2, 1), AsymptoticVariant::StudentizedFull);
  CHECK(full.statistic == Statistic::GTilde);
  CHECK(full.df == 2);
  CHECK(std::abs(full.p_value - 0.735689576453674) < 1e-11);

  CHECK_ERROR_KIND(asymptotic_test(s, ProjectionSet::rectangular(2, 1), AsymptoticVariant::Single),
                   ErrorKind::InvalidArgument);
  CHECK_ERROR_KIND(
      asymptotic_test(s, ProjectionSet::parse("(1,1);(2,1);(1,2)"), AsymptoticVariant::StudentizedFull),
      ErrorKind::NonRectangularSet);
}

TEST_CASE("bonferroni") {
  CHECK(bonferroni({0.2, 0.01, 0.5}) == doctest::Approx(0.03));
  CHECK(bonferroni({0.6, 0.9}) == 1.0);
  CHECK_ERROR_KIND(bonferroni({}), ErrorKind::InvalidArgument);
}

TEST_CASE("Gaussian asymptotic covariance matches Monte Carlo") {
  const Matrix a = smooth_kernel(4, 1.5), b = smooth_kernel(3, 1.0);
  const SeparableGaussianSampler sampler(RowMatrix::Zero(4, 3), SymMatrix(a), SymMatrix(b));
  const MarginalPair mp = population_pair(a, b);
  const EigenSystem e1 = sym_eigen(mp.c1), e2 = sym_eigen(mp.c2);
  const ProjectionSet proj = ProjectionSet::rectangular(2, 1);
  const Matrix sigma = gaussian_asymptotic_sigma(mp, e1, e2, proj).mat();

  const int reps = 3000, n = 400;
  std::vector<Vector> ts;
  for (int rep = 0; rep < reps; ++rep) {
    RngStream rng(77, static_cast<std::uint64_t>(rep));
    const TMatrix t = t_stat(sampler.draw_sample(rng, n), proj);
    ts.push_back(Eigen::Map<const Vector>(t.values.data(), 2));
  }
  Vector mean = Vector::Zero(2);
  for (const auto& t : ts) mean += t / reps;
  Matrix cov = Matrix::Zero(2, 2);
  for (const auto& t : ts) cov += (t - mean) * (t - mean).transpose() / reps;
  CAPTURE(cov);
  CAPTURE(sigma);
  CHECK(cov(0, 0) == doctest::Approx(sigma(0, 0)).epsilon(0.12));
  CHECK(cov(1, 1) == doctest::Approx(sigma(1, 1)).epsilon(0.12));
  CHECK(std::abs(cov(0, 1) - sigma(0, 1)) < 0.12 * std::sqrt(sigma(0, 0) * sigma(1, 1)));
}

TEST_CASE("general covariance oracle agrees with the Gaussian form on Gaussian data") {
  const Matrix a = smooth_kernel(4, 1.5), b = smooth_kernel(3, 1.0);
  const SeparableGaussianSampler sampler(RowMatrix::Zero(4, 3), SymMatrix(a), SymMatrix(b));
  RngStream rng(5, 0);
  const SampleSet s = sampler.draw_sample(rng, 5000);
  const ProjectionSet proj = ProjectionSet::rectangular(2, 2);
  const Matrix general = empirical_general_sigma(s, proj).mat();
  const SeparableFit f = fit_separable(s);
  const Matrix gauss = gaussian_asymptotic_sigma(f.marginals, f.eig1, f.eig2, proj).mat();
  CAPTURE(general);
  CAPTURE(gauss);
  CHECK((general - gauss).norm() < 0.15 * gauss.norm());
  for (int k = 0; k < 4; ++k) CHECK(general(k, k) == doctest::Approx(gauss(k, k)).epsilon(0.15));
}

TEST_CASE("general covariance oracle guards") {
  std::mt19937_64 rng(32);
  const SampleSet big = oracle::random_sample(rng, 10, 17, 16);
  CHECK_ERROR_KIND(empirical_general_sigma(big, ProjectionSet::rectangular(1, 1)),
                   ErrorKind::DimensionTooLarge);
  const SampleSet s = oracle::random_sample(rng, 10, 4, 3);
  CHECK_ERROR_KIND(empirical_general_sigma(s, ProjectionSet::rectangular(1, 5)),
                   ErrorKind::DimensionTooLarge);
  CHECK_ERROR_KIND(empirical_general_sigma(s, ProjectionSet::rectangular(1, 4)),
                   ErrorKind::InvalidArgument);
}

TEST_CASE("asymptotic single-pair test holds its level") {
  const Matrix a = smooth_kernel(8, 2.0), b = smooth_kernel(4, 1.0);
  const SeparableGaussianSampler sampler(RowMatrix::Zero(8, 4), SymMatrix(a), SymMatrix(b));
  int reject = 0;
  const int reps = 1000;
  for (int rep = 0; rep < reps; ++rep) {
    RngStream rng(4242, static_cast<std::uint64_t>(rep));
    const TestReport r = asymptotic_test(sampler.draw_sample(rng, 500), ProjectionSet::rectangular(1, 1),
                                         AsymptoticVariant::Single);
    reject += r.p_value < 0.05;
  }
  const double rate = static_cast<double>(reject) / reps;
  CAPTURE(rate);
  CHECK(rate >= 0.035);
  CHECK(rate <= 0.075);
}
