#include "sepcov/asymptotic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sepcov/error.hpp"

namespace sepcov {
namespace {

constexpr double kGammaEps = 1e-16;
constexpr int kGammaMaxIter = 100000;

// P(a,x) by its power series; converges for all x but is used for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int n = 0; n < kGammaMaxIter; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kGammaEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a,x) by its continued fraction (modified Lentz); used for x >= a + 1.
double gamma_q_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kGammaEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kGammaMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kGammaEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::Asymptotic: return "asymptotic";
    case Method::ParamBoot: return "param-boot";
    case Method::EmpBoot: return "emp-boot";
  }
  return "asymptotic";
}

Method parse_method(std::string_view text) {
  std::string norm(text);
  std::replace(norm.begin(), norm.end(), '_', '-');
  if (norm == "asymptotic") return Method::Asymptotic;
  if (norm == "param-boot") return Method::ParamBoot;
  if (norm == "emp-boot") return Method::EmpBoot;
  fail(ErrorKind::Parse, "unknown method '" + std::string(text) + "'");
}

double gamma_p(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) fail(ErrorKind::InvalidArgument, "gamma_p: need a > 0, x >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_fraction(a, x);
}

double gamma_q(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) fail(ErrorKind::InvalidArgument, "gamma_q: need a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_fraction(a, x);
}

double chi2_sf(double x, int df) {
  if (df < 1) fail(ErrorKind::InvalidArgument, "chi2_sf: df must be >= 1");
  if (!(x >= 0.0)) fail(ErrorKind::InvalidArgument, "chi2_sf: x must be >= 0");
  if (std::isinf(x)) return 0.0;
  return std::clamp(gamma_q(0.5 * df, 0.5 * x), 0.0, 1.0);
}

TestReport asymptotic_test(const SampleSet& s, const ProjectionSet& proj,
                           AsymptoticVariant variant) {
  const SeparableFit fit = fit_separable(s);
  TestReport report;
  report.method = Method::Asymptotic;
  report.proj = proj;
  report.warnings = eigen_tie_warnings(fit, proj);

  if (variant == AsymptoticVariant::Single) {
    if (proj.size() != 1) {
      fail(ErrorKind::InvalidArgument, "single-direction asymptotic test needs exactly one pair");
    }
    const IndexPair ij = proj.pairs().front();
    const TMatrix t = t_stat(fit, proj);
    const double sigma2 = sigma_hat_sq(fit.marginals, fit.eig1, fit.eig2, ij.r, ij.s);
    report.statistic = Statistic::G;
    report.statistic_value = t.values.front() * t.values.front() / sigma2;
    report.df = 1;
  } else {
    if (!proj.is_rectangular()) {
      fail(ErrorKind::NonRectangularSet, "studentized asymptotic test needs {1..p}x{1..q}");
    }
    report.statistic = Statistic::GTilde;
    report.statistic_value = evaluate_statistic(fit, s, Statistic::GTilde, proj);
    report.df = proj.p() * proj.q();
  }
  report.p_value = chi2_sf(report.statistic_value, *report.df);
  return report;
}

SymMatrix gaussian_asymptotic_sigma(const MarginalPair& mp, const EigenSystem& eig1,
                                    const EigenSystem& eig2, const ProjectionSet& proj) {
  const auto& pairs = proj.pairs();
  const auto k = static_cast<Eigen::Index>(pairs.size());
  const double tr1 = mp.trace_c1;
  const double tr2 = mp.trace_c2;
  const double trc = tr1 * tr2;
  Matrix sigma(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) {
      const double l1 = eig1.values(pairs[a].r - 1), l2 = eig1.values(pairs[b].r - 1);
      const double g1 = eig2.values(pairs[a].s - 1), g2 = eig2.values(pairs[b].s - 1);
      const double row = (pairs[a].r == pairs[b].r ? tr1 * tr1 : 0.0) + mp.hs_sq_c1 - (l1 + l2) * tr1;
      const double col = (pairs[a].s == pairs[b].s ? tr2 * tr2 : 0.0) + mp.hs_sq_c2 - (g1 + g2) * tr2;
      sigma(a, b) = 2.0 * l1 * l2 * g1 * g2 / (trc * trc) * row * col;
    }
  }
  return SymMatrix(Matrix(0.5 * (sigma + sigma.transpose())));
}

SymMatrix empirical_general_sigma(const SampleSet& s, const ProjectionSet& proj) {
  if (s.d1() * s.d2() > 256 || proj.size() > 4) {
    fail(ErrorKind::DimensionTooLarge,
         "empirical_general_sigma is an oracle for d1*d2 <= 256 and at most 4 pairs");
  }
  const SeparableFit fit = fit_separable(s);
  if (proj.max_r() > s.d1() || proj.max_s() > s.d2()) {
    fail(ErrorKind::InvalidArgument, "projection set exceeds the grid");
  }
  const Eigen::Index n = s.n();
  const Matrix& u = fit.eig1.vectors;
  const Matrix& v = fit.eig2.vectors;
  const Vector& lambda = fit.eig1.values;
  const Vector& gamma = fit.eig2.values;
  const double tr_c = fit.marginals.total_trace;
  const double tr1 = fit.marginals.trace_c1;
  const double tr2 = fit.marginals.trace_c2;

  // Squared projection scores q_m(i,j) = <X_m - Xbar, u_i (x) v_j>^2 together
  // with their row sums, column sums and totals (the dotted index sums).
  std::vector<Matrix> q(static_cast<std::size_t>(n));
  std::vector<Vector> rsum(q.size()), csum(q.size());
  std::vector<double> total(q.size());
  for (Eigen::Index m = 0; m < n; ++m) {
    const Matrix a = s[m] - fit.centered.mean;
    const Matrix scores = u.transpose() * a * v;
    q[m] = scores.array().square().matrix();
    rsum[m] = q[m].rowwise().sum();
    csum[m] = q[m].colwise().sum().transpose();
    total[m] = q[m].sum();
  }
  auto mean_of = [n](auto&& f) {
    double acc = 0.0;
    for (Eigen::Index m = 0; m < n; ++m) acc += f(m);
    return acc / static_cast<double>(n);
  };

  const auto& pairs = proj.pairs();
  const auto k = static_cast<Eigen::Index>(pairs.size());
  Matrix sigma(k, k);
  for (Eigen::Index x = 0; x < k; ++x) {
    for (Eigen::Index y = 0; y < k; ++y) {
      const int r = pairs[x].r - 1, sc = pairs[x].s - 1;
      const int r2 = pairs[y].r - 1, s2 = pairs[y].s - 1;
      const double a_rs = lambda(r) * gamma(sc);
      const double a_r2s2 = lambda(r2) * gamma(s2);
      const double a_r2s = lambda(r2) * gamma(sc);
      const double a_rs2 = lambda(r) * gamma(s2);

      const double b_rsr2s2 = mean_of([&](auto m) { return q[m](r, sc) * q[m](r2, s2); });
      const double b_r2s2__ = mean_of([&](auto m) { return q[m](r2, s2) * total[m]; });
      const double b_rs__ = mean_of([&](auto m) { return q[m](r, sc) * total[m]; });
      const double b_r__s2 = mean_of([&](auto m) { return rsum[m](r) * csum[m](s2); });
      const double b_r2__s = mean_of([&](auto m) { return rsum[m](r2) * csum[m](sc); });
      const double b____ = mean_of([&](auto m) { return total[m] * total[m]; });
      const double b_s_s2 = mean_of([&](auto m) { return csum[m](sc) * csum[m](s2); });
      const double b_r_r2 = mean_of([&](auto m) { return rsum[m](r) * rsum[m](r2); });
      const double b_r2s2_s = mean_of([&](auto m) { return q[m](r2, s2) * csum[m](sc); });
      const double b_rs_s2 = mean_of([&](auto m) { return q[m](r, sc) * csum[m](s2); });
      const double b_r2s2r_ = mean_of([&](auto m) { return q[m](r2, s2) * rsum[m](r); });
      const double b_rsr2_ = mean_of([&](auto m) { return q[m](r, sc) * rsum[m](r2); });
      const double b_r2___ = mean_of([&](auto m) { return rsum[m](r2) * total[m]; });
      const double b__s2__ = mean_of([&](auto m) { return csum[m](s2) * total[m]; });
      const double b_r___ = mean_of([&](auto m) { return rsum[m](r) * total[m]; });
      const double b__s__ = mean_of([&](auto m) { return csum[m](sc) * total[m]; });

      double val = b_rsr2s2;
      val += (a_rs * b_r2s2__ + a_r2s * b_r__s2 + a_rs2 * b_r2__s + a_r2s2 * b_rs__) / tr_c;
      val += a_rs * a_r2s2 * b____ / (tr_c * tr_c);
      val += lambda(r) * lambda(r2) * b_s_s2 / (tr1 * tr1);
      val += gamma(sc) * gamma(s2) * b_r_r2 / (tr2 * tr2);
      val -= (lambda(r) * b_r2s2_s + lambda(r2) * b_rs_s2) / tr1;
      val -= (gamma(sc) * b_r2s2r_ + gamma(s2) * b_rsr2_) / tr2;
      val -= a_rs / tr_c * (gamma(s2) * b_r2___ / tr2 + lambda(r2) * b__s2__ / tr1);
      val -= a_r2s2 / tr_c * (gamma(sc) * b_r___ / tr2 + lambda(r) * b__s__ / tr1);
      sigma(x, y) = val;
    }
  }
  return SymMatrix(Matrix(0.5 * (sigma + sigma.transpose())));
}

double bonferroni(const std::vector<double>& p_values) {
  if (p_values.empty()) fail(ErrorKind::InvalidArgument, "bonferroni: no p-values");
  const double pmin = *std::min_element(p_values.begin(), p_values.end());
  return std::min(1.0, static_cast<double>(p_values.size()) * pmin);
}

}  // namespace sepcov
