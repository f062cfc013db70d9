#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sepcov/teststats.hpp"

namespace sepcov {

enum class Method { Asymptotic, ParamBoot, EmpBoot };

std::string_view to_string(Method method) noexcept;
/// Accepts "asymptotic", "param-boot", "emp-boot" (underscores also accepted).
Method parse_method(std::string_view text);

struct TestReport {
  Statistic statistic = Statistic::G;
  double statistic_value = 0.0;
  double p_value = 1.0;
  /// (1 + exceedances) / (1 + B); bootstrap methods only.
  std::optional<double> p_plus;
  Method method = Method::Asymptotic;
  /// Degrees of freedom of the chi-square reference (asymptotic method).
  std::optional<int> df;
  /// Bootstrap replicate count.
  std::optional<int> replicates;
  ProjectionSet proj;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

/// Upper tail of the chi-square distribution, 1 - F(x; df), through the
/// regularized incomplete gamma function. Throws InvalidArgument for x < 0 or
/// df < 1.
double chi2_sf(double x, int df);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

enum class AsymptoticVariant {
  /// T^2(r,s) / sigma^2(r,s) against chi-square(1); singleton set only.
  Single,
  /// G-tilde against chi-square(p*q); rectangular set only.
  StudentizedFull,
};

TestReport asymptotic_test(const SampleSet& s, const ProjectionSet& proj,
                           AsymptoticVariant variant);

/// Gaussian-case asymptotic covariance of (T_N(r,s)) over proj, from the
/// estimated marginals. Separable by construction.
SymMatrix gaussian_asymptotic_sigma(const MarginalPair& mp, const EigenSystem& eig1,
                                    const EigenSystem& eig2, const ProjectionSet& proj);

/// Plug-in estimate of the general (non-Gaussian) asymptotic covariance of
/// (T_N(r,s)) over proj, with fourth moments replaced by sample
/// averages of projection scores over every eigendirection of the grid.
/// Validation only: d1*d2 <= 256 and |proj| <= 4, else DimensionTooLarge.
SymMatrix empirical_general_sigma(const SampleSet& s, const ProjectionSet& proj);

/// min(1, m * min p) over m p-values.
double bonferroni(const std::vector<double>& p_values);

}  // namespace sepcov
