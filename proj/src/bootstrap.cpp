#include "sepcov/bootstrap.hpp"

#include <string>

#include "sepcov/error.hpp"
#include "sepcov/parallel.hpp"

namespace sepcov {
namespace {

struct ReplicateOutcome {
  bool exceeds = false;
  bool failed = false;
  ErrorKind failure = ErrorKind::InvalidArgument;
};

void check_config(const BootstrapConfig& cfg) {
  if (cfg.B < 1) fail(ErrorKind::InvalidArgument, "bootstrap needs B >= 1");
}

// Deterministic reduction over per-replicate outcomes.
void summarize(const std::vector<ReplicateOutcome>& outcomes, TestReport& report) {
  int exceed = 0;
  int failed = 0;
  for (const auto& o : outcomes) {
    exceed += o.exceeds ? 1 : 0;
    failed += o.failed ? 1 : 0;
  }
  const double b = static_cast<double>(outcomes.size());
  report.p_value = exceed / b;
  report.p_plus = (1.0 + exceed) / (1.0 + b);
  report.replicates = static_cast<int>(outcomes.size());
  if (failed > 0) {
    std::string kinds;
    for (const auto& o : outcomes) {
      if (!o.failed) continue;
      const std::string k(to_string(o.failure));
      if (kinds.find(k) == std::string::npos) kinds += (kinds.empty() ? "" : ",") + k;
    }
    report.warnings.push_back(std::to_string(failed) + " of " + std::to_string(outcomes.size()) +
                              " bootstrap replicates failed (" + kinds +
                              ") and were counted as exceedances");
  }
}

template <class Fn>
ReplicateOutcome run_replicate(double observed, Fn&& statistic) {
  ReplicateOutcome out;
  try {
    out.exceeds = statistic() > observed;
  } catch (const Error& e) {
    if (!is_statistical(e.kind())) throw;
    out.exceeds = true;
    out.failed = true;
    out.failure = e.kind();
  }
  return out;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32)};
  engine_.seed(seq);
}

double RngStream::normal() { return normal_(engine_); }

double RngStream::chi_squared(double df) {
  return std::chi_squared_distribution<double>(df)(engine_);
}

Eigen::Index RngStream::uniform_index(Eigen::Index n) {
  return std::uniform_int_distribution<Eigen::Index>(0, n - 1)(engine_);
}

SeparableGaussianSampler::SeparableGaussianSampler(RowMatrix mean, const SymMatrix& c1,
                                                   const SymMatrix& c2)
    : mean_(std::move(mean)), row_root_(psd_sqrt(c1).mat()), col_root_(psd_sqrt(c2).mat()) {
  if (mean_.rows() != c1.dim() || mean_.cols() != c2.dim()) {
    fail(ErrorKind::ShapeMismatch, "SeparableGaussianSampler: mean does not match c1, c2");
  }
}

void SeparableGaussianSampler::draw(RngStream& rng, Eigen::Map<RowMatrix> out) const {
  RowMatrix g(mean_.rows(), mean_.cols());
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = rng.normal();
  out = mean_ + row_root_ * g * col_root_.transpose();
}

RowMatrix SeparableGaussianSampler::draw(RngStream& rng) const {
  RowMatrix x(mean_.rows(), mean_.cols());
  draw(rng, Eigen::Map<RowMatrix>(x.data(), x.rows(), x.cols()));
  return x;
}

SampleSet SeparableGaussianSampler::draw_sample(RngStream& rng, Eigen::Index n) const {
  SampleSet s(n, mean_.rows(), mean_.cols());
  for (Eigen::Index m = 0; m < n; ++m) draw(rng, s[m]);
  return s;
}

RowMatrix sample_separable_gaussian(const RowMatrix& mean, const SymMatrix& c1,
                                    const SymMatrix& c2, RngStream& rng) {
  return SeparableGaussianSampler(mean, c1, c2).draw(rng);
}

std::vector<Eigen::Index> resample_indices(Eigen::Index n, RngStream& rng) {
  if (n < 1) fail(ErrorKind::EmptySample, "resample: empty sample");
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (auto& i : idx) i = rng.uniform_index(n);
  return idx;
}

SampleSet resample(const SampleSet& s, RngStream& rng) {
  if (s.n() < 2) fail(ErrorKind::EmptySample, "resample: need at least 2 replicates");
  const auto idx = resample_indices(s.n(), rng);
  return s.select(idx);
}

TestReport parametric_bootstrap_test(const SampleSet& s, const BootstrapConfig& cfg) {
  check_config(cfg);
  const SeparableFit fit = fit_separable(s);
  TestReport report;
  report.statistic = cfg.statistic;
  report.method = Method::ParamBoot;
  report.proj = cfg.proj;
  report.seed = cfg.seed;
  if (cfg.statistic != Statistic::HS) report.warnings = eigen_tie_warnings(fit, cfg.proj);
  report.statistic_value = evaluate_statistic(fit, s, cfg.statistic, cfg.proj);

  const SeparableGaussianSampler sampler(fit.centered.mean, fit.marginals.c1, fit.marginals.c2);
  std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(cfg.B));
  parallel_for(outcomes.size(), resolve_threads(cfg.threads), [&](std::size_t b) {
    RngStream rng(cfg.seed, b);
    const SampleSet boot = sampler.draw_sample(rng, s.n());
    outcomes[b] = run_replicate(report.statistic_value, [&] {
      return evaluate_statistic(boot, cfg.statistic, cfg.proj);
    });
  });
  summarize(outcomes, report);
  return report;
}

double empirical_delta(const SampleSet& boot, const SampleSet& orig, const TMatrix& orig_t,
                       Statistic stat, const ProjectionSet& proj) {
  if (stat == Statistic::HS) return hs_norm_dn_diff_streaming(boot, orig);

  const SeparableFit fit = fit_separable(boot);
  const TMatrix t = t_stat(fit, proj);
  switch (stat) {
    case Statistic::G: {
      double acc = 0.0;
      for (std::size_t i = 0; i < t.values.size(); ++i) {
        const double d = t.values[i] - orig_t.values[i];
        acc += d * d;
      }
      return acc;
    }
    case Statistic::GTildeA: {
      const std::vector<double> sig = sigma_hat_sq_all(fit, proj);
      double acc = 0.0;
      for (std::size_t i = 0; i < t.values.size(); ++i) {
        const double d = t.values[i] - orig_t.values[i];
        acc += d * d / sig[i];
      }
      return acc;
    }
    case Statistic::GTilde: {
      const auto [sl, sr] = sigma_lr(fit.marginals, fit.eig1, fit.eig2, proj.p(), proj.q());
      return g_tilde(Matrix(t.as_matrix() - orig_t.as_matrix()), sl, sr);
    }
    case Statistic::HS:
      break;
  }
  return 0.0;
}

TestReport empirical_bootstrap_test(const SampleSet& s, const BootstrapConfig& cfg) {
  check_config(cfg);
  if (s.n() < 2) fail(ErrorKind::EmptySample, "bootstrap needs at least 2 replicates");
  TestReport report;
  report.statistic = cfg.statistic;
  report.method = Method::EmpBoot;
  report.proj = cfg.proj;
  report.seed = cfg.seed;

  TMatrix orig_t;
  if (cfg.statistic == Statistic::HS) {
    report.statistic_value = hs_norm_dn_streaming(s);
  } else {
    const SeparableFit fit = fit_separable(s);
    report.warnings = eigen_tie_warnings(fit, cfg.proj);
    report.statistic_value = evaluate_statistic(fit, s, cfg.statistic, cfg.proj);
    orig_t = t_stat(fit, cfg.proj);
  }

  std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(cfg.B));
  parallel_for(outcomes.size(), resolve_threads(cfg.threads), [&](std::size_t b) {
    RngStream rng(cfg.seed, b);
    const SampleSet boot = resample(s, rng);
    outcomes[b] = run_replicate(report.statistic_value, [&] {
      return empirical_delta(boot, s, orig_t, cfg.statistic, cfg.proj);
    });
  });
  summarize(outcomes, report);
  return report;
}

}  // namespace sepcov
