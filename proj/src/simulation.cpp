#include "sepcov/simulation.hpp"

#include <bit>
#include <cmath>
#include <optional>

#include "sepcov/error.hpp"
#include "sepcov/parallel.hpp"

namespace sepcov {
namespace {

constexpr double kTDegrees = 6.0;

}  // namespace

std::string_view to_string(Family family) noexcept {
  return family == Family::Gaussian ? "gaussian" : "t6";
}

Family parse_family(std::string_view text) {
  if (text == "gaussian") return Family::Gaussian;
  if (text == "t6") return Family::T6;
  fail(ErrorKind::Parse, "unknown scenario '" + std::string(text) + "' (gaussian|t6)");
}

FullCov4 build_c_gamma(Eigen::Index d1, Eigen::Index d2, double gamma, const SymMatrix& c1,
                       const SymMatrix& c2) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) fail(ErrorKind::InvalidArgument, "gamma must lie in [0,1]");
  if (c1.dim() != d1 || c2.dim() != d2) {
    fail(ErrorKind::ShapeMismatch, "build_c_gamma: marginals do not match (d1, d2)");
  }
  FullCov4 c(d1, d2);
  for (Eigen::Index i1 = 0; i1 < d1; ++i1) {
    for (Eigen::Index j1 = 0; j1 < d2; ++j1) {
      for (Eigen::Index i2 = 0; i2 < d1; ++i2) {
        for (Eigen::Index j2 = 0; j2 < d2; ++j2) {
          const double dj = static_cast<double>(j1 - j2);
          const double di = static_cast<double>(i1 - i2);
          const double scale = dj * dj + 1.0;
          const double nonsep = std::exp(-di * di / scale) / scale;
          c(i1, j1, i2, j2) = (1.0 - gamma) * c1(i1, i2) * c2(j1, j2) + gamma * nonsep;
        }
      }
    }
  }
  return c;
}

std::pair<SymMatrix, SymMatrix> default_marginals(Eigen::Index d1, Eigen::Index d2) {
  auto kernel = [](Eigen::Index d) {
    const double len = static_cast<double>(d) / 3.0;
    Matrix k(d, d);
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index b = 0; b < d; ++b) {
        const double t = static_cast<double>(a - b) / len;
        k(a, b) = std::exp(-t * t);
      }
    return SymMatrix(k);
  };
  return {kernel(d1), kernel(d2)};
}

ScenarioSampler::ScenarioSampler(const ScenarioConfig& cfg)
    : ScenarioSampler(cfg, default_marginals(cfg.d1, cfg.d2).first,
                      default_marginals(cfg.d1, cfg.d2).second) {}

ScenarioSampler::ScenarioSampler(const ScenarioConfig& cfg, const SymMatrix& c1,
                                 const SymMatrix& c2)
    : cfg_(cfg) {
  const FullCov4 c = build_c_gamma(cfg.d1, cfg.d2, cfg.gamma, c1, c2);
  Matrix target = c.mat();
  if (cfg.family == Family::T6) {
    // Unit-diagonal scale matrix: the correlation implied by C_gamma.
    const Vector inv_sd = target.diagonal().array().rsqrt();
    target = inv_sd.asDiagonal() * target * inv_sd.asDiagonal();
  }
  const EigenSystem es = sym_eigen(SymMatrix(Matrix(0.5 * (target + target.transpose()))));
  factor_ = es.vectors * es.values.array().sqrt().matrix().asDiagonal();
}

void ScenarioSampler::draw(RngStream& rng, Eigen::Map<RowMatrix> out) const {
  const Eigen::Index dim = factor_.cols();
  Vector z(dim);
  for (Eigen::Index i = 0; i < dim; ++i) z(i) = rng.normal();
  Vector x = factor_ * z;
  if (cfg_.family == Family::T6) x /= std::sqrt(rng.chi_squared(kTDegrees) / kTDegrees);
  // Row-major vec index i*d2 + j matches the output layout.
  Eigen::Map<Vector>(out.data(), dim) = x;
}

SampleSet ScenarioSampler::draw_sample(RngStream& rng, Eigen::Index n) const {
  SampleSet s(n, cfg_.d1, cfg_.d2);
  for (Eigen::Index m = 0; m < n; ++m) draw(rng, s[m]);
  return s;
}

Matrix ScenarioSampler::covariance() const {
  Matrix c = factor_ * factor_.transpose();
  if (cfg_.family == Family::T6) c *= kTDegrees / (kTDegrees - 2.0);
  return c;
}

SampleSet sample_scenario(const ScenarioConfig& cfg, RngStream& rng) {
  if (cfg.n < 2) fail(ErrorKind::InvalidArgument, "scenario needs N >= 2");
  return ScenarioSampler(cfg).draw_sample(rng, cfg.n);
}

SampleSet sample_scenario(const ScenarioConfig& cfg) {
  RngStream rng(cfg.seed, 0);
  return sample_scenario(cfg, rng);
}

TestReport run_test(const SampleSet& s, const TestSpec& spec, std::uint64_t seed,
                    unsigned threads) {
  switch (spec.method) {
    case Method::Asymptotic: {
      TestReport r;
      if (spec.statistic == Statistic::G && spec.proj.size() == 1) {
        r = asymptotic_test(s, spec.proj, AsymptoticVariant::Single);
      } else if (spec.statistic == Statistic::GTilde && spec.proj.is_rectangular()) {
        r = asymptotic_test(s, spec.proj, AsymptoticVariant::StudentizedFull);
      } else {
        fail(ErrorKind::InvalidArgument,
             "asymptotic method supports g with a single pair or g-tilde with pxq");
      }
      r.seed = seed;
      return r;
    }
    case Method::ParamBoot:
      return parametric_bootstrap_test(s, {spec.B, spec.statistic, spec.proj, seed, threads});
    case Method::EmpBoot:
      return empirical_bootstrap_test(s, {spec.B, spec.statistic, spec.proj, seed, threads});
  }
  fail(ErrorKind::InvalidArgument, "unknown method");
}

std::uint64_t cell_seed(const PowerStudy& study, double gamma, Eigen::Index n) {
  std::uint64_t h = mix_seed(study.seed, static_cast<std::uint64_t>(study.family));
  h = mix_seed(h, static_cast<std::uint64_t>(study.d1) << 32 | static_cast<std::uint64_t>(study.d2));
  h = mix_seed(h, std::bit_cast<std::uint64_t>(gamma));
  return mix_seed(h, static_cast<std::uint64_t>(n));
}

std::vector<PowerRow> power_curve(
    const PowerStudy& study, const std::function<bool(double, Eigen::Index)>& skip_cell,
    const std::function<void(const std::vector<PowerRow>&)>& on_cell) {
  if (study.replications < 1) fail(ErrorKind::InvalidArgument, "power study needs replications >= 1");
  if (study.tests.empty()) fail(ErrorKind::InvalidArgument, "power study needs at least one test");
  const unsigned threads = resolve_threads(study.threads);
  std::vector<PowerRow> rows;
  for (double gamma : study.gammas) {
    const ScenarioConfig base{study.d1, study.d2, gamma, study.family, 2, study.seed};
    std::optional<ScenarioSampler> sampler;
    for (Eigen::Index n : study.ns) {
      if (n < 2) fail(ErrorKind::InvalidArgument, "power study needs N >= 2");
      if (skip_cell && skip_cell(gamma, n)) continue;
      if (!sampler) sampler.emplace(base);
      const std::uint64_t cseed = cell_seed(study, gamma, n);
      const std::size_t reps = static_cast<std::size_t>(study.replications);
      const std::size_t ntests = study.tests.size();
      // 0 = accept, 1 = reject, 2 = test failed on this sample.
      std::vector<unsigned char> outcome(reps * ntests, 0);
      parallel_for(reps, threads, [&](std::size_t rep) {
        RngStream data_rng(cseed, rep);
        const SampleSet s = sampler->draw_sample(data_rng, n);
        const std::uint64_t rep_seed = mix_seed(cseed, rep);
        for (std::size_t t = 0; t < ntests; ++t) {
          unsigned char o = 0;
          try {
            const TestReport r = run_test(s, study.tests[t], mix_seed(rep_seed, t), 1);
            o = r.p_value < study.alpha ? 1 : 0;
          } catch (const Error& e) {
            if (!is_statistical(e.kind())) throw;
            o = 2;
          }
          outcome[rep * ntests + t] = o;
        }
      });

      std::vector<PowerRow> cell;
      for (std::size_t t = 0; t < ntests; ++t) {
        const TestSpec& spec = study.tests[t];
        int rejections = 0, failures = 0;
        for (std::size_t rep = 0; rep < reps; ++rep) {
          rejections += outcome[rep * ntests + t] == 1;
          failures += outcome[rep * ntests + t] == 2;
        }
        PowerRow row;
        row.scenario = std::string(to_string(study.family));
        row.gamma = gamma;
        row.n = n;
        row.statistic = std::string(to_string(spec.statistic));
        row.method = std::string(to_string(spec.method));
        row.proj = spec.proj.to_string();
        row.B = spec.method == Method::Asymptotic ? 0 : spec.B;
        row.reps = study.replications;
        row.power = static_cast<double>(rejections) / static_cast<double>(reps);
        row.se = std::sqrt(row.power * (1.0 - row.power) / static_cast<double>(reps));
        row.seed = study.seed;
        row.failures = failures;
        cell.push_back(row);
      }
      if (on_cell) on_cell(cell);
      rows.insert(rows.end(), cell.begin(), cell.end());
    }
  }
  return rows;
}

}  // namespace sepcov
