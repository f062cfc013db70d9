#include "sepcov/teststats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include "sepcov/error.hpp"
#include "sepcov/kernels.hpp"

namespace sepcov {
namespace {

constexpr double kZeroEigenRelTol = 1e-12;
constexpr double kDegenerateVarianceRelTol = 1e-15;
constexpr double kTieRelTol = 1e-8;

int parse_int(std::string_view text, std::string_view context) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    fail(ErrorKind::Parse, "projection set: bad integer '" + std::string(text) + "' in '" +
                               std::string(context) + "'");
  }
  return value;
}

void check_indices(const ProjectionSet& proj, Eigen::Index d1, Eigen::Index d2) {
  if (proj.size() == 0) fail(ErrorKind::InvalidArgument, "projection set is empty");
  if (proj.max_r() > d1 || proj.max_s() > d2) {
    fail(ErrorKind::InvalidArgument, "projection set " + proj.to_string() +
                                         " exceeds the grid " + std::to_string(d1) + "x" +
                                         std::to_string(d2));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// ProjectionSet

ProjectionSet ProjectionSet::rectangular(int p, int q) {
  if (p < 1 || q < 1) fail(ErrorKind::InvalidArgument, "rectangular projection set needs p,q >= 1");
  ProjectionSet out;
  out.pairs_.reserve(static_cast<std::size_t>(p * q));
  for (int r = 1; r <= p; ++r)
    for (int s = 1; s <= q; ++s) out.pairs_.push_back({r, s});
  out.rectangular_ = true;
  out.p_ = p;
  out.q_ = q;
  return out;
}

ProjectionSet ProjectionSet::from_pairs(std::vector<IndexPair> pairs) {
  if (pairs.empty()) fail(ErrorKind::InvalidArgument, "projection set is empty");
  std::set<std::pair<int, int>> seen;
  int p = 0, q = 0;
  for (const IndexPair& ij : pairs) {
    if (ij.r < 1 || ij.s < 1) fail(ErrorKind::InvalidArgument, "projection indices are 1-based");
    if (!seen.insert({ij.r, ij.s}).second) {
      fail(ErrorKind::InvalidArgument, "projection set has a repeated pair (" +
                                           std::to_string(ij.r) + "," + std::to_string(ij.s) + ")");
    }
    p = std::max(p, ij.r);
    q = std::max(q, ij.s);
  }
  if (static_cast<std::size_t>(p) * static_cast<std::size_t>(q) == pairs.size()) {
    // Distinct pairs inside {1..p}x{1..q} filling it completely.
    return rectangular(p, q);
  }
  ProjectionSet out;
  out.pairs_ = std::move(pairs);
  return out;
}

ProjectionSet ProjectionSet::parse(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.empty()) fail(ErrorKind::Parse, "projection set: empty text");
  if (text.front() != '(') {
    const auto x = text.find_first_of("xX");
    if (x == std::string_view::npos) {
      fail(ErrorKind::Parse, "projection set: expected 'pxq' or '(r,s);...', got '" +
                                 std::string(text) + "'");
    }
    return rectangular(parse_int(text.substr(0, x), text), parse_int(text.substr(x + 1), text));
  }
  std::vector<IndexPair> pairs;
  std::string_view rest = text;
  while (!rest.empty()) {
    while (!rest.empty() && (rest.front() == ' ' || rest.front() == ';')) rest.remove_prefix(1);
    if (rest.empty()) break;
    if (rest.front() != '(') fail(ErrorKind::Parse, "projection set: expected '(' in '" + std::string(text) + "'");
    const auto close = rest.find(')');
    const auto comma = rest.find(',');
    if (close == std::string_view::npos || comma == std::string_view::npos || comma > close) {
      fail(ErrorKind::Parse, "projection set: malformed pair in '" + std::string(text) + "'");
    }
    pairs.push_back({parse_int(rest.substr(1, comma - 1), text),
                     parse_int(rest.substr(comma + 1, close - comma - 1), text)});
    rest.remove_prefix(close + 1);
  }
  return from_pairs(std::move(pairs));
}

int ProjectionSet::max_r() const noexcept {
  int m = 0;
  for (const auto& ij : pairs_) m = std::max(m, ij.r);
  return m;
}

int ProjectionSet::max_s() const noexcept {
  int m = 0;
  for (const auto& ij : pairs_) m = std::max(m, ij.s);
  return m;
}

std::string ProjectionSet::to_string() const {
  if (rectangular_) return std::to_string(p_) + "x" + std::to_string(q_);
  std::string out;
  for (const auto& ij : pairs_) {
    if (!out.empty()) out += ';';
    out += "(" + std::to_string(ij.r) + "," + std::to_string(ij.s) + ")";
  }
  return out;
}

// ---------------------------------------------------------------------------
// TMatrix

double TMatrix::at(int r, int s) const {
  const auto& pairs = proj.pairs();
  for (std::size_t t = 0; t < pairs.size(); ++t) {
    if (pairs[t].r == r && pairs[t].s == s) return values[t];
  }
  fail(ErrorKind::InvalidArgument, "TMatrix: pair not in projection set");
}

Matrix TMatrix::as_matrix() const {
  if (!proj.is_rectangular()) {
    fail(ErrorKind::NonRectangularSet,
         "projection set " + proj.to_string() + " is not of the form {1..p}x{1..q}");
  }
  Matrix m(proj.p(), proj.q());
  const auto& pairs = proj.pairs();
  for (std::size_t t = 0; t < pairs.size(); ++t) m(pairs[t].r - 1, pairs[t].s - 1) = values[t];
  return m;
}

// ---------------------------------------------------------------------------
// Statistics

SeparableFit fit_separable(const SampleSet& s) {
  if (s.n() < 2) fail(ErrorKind::EmptySample, "need at least 2 replicates");
  SeparableFit fit;
  fit.centered = center(s);
  fit.marginals = marginal_covariances(fit.centered);
  fit.eig1 = sym_eigen(fit.marginals.c1);
  fit.eig2 = sym_eigen(fit.marginals.c2);
  return fit;
}

TMatrix t_stat(const SeparableFit& fit, const ProjectionSet& proj) {
  const CenteredSample& cs = fit.centered;
  check_indices(proj, cs.d1, cs.d2);
  const Vector& lambda = fit.eig1.values;
  const Vector& gamma = fit.eig2.values;
  const double floor = kZeroEigenRelTol * lambda(0) * gamma(0);
  for (const auto& ij : proj.pairs()) {
    if (!(lambda(ij.r - 1) * gamma(ij.s - 1) > floor)) {
      fail(ErrorKind::ZeroEigenvalue, "eigenvalue product for direction (" +
                                          std::to_string(ij.r) + "," + std::to_string(ij.s) +
                                          ") is zero");
    }
  }

  const std::size_t len = static_cast<std::size_t>(cs.n * cs.d2);
  const double n = static_cast<double>(cs.n);

  // w_r = u_r^T [A_1 ... A_N], one row vector of length N*d2 per needed r.
  std::map<int, std::vector<double>> row_projections;
  for (const auto& ij : proj.pairs()) {
    auto [it, inserted] = row_projections.try_emplace(ij.r);
    if (!inserted) continue;
    std::vector<double>& w = it->second;
    w.assign(len, 0.0);
    for (Eigen::Index k = 0; k < cs.d1; ++k) {
      kernels::axpy(fit.eig1.vectors(k, ij.r - 1), cs.row(k), w.data(), len);
    }
  }

  TMatrix t{proj, std::vector<double>(proj.size())};
  for (std::size_t idx = 0; idx < proj.size(); ++idx) {
    const IndexPair ij = proj.pairs()[idx];
    const std::vector<double>& w = row_projections.at(ij.r);
    const Vector v = fit.eig2.vectors.col(ij.s - 1);
    double sum_sq = 0.0;
    for (Eigen::Index m = 0; m < cs.n; ++m) {
      const double score =
          kernels::dot(w.data() + m * cs.d2, v.data(), static_cast<std::size_t>(cs.d2));
      sum_sq += score * score;
    }
    t.values[idx] = std::sqrt(n) * (sum_sq / n - lambda(ij.r - 1) * gamma(ij.s - 1));
  }
  return t;
}

TMatrix t_stat(const SampleSet& s, const ProjectionSet& proj) {
  return t_stat(fit_separable(s), proj);
}

double sigma_hat_sq(const MarginalPair& mp, const EigenSystem& eig1, const EigenSystem& eig2,
                    int r, int s) {
  if (r < 1 || s < 1 || r > eig1.dim() || s > eig2.dim()) {
    fail(ErrorKind::InvalidArgument, "sigma_hat_sq: index out of range");
  }
  const double tr1 = mp.trace_c1;
  const double tr2 = mp.trace_c2;
  const double lam = eig1.values(r - 1);
  const double gam = eig2.values(s - 1);
  const double row = tr1 * tr1 + mp.hs_sq_c1 - 2.0 * lam * tr1;
  const double col = tr2 * tr2 + mp.hs_sq_c2 - 2.0 * gam * tr2;
  const double value = 2.0 * lam * lam * gam * gam * row * col / (tr1 * tr1 * tr2 * tr2);
  const double lead = eig1.values(0) * eig2.values(0);
  if (!(value > kDegenerateVarianceRelTol * lead * lead)) {
    fail(ErrorKind::DegenerateVariance, "degenerate variance: sigma^2(" + std::to_string(r) +
                                            "," + std::to_string(s) + ") is zero");
  }
  return value;
}

std::vector<double> sigma_hat_sq_all(const SeparableFit& fit, const ProjectionSet& proj) {
  std::vector<double> out;
  out.reserve(proj.size());
  for (const auto& ij : proj.pairs()) {
    out.push_back(sigma_hat_sq(fit.marginals, fit.eig1, fit.eig2, ij.r, ij.s));
  }
  return out;
}

std::pair<SymMatrix, SymMatrix> sigma_lr(const MarginalPair& mp, const EigenSystem& eig1,
                                         const EigenSystem& eig2, int p, int q) {
  if (p < 1 || q < 1 || p > eig1.dim() || q > eig2.dim()) {
    fail(ErrorKind::InvalidArgument, "sigma_lr: p or q out of range");
  }
  const double tr1 = mp.trace_c1;
  const double tr2 = mp.trace_c2;
  const Vector& lambda = eig1.values;
  const Vector& gamma = eig2.values;
  if (!(lambda(p - 1) > kZeroEigenRelTol * lambda(0)) ||
      !(gamma(q - 1) > kZeroEigenRelTol * gamma(0))) {
    fail(ErrorKind::ZeroEigenvalue, "sigma_lr: requested eigenvalue is zero");
  }
  const double denom = tr1 * tr2;
  const double root2 = std::sqrt(2.0);
  Matrix left(p, p);
  for (int a = 0; a < p; ++a) {
    for (int b = a; b < p; ++b) {
      const double delta = a == b ? tr1 * tr1 : 0.0;
      const double v = root2 * lambda(a) * lambda(b) *
                       (delta + mp.hs_sq_c1 - (lambda(a) + lambda(b)) * tr1) / denom;
      left(a, b) = v;
      left(b, a) = v;
    }
  }
  Matrix right(q, q);
  for (int a = 0; a < q; ++a) {
    for (int b = a; b < q; ++b) {
      const double delta = a == b ? tr2 * tr2 : 0.0;
      const double v = root2 * gamma(a) * gamma(b) *
                       (delta + mp.hs_sq_c2 - (gamma(a) + gamma(b)) * tr2) / denom;
      right(a, b) = v;
      right(b, a) = v;
    }
  }
  // Same relative floor as sigma_hat_sq, split between the two factors.
  const double floor = std::sqrt(kDegenerateVarianceRelTol);
  for (int a = 0; a < p; ++a) {
    if (!(left(a, a) > floor * lambda(0) * lambda(0) * tr1 / tr2)) {
      fail(ErrorKind::DegenerateVariance,
           "degenerate variance: Sigma_L(" + std::to_string(a + 1) + "," + std::to_string(a + 1) + ") is zero");
    }
  }
  for (int a = 0; a < q; ++a) {
    if (!(right(a, a) > floor * gamma(0) * gamma(0) * tr2 / tr1)) {
      fail(ErrorKind::DegenerateVariance,
           "degenerate variance: Sigma_R(" + std::to_string(a + 1) + "," + std::to_string(a + 1) + ") is zero");
    }
  }
  return {SymMatrix(left), SymMatrix(right)};
}

double g_stat(const TMatrix& t) {
  double g = 0.0;
  for (double v : t.values) g += v * v;
  return g;
}

double g_tilde_a(const TMatrix& t, const std::vector<double>& sigmas) {
  if (sigmas.size() != t.values.size()) {
    fail(ErrorKind::ShapeMismatch, "g_tilde_a: one variance per projection pair required");
  }
  double g = 0.0;
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    if (!(sigmas[i] > 0.0)) fail(ErrorKind::DegenerateVariance, "g_tilde_a: non-positive variance");
    g += t.values[i] * t.values[i] / sigmas[i];
  }
  return g;
}

double g_tilde(const Matrix& t, const SymMatrix& sl, const SymMatrix& sr) {
  if (sl.dim() != t.rows() || sr.dim() != t.cols()) {
    fail(ErrorKind::ShapeMismatch, "g_tilde: covariance factors do not match T");
  }
  const SymMatrix wl = inv_sqrt(sl);
  const SymMatrix wr = inv_sqrt(sr);
  return (wl.mat() * t * wr.mat()).squaredNorm();
}

double g_tilde(const TMatrix& t, const SymMatrix& sl, const SymMatrix& sr) {
  return g_tilde(t.as_matrix(), sl, sr);
}

std::vector<std::string> eigen_tie_warnings(const SeparableFit& fit, const ProjectionSet& proj) {
  std::vector<std::string> out;
  auto scan = [&out](const Vector& values, const std::set<int>& wanted, const char* label) {
    const double tol = kTieRelTol * values(0);
    std::set<int> reported;
    for (int idx : wanted) {
      for (int nb : {idx - 1, idx + 1}) {
        if (nb < 1 || nb > values.size()) continue;
        const int lo = std::min(idx, nb);
        if (reported.count(lo)) continue;
        if (std::abs(values(idx - 1) - values(nb - 1)) < tol) {
          reported.insert(lo);
          out.push_back(std::string(label) + " eigenvalues " + std::to_string(lo) + " and " +
                        std::to_string(lo + 1) +
                        " are tied; the corresponding directions are not identifiable");
        }
      }
    }
  };
  std::set<int> rows, cols;
  for (const auto& ij : proj.pairs()) {
    rows.insert(ij.r);
    cols.insert(ij.s);
  }
  scan(fit.eig1.values, rows, "row");
  scan(fit.eig2.values, cols, "column");
  return out;
}

std::string_view to_string(Statistic stat) noexcept {
  switch (stat) {
    case Statistic::G: return "g";
    case Statistic::GTilde: return "g-tilde";
    case Statistic::GTildeA: return "g-tilde-a";
    case Statistic::HS: return "hs";
  }
  return "g";
}

Statistic parse_statistic(std::string_view text) {
  std::string norm(text);
  std::replace(norm.begin(), norm.end(), '_', '-');
  if (norm == "g") return Statistic::G;
  if (norm == "g-tilde") return Statistic::GTilde;
  if (norm == "g-tilde-a") return Statistic::GTildeA;
  if (norm == "hs") return Statistic::HS;
  fail(ErrorKind::Parse, "unknown statistic '" + std::string(text) + "'");
}

double evaluate_statistic(const SeparableFit& fit, const SampleSet& s, Statistic stat,
                          const ProjectionSet& proj) {
  switch (stat) {
    case Statistic::G:
      return g_stat(t_stat(fit, proj));
    case Statistic::GTildeA:
      return g_tilde_a(t_stat(fit, proj), sigma_hat_sq_all(fit, proj));
    case Statistic::GTilde: {
      if (!proj.is_rectangular()) {
        fail(ErrorKind::NonRectangularSet, "g-tilde needs a projection set {1..p}x{1..q}");
      }
      const TMatrix t = t_stat(fit, proj);
      const auto [sl, sr] = sigma_lr(fit.marginals, fit.eig1, fit.eig2, proj.p(), proj.q());
      return g_tilde(t, sl, sr);
    }
    case Statistic::HS:
      return hs_norm_dn_streaming(s);
  }
  return 0.0;
}

double evaluate_statistic(const SampleSet& s, Statistic stat, const ProjectionSet& proj) {
  if (stat == Statistic::HS) return hs_norm_dn_streaming(s);
  return evaluate_statistic(fit_separable(s), s, stat, proj);
}

}  // namespace sepcov
