#include "sepcov/covariance.hpp"

#include <cmath>
#include <string>

#include "sepcov/error.hpp"
#include "sepcov/kernels.hpp"

namespace sepcov {
namespace {

constexpr double kDegenerateSumSq = 1e-300;

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void require_covariance_sample(const SampleSet& s) {
  if (s.n() < 2) fail(ErrorKind::EmptySample, "covariance estimate needs at least 2 replicates");
}

// Replicate-major transpose of the centered data: row p = i*d2 + j holds
// A_1(i,j) ... A_N(i,j).
std::vector<double> centered_by_entry(const SampleSet& s, const RowMatrix& mean) {
  const Eigen::Index n = s.n();
  const Eigen::Index dim = s.d1() * s.d2();
  std::vector<double> z(static_cast<std::size_t>(dim * n));
  for (Eigen::Index m = 0; m < n; ++m) {
    const double* x = s.data().data() + m * dim;
    for (Eigen::Index p = 0; p < dim; ++p) z[p * n + m] = x[p] - mean.data()[p];
  }
  return z;
}

SymMatrix gram_over_rows(const double* base, Eigen::Index rows, Eigen::Index len,
                         double scale) {
  Matrix g(rows, rows);
  for (Eigen::Index a = 0; a < rows; ++a) {
    for (Eigen::Index b = a; b < rows; ++b) {
      const double v = scale * kernels::dot(base + a * len, base + b * len,
                                            static_cast<std::size_t>(len));
      g(a, b) = v;
      g(b, a) = v;
    }
  }
  return SymMatrix(g);
}

}  // namespace

SampleSet::SampleSet(Eigen::Index n, Eigen::Index d1, Eigen::Index d2)
    : n_(n), d1_(d1), d2_(d2), data_(static_cast<std::size_t>(n * d1 * d2), 0.0) {
  if (n < 0 || d1 <= 0 || d2 <= 0) fail(ErrorKind::InvalidArgument, "SampleSet: bad dimensions");
}

SampleSet::SampleSet(Eigen::Index n, Eigen::Index d1, Eigen::Index d2, std::vector<double> data)
    : n_(n), d1_(d1), d2_(d2), data_(std::move(data)) {
  if (n < 0 || d1 <= 0 || d2 <= 0) fail(ErrorKind::InvalidArgument, "SampleSet: bad dimensions");
  if (data_.size() != static_cast<std::size_t>(n * d1 * d2)) {
    fail(ErrorKind::ShapeMismatch, "SampleSet: data size does not match n*d1*d2");
  }
  for (double v : data_) {
    if (!std::isfinite(v)) fail(ErrorKind::InvalidArgument, "SampleSet: non-finite entry");
  }
}

SampleSet SampleSet::from_matrices(std::span<const Matrix> replicates) {
  if (replicates.empty()) fail(ErrorKind::EmptySample, "SampleSet: no replicates");
  const Eigen::Index d1 = replicates.front().rows();
  const Eigen::Index d2 = replicates.front().cols();
  std::vector<double> data;
  data.reserve(replicates.size() * static_cast<std::size_t>(d1 * d2));
  for (const Matrix& x : replicates) {
    if (x.rows() != d1 || x.cols() != d2) {
      fail(ErrorKind::ShapeMismatch, "SampleSet: replicates differ in shape");
    }
    for (Eigen::Index i = 0; i < d1; ++i)
      for (Eigen::Index j = 0; j < d2; ++j) data.push_back(x(i, j));
  }
  return SampleSet(static_cast<Eigen::Index>(replicates.size()), d1, d2, std::move(data));
}

SampleSet SampleSet::select(std::span<const Eigen::Index> indices) const {
  const std::size_t block = static_cast<std::size_t>(d1_ * d2_);
  std::vector<double> data(indices.size() * block);
  for (std::size_t t = 0; t < indices.size(); ++t) {
    const Eigen::Index m = indices[t];
    if (m < 0 || m >= n_) fail(ErrorKind::InvalidArgument, "SampleSet::select: index out of range");
    std::copy_n(data_.data() + m * block, block, data.data() + t * block);
  }
  SampleSet out;
  out.n_ = static_cast<Eigen::Index>(indices.size());
  out.d1_ = d1_;
  out.d2_ = d2_;
  out.data_ = std::move(data);
  return out;
}

RowMatrix sample_mean(const SampleSet& s) {
  if (s.n() < 1) fail(ErrorKind::EmptySample, "sample_mean: empty sample");
  RowMatrix mean = RowMatrix::Zero(s.d1(), s.d2());
  for (Eigen::Index m = 0; m < s.n(); ++m) mean += s[m];
  mean /= static_cast<double>(s.n());
  return mean;
}

CenteredSample center(const SampleSet& s) {
  CenteredSample cs;
  cs.n = s.n();
  cs.d1 = s.d1();
  cs.d2 = s.d2();
  cs.mean = sample_mean(s);
  const Eigen::Index n = cs.n, d1 = cs.d1, d2 = cs.d2;
  cs.by_row.resize(static_cast<std::size_t>(n * d1 * d2));
  cs.by_col.resize(static_cast<std::size_t>(n * d1 * d2));
  std::vector<double> centered_row(static_cast<std::size_t>(d2));
  for (Eigen::Index m = 0; m < n; ++m) {
    const double* x = s.data().data() + m * d1 * d2;
    for (Eigen::Index k = 0; k < d1; ++k) {
      double* dst = cs.by_row.data() + k * n * d2 + m * d2;
      kernels::sub(x + k * d2, cs.mean.data() + k * d2, dst, static_cast<std::size_t>(d2));
      for (Eigen::Index l = 0; l < d2; ++l) cs.by_col[l * n * d1 + m * d1 + k] = dst[l];
    }
  }
  return cs;
}

MarginalPair marginal_covariances(const CenteredSample& cs) {
  if (cs.n < 2) fail(ErrorKind::EmptySample, "marginal_covariances: need at least 2 replicates");
  const double inv_n = 1.0 / static_cast<double>(cs.n);
  const SymMatrix raw1 = gram_over_rows(cs.by_row.data(), cs.d1, cs.n * cs.d2, inv_n);
  const SymMatrix raw2 = gram_over_rows(cs.by_col.data(), cs.d2, cs.n * cs.d1, inv_n);

  const double tr1 = raw1.trace();
  const double tr2 = raw2.trace();
  if (!(tr1 * cs.n >= kDegenerateSumSq) || !(tr2 * cs.n >= kDegenerateSumSq)) {
    fail(ErrorKind::DegenerateSample,
         "degenerate sample: all replicates are identical (zero total variance)");
  }

  MarginalPair mp;
  mp.c1 = SymMatrix(Matrix(raw1.mat() / std::sqrt(tr1)));
  mp.c2 = SymMatrix(Matrix(raw2.mat() / std::sqrt(tr2)));
  mp.trace_c1 = mp.c1.trace();
  mp.trace_c2 = mp.c2.trace();
  mp.hs_sq_c1 = mp.c1.hs_sq();
  mp.hs_sq_c2 = mp.c2.hs_sq();
  mp.total_trace = tr1;
  return mp;
}

MarginalPair marginal_covariances(const SampleSet& s) {
  require_covariance_sample(s);
  return marginal_covariances(center(s));
}

FullCov4 full_covariance(const SampleSet& s) {
  check_fullcov_dims(s.d1(), s.d2());
  require_covariance_sample(s);
  const RowMatrix mean = sample_mean(s);
  const Eigen::Index dim = s.d1() * s.d2();
  RowMatrix a(s.n(), dim);
  for (Eigen::Index m = 0; m < s.n(); ++m) {
    a.row(m) = Eigen::Map<const Eigen::RowVectorXd>(s[m].data(), dim) -
               Eigen::Map<const Eigen::RowVectorXd>(mean.data(), dim);
  }
  Matrix c = (a.transpose() * a) / static_cast<double>(s.n());
  c = 0.5 * (c + c.transpose());
  return FullCov4(s.d1(), s.d2(), std::move(c));
}

double hs_norm_dn_streaming(const SampleSet& s) {
  require_covariance_sample(s);
  const MarginalPair mp = marginal_covariances(s);
  const RowMatrix mean = sample_mean(s);
  const std::vector<double> z = centered_by_entry(s, mean);

  const Eigen::Index n = s.n(), d1 = s.d1(), d2 = s.d2();
  const double inv_n = 1.0 / static_cast<double>(n);
  const Matrix& c1 = mp.c1.mat();
  const Matrix& c2 = mp.c2.mat();
  CompensatedSum acc;
  for (Eigen::Index i = 0; i < d1; ++i) {
    for (Eigen::Index j = 0; j < d2; ++j) {
      const double* zp = z.data() + (i * d2 + j) * n;
      for (Eigen::Index k = 0; k < d1; ++k) {
        for (Eigen::Index l = 0; l < d2; ++l) {
          const double* zq = z.data() + (k * d2 + l) * n;
          const double y = inv_n * kernels::dot(zp, zq, static_cast<std::size_t>(n));
          const double d = y - c1(i, k) * c2(j, l);
          acc.add(d * d);
        }
      }
    }
  }
  return acc.value();
}

double hs_norm_dn_diff_streaming(const SampleSet& boot, const SampleSet& orig) {
  if (!boot.same_shape(orig)) {
    fail(ErrorKind::ShapeMismatch, "hs_norm_dn_diff_streaming: samples differ in shape");
  }
  require_covariance_sample(orig);
  const MarginalPair mp = marginal_covariances(orig);
  const MarginalPair mpb = marginal_covariances(boot);
  const std::vector<double> z = centered_by_entry(orig, sample_mean(orig));
  const std::vector<double> zb = centered_by_entry(boot, sample_mean(boot));

  const Eigen::Index n = orig.n(), d1 = orig.d1(), d2 = orig.d2();
  const double inv_n = 1.0 / static_cast<double>(n);
  const Matrix& c1 = mp.c1.mat();
  const Matrix& c2 = mp.c2.mat();
  const Matrix& b1 = mpb.c1.mat();
  const Matrix& b2 = mpb.c2.mat();
  CompensatedSum acc;
  for (Eigen::Index i = 0; i < d1; ++i) {
    for (Eigen::Index j = 0; j < d2; ++j) {
      const Eigen::Index p = i * d2 + j;
      for (Eigen::Index k = 0; k < d1; ++k) {
        for (Eigen::Index l = 0; l < d2; ++l) {
          const Eigen::Index q = k * d2 + l;
          const double y = inv_n * kernels::dot_diff(z.data() + p * n, z.data() + q * n,
                                                     zb.data() + p * n, zb.data() + q * n,
                                                     static_cast<std::size_t>(n));
          // y = C - C*, so y + c1* c2* - c1 c2 = D - D*.
          const double d = y + b1(i, k) * b2(j, l) - c1(i, k) * c2(j, l);
          acc.add(d * d);
        }
      }
    }
  }
  return acc.value();
}

}  // namespace sepcov
