#include "sepcov/linalg.hpp"

#include <cmath>
#include <string>

#include "sepcov/error.hpp"

namespace sepcov {
namespace {

constexpr double kSymmetryRelTol = 1e-12;
constexpr double kPsdClampRelTol = 1e-10;

void check_symmetric(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    fail(ErrorKind::ShapeMismatch, std::string(what) + ": matrix is not square");
  }
  if (!m.allFinite()) fail(ErrorKind::InvalidArgument, std::string(what) + ": non-finite entry");
  const double scale = m.cwiseAbs().maxCoeff();
  const double tol = kSymmetryRelTol * (scale > 0.0 ? scale : 1.0);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
      if (std::abs(m(i, j) - m(j, i)) > tol) {
        fail(ErrorKind::NotSymmetric,
             std::string(what) + ": asymmetric at (" + std::to_string(i) + "," +
                 std::to_string(j) + ")");
      }
    }
  }
}

// Largest-magnitude coordinate positive; first one wins on exact ties.
void fix_signs(Matrix& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index arg = 0;
    vectors.col(c).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, c) < 0.0) vectors.col(c) *= -1.0;
  }
}

}  // namespace

SymMatrix::SymMatrix(const Matrix& m) {
  check_symmetric(m, "SymMatrix");
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(Eigen::Index dim) {
  return SymMatrix(Matrix::Identity(dim, dim));
}

SymMatrix SymMatrix::diagonal(const Vector& d) {
  return SymMatrix(Matrix(d.asDiagonal()));
}

EigenSystem sym_eigen(const SymMatrix& m, bool require_psd) {
  const Eigen::Index n = m.dim();
  EigenSystem out;
  if (n == 0) return out;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m.mat());
  if (solver.info() != Eigen::Success) {
    fail(ErrorKind::InvalidArgument, "sym_eigen: eigen-decomposition did not converge");
  }
  // Eigen returns ascending order.
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  fix_signs(out.vectors);

  if (require_psd) {
    const double lmax = std::max(out.values(0), 0.0);
    const double floor = -kPsdClampRelTol * lmax;
    for (Eigen::Index i = 0; i < n; ++i) {
      double& v = out.values(i);
      if (v < floor) {
        fail(ErrorKind::NegativeEigenvalue,
             "sym_eigen: eigenvalue " + std::to_string(v) + " below -1e-10*lambda_max");
      }
      if (v < 0.0) v = 0.0;
    }
  }
  return out;
}

SymMatrix inv_sqrt(const SymMatrix& m, double rel_tol) {
  const EigenSystem es = sym_eigen(m, /*require_psd=*/false);
  if (es.dim() == 0) return m;
  const double lmax = es.values(0);
  if (!(lmax > 0.0)) fail(ErrorKind::SingularMatrix, "inv_sqrt: matrix has no positive eigenvalue");
  const double threshold = rel_tol * lmax;
  for (Eigen::Index i = 0; i < es.dim(); ++i) {
    if (es.values(i) < threshold) {
      fail(ErrorKind::SingularMatrix, "inv_sqrt: eigenvalue " + std::to_string(es.values(i)) +
                                          " below rel_tol*lambda_max");
    }
  }
  const Vector scale = es.values.array().rsqrt();
  Matrix a = es.vectors * scale.asDiagonal() * es.vectors.transpose();
  return SymMatrix(Matrix(0.5 * (a + a.transpose())));
}

SymMatrix psd_sqrt(const SymMatrix& m) {
  const EigenSystem es = sym_eigen(m, /*require_psd=*/true);
  if (es.dim() == 0) return m;
  const Vector scale = es.values.array().sqrt();
  Matrix a = es.vectors * scale.asDiagonal() * es.vectors.transpose();
  return SymMatrix(Matrix(0.5 * (a + a.transpose())));
}

void check_fullcov_dims(Eigen::Index d1, Eigen::Index d2) {
  if (d1 <= 0 || d2 <= 0) fail(ErrorKind::InvalidArgument, "FullCov4: dimensions must be positive");
  if (static_cast<std::size_t>(d1) * static_cast<std::size_t>(d2) > kFullCovMaxDim) {
    fail(ErrorKind::DimensionTooLarge,
         "FullCov4: d1*d2 = " + std::to_string(d1 * d2) + " exceeds " +
             std::to_string(kFullCovMaxDim));
  }
}

FullCov4::FullCov4(Eigen::Index d1, Eigen::Index d2) : d1_(d1), d2_(d2) {
  check_fullcov_dims(d1, d2);
  m_ = Matrix::Zero(d1 * d2, d1 * d2);
}

FullCov4::FullCov4(Eigen::Index d1, Eigen::Index d2, Matrix entries)
    : d1_(d1), d2_(d2), m_(std::move(entries)) {
  check_fullcov_dims(d1, d2);
  if (m_.rows() != d1 * d2 || m_.cols() != d1 * d2) {
    fail(ErrorKind::ShapeMismatch, "FullCov4: entries must be (d1*d2)^2");
  }
  check_symmetric(m_, "FullCov4");
}

FullCov4 kron_full(const SymMatrix& a, const SymMatrix& b) {
  const Eigen::Index d1 = a.dim();
  const Eigen::Index d2 = b.dim();
  FullCov4 c(d1, d2);
  // Row-major vec index i*d2 + j makes this the ordinary Kronecker product.
  for (Eigen::Index i = 0; i < d1; ++i) {
    for (Eigen::Index k = 0; k < d1; ++k) {
      c.mat().block(i * d2, k * d2, d2, d2) = a(i, k) * b.mat();
    }
  }
  return c;
}

SymMatrix partial_trace_1(const FullCov4& c) {
  const Eigen::Index d1 = c.d1();
  const Eigen::Index d2 = c.d2();
  Matrix out = Matrix::Zero(d2, d2);
  for (Eigen::Index i = 0; i < d1; ++i) out += c.mat().block(i * d2, i * d2, d2, d2);
  return SymMatrix(out);
}

SymMatrix partial_trace_2(const FullCov4& c) {
  const Eigen::Index d1 = c.d1();
  const Eigen::Index d2 = c.d2();
  Matrix out(d1, d1);
  for (Eigen::Index i = 0; i < d1; ++i) {
    for (Eigen::Index k = 0; k < d1; ++k) {
      out(i, k) = c.mat().block(i * d2, k * d2, d2, d2).trace();
    }
  }
  return SymMatrix(out);
}

}  // namespace sepcov
