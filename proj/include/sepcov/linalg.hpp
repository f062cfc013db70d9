#pragma once

// Dense symmetric linear algebra: eigen-decompositions, symmetric inverse
// square roots, Kronecker products and partial traces. The four-index
// covariance type exists for small grids only; the production statistics never
// materialize it.

#include <Eigen/Dense>
#include <cstddef>

namespace sepcov {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Largest d1*d2 for which a FullCov4 may be built.
inline constexpr std::size_t kFullCovMaxDim = 1024;

/// Symmetric real matrix. Construction checks finiteness and symmetry (within
/// 1e-12 relative to the largest entry) and stores (M + M^T)/2.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& m);

  static SymMatrix identity(Eigen::Index dim);
  static SymMatrix diagonal(const Vector& d);

  Eigen::Index dim() const noexcept { return m_.rows(); }
  const Matrix& mat() const noexcept { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  double trace() const { return m_.trace(); }
  /// Squared Hilbert-Schmidt (Frobenius) norm.
  double hs_sq() const { return m_.squaredNorm(); }

 private:
  Matrix m_;
};

/// Eigenvalues in non-increasing order with matching orthonormal columns.
/// Each column's largest-magnitude coordinate is positive.
struct EigenSystem {
  Vector values;
  Matrix vectors;

  Eigen::Index dim() const noexcept { return values.size(); }
};

/// With require_psd, eigenvalues below -1e-10*lambda_max throw
/// NegativeEigenvalue and those in [-1e-10*lambda_max, 0] are clamped to 0.
EigenSystem sym_eigen(const SymMatrix& m, bool require_psd = true);

/// A = V diag(lambda^{-1/2}) V^T. Throws SingularMatrix if any eigenvalue is
/// below rel_tol * lambda_max (negative eigenvalues included).
SymMatrix inv_sqrt(const SymMatrix& m, double rel_tol = 1e-10);

/// Symmetric PSD square root V diag(sqrt(lambda)) V^T, after PSD clamping.
SymMatrix psd_sqrt(const SymMatrix& m);

/// Dense covariance of a d1 x d2 random matrix, C(i,j,k,l) = Cov(X(i,j), X(k,l)).
/// Stored as a (d1*d2) x (d1*d2) matrix on the row-major vec index i*d2 + j.
class FullCov4 {
 public:
  FullCov4(Eigen::Index d1, Eigen::Index d2);
  /// Takes ownership of a (d1*d2)^2 matrix in the layout above; checks symmetry.
  FullCov4(Eigen::Index d1, Eigen::Index d2, Matrix entries);

  Eigen::Index d1() const noexcept { return d1_; }
  Eigen::Index d2() const noexcept { return d2_; }

  double operator()(Eigen::Index i, Eigen::Index j, Eigen::Index k,
                    Eigen::Index l) const {
    return m_(i * d2_ + j, k * d2_ + l);
  }
  double& operator()(Eigen::Index i, Eigen::Index j, Eigen::Index k,
                     Eigen::Index l) {
    return m_(i * d2_ + j, k * d2_ + l);
  }

  const Matrix& mat() const noexcept { return m_; }
  Matrix& mat() noexcept { return m_; }

  /// sum_{i,j} C(i,j,i,j)
  double trace() const { return m_.trace(); }
  double hs_sq() const { return m_.squaredNorm(); }

 private:
  Eigen::Index d1_;
  Eigen::Index d2_;
  Matrix m_;
};

/// Throws DimensionTooLarge past kFullCovMaxDim.
void check_fullcov_dims(Eigen::Index d1, Eigen::Index d2);

FullCov4 kron_full(const SymMatrix& a, const SymMatrix& b);

/// tr_1: contract over the first factor, result(j,l) = sum_i C(i,j,i,l).
SymMatrix partial_trace_1(const FullCov4& c);
/// tr_2: contract over the second factor, result(i,k) = sum_j C(i,j,k,j).
SymMatrix partial_trace_2(const FullCov4& c);

}  // namespace sepcov
