#include "qcert/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "qcert/errors.hpp"

namespace qcert {

namespace {

void require_square(const ComplexMatrix& A, const char* what) {
  if (A.rows() != A.cols()) {
    throw ValidationError(std::string(what) + ": matrix is not square");
  }
}

void require_hermitian(const ComplexMatrix& A, const char* what) {
  require_square(A, what);
  // Loose enough for matrices assembled from sums of products.
  if (!is_hermitian(A, 1e-9)) {
    throw ValidationError(std::string(what) + ": matrix is not Hermitian");
  }
}

double scale_of(const ComplexMatrix& A) { return std::max(1.0, A.cwiseAbs().maxCoeff()); }

}  // namespace

RealMatrix build_J(int n) {
  if (n < 1) throw ValidationError("build_J: n must be >= 1");
  RealVector d(2 * n);
  d.head(n).setOnes();
  d.tail(n).setConstant(-1.0);
  return d.asDiagonal();
}

RealMatrix build_Sigma(int n) {
  if (n < 1) throw ValidationError("build_Sigma: n must be >= 1");
  RealMatrix S = RealMatrix::Zero(2 * n, 2 * n);
  S.topRightCorner(n, n).setIdentity();
  S.bottomLeftCorner(n, n).setIdentity();
  return S;
}

ComplexMatrix build_F(const ComplexMatrix& M, const ComplexMatrix& N) {
  require_square(M, "build_F");
  if (M.rows() % 2 != 0) throw ValidationError("build_F: M must have even dimension");
  if (N.cols() != M.cols() || N.rows() % 2 != 0) {
    throw ValidationError("build_F: N must be 2m x 2n with 2n = dim M");
  }
  const int n = static_cast<int>(M.rows() / 2);
  const int m = static_cast<int>(N.rows() / 2);
  const ComplexMatrix Jn = build_J(n).cast<Complex>();
  const ComplexMatrix Jm = build_J(m).cast<Complex>();
  return -kI * Jn * M - 0.5 * Jn * N.adjoint() * Jm * N;
}

RealMatrix real_embedding(const ComplexMatrix& A) {
  require_hermitian(A, "real_embedding");
  const auto k = A.rows();
  RealMatrix R(2 * k, 2 * k);
  R.topLeftCorner(k, k) = A.real();
  R.topRightCorner(k, k) = -A.imag();
  R.bottomLeftCorner(k, k) = A.imag();
  R.bottomRightCorner(k, k) = A.real();
  // Exact symmetry; the Hermitian check above is tolerance based.
  return 0.5 * (R + R.transpose());
}

ComplexMatrix complex_from_embedding(const RealMatrix& R) {
  if (R.rows() != R.cols() || R.rows() % 2 != 0) {
    throw ValidationError("complex_from_embedding: expected square matrix of even size");
  }
  const auto k = R.rows() / 2;
  ComplexMatrix A(k, k);
  A.real() = 0.5 * (R.topLeftCorner(k, k) + R.bottomRightCorner(k, k));
  A.imag() = 0.5 * (R.bottomLeftCorner(k, k) - R.topRightCorner(k, k));
  return A;
}

bool is_hermitian(const ComplexMatrix& A, double rel_tol) {
  if (A.rows() != A.cols()) return false;
  return (A - A.adjoint()).cwiseAbs().maxCoeff() <= rel_tol * scale_of(A);
}

bool is_symmetric(const ComplexMatrix& A, double rel_tol) {
  if (A.rows() != A.cols()) return false;
  return (A - A.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale_of(A);
}

RealVector hermitian_eigenvalues(const ComplexMatrix& A) {
  const RealMatrix R = real_embedding(A);
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(R, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericalError("hermitian_eigenvalues: eigensolver did not converge");
  }
  const RealVector& doubled = es.eigenvalues();
  const auto k = A.rows();
  RealVector out(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    out(i) = 0.5 * (doubled(2 * i) + doubled(2 * i + 1));
  }
  return out;
}

double hermitian_lambda_max(const ComplexMatrix& A) {
  if (A.size() == 0) throw ValidationError("hermitian_lambda_max: empty matrix");
  return hermitian_eigenvalues(A).maxCoeff();
}

double hermitian_lambda_min(const ComplexMatrix& A) {
  if (A.size() == 0) throw ValidationError("hermitian_lambda_min: empty matrix");
  return hermitian_eigenvalues(A).minCoeff();
}

double norm_inf(const ComplexMatrix& A) {
  if (A.size() == 0) return 0.0;
  return A.cwiseAbs().rowwise().sum().maxCoeff();
}

double default_margin(const ComplexMatrix& A) { return 1e-8 * std::max(1.0, norm_inf(A)); }

bool is_negative_definite(const ComplexMatrix& A, double margin) {
  return hermitian_lambda_max(A) <= -margin;
}

}  // namespace qcert
