#pragma once

#include <complex>

#include <Eigen/Dense>

namespace qcert {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

/// diag(+1 x n, -1 x n), the commutation matrix of the doubled mode vector.
RealMatrix build_J(int n);

/// Block anti-diagonal identity [[0, I], [I, 0]] of size 2n.
RealMatrix build_Sigma(int n);

/// Drift matrix F = -i J M - 1/2 J N^dagger J N for doubled M (2n x 2n) and
/// doubled N (2m x 2n).
ComplexMatrix build_F(const ComplexMatrix& M, const ComplexMatrix& N);

/// [[Re A, -Im A], [Im A, Re A]]. A must be Hermitian.
RealMatrix real_embedding(const ComplexMatrix& A);

/// Inverse of real_embedding on its image: reads back Re A and Im A.
ComplexMatrix complex_from_embedding(const RealMatrix& R);

bool is_hermitian(const ComplexMatrix& A, double rel_tol = 1e-12);
bool is_symmetric(const ComplexMatrix& A, double rel_tol = 1e-12);

/// Ascending eigenvalues of a Hermitian matrix. Computed from the real
/// embedding, whose spectrum is the complex spectrum with every value doubled;
/// one representative of each pair is kept.
RealVector hermitian_eigenvalues(const ComplexMatrix& A);

double hermitian_lambda_max(const ComplexMatrix& A);
double hermitian_lambda_min(const ComplexMatrix& A);

/// 1e-8 * max(1, ||A||_inf).
double default_margin(const ComplexMatrix& A);

/// True iff lambda_max(A) <= -margin.
bool is_negative_definite(const ComplexMatrix& A, double margin);

/// Maximum absolute row sum.
double norm_inf(const ComplexMatrix& A);

}  // namespace qcert
