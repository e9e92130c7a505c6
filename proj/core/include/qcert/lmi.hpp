#pragma once

#include <vector>

#include "qcert/conic.hpp"
#include "qcert/linalg.hpp"
#include "qcert/model.hpp"

namespace qcert {

/// Real basis of the Hermitian matrices [[P1, P2], [P2#, P1#]] with P1
/// Hermitian and P2 complex symmetric. Dimension n^2 + n(n+1). The basis is
/// orthogonal in the Frobenius inner product.
struct StructuredPBasis {
  int n = 0;
  std::vector<ComplexMatrix> basis;

  int dim() const { return static_cast<int>(basis.size()); }
  ComplexMatrix compose(const RealVector& coords) const;
  /// Coordinates of the projection of P onto the structured subspace.
  RealVector decompose(const ComplexMatrix& P) const;
};

StructuredPBasis p_basis(int n);

/// True when P is Hermitian and P = Sigma P# Sigma to the given tolerance.
bool is_structured(const ComplexMatrix& P, double tol = 1e-10);

/// (2n+1) x (2n+1) block matrix
///   [[F^dag P + P F + kappa Sigma Et^T Et# Sigma, 2 P J Sigma Et^T],
///    [2 Et# Sigma J P,                             -1/tau1^2      ]].
ComplexMatrix assemble_lmi(const ComplexMatrix& P, double tau1, double kappa,
                           const PlantModel& plant);

/// Schur complement of assemble_lmi with respect to its last entry:
///   F^dag P + P F + 4 tau1^2 P J Sigma Et^T Et# Sigma J P + kappa Sigma Et^T Et# Sigma.
ComplexMatrix assemble_qmi(const ComplexMatrix& P, double tau1, double kappa,
                           const PlantModel& plant);

/// J N^dag diag(I_m, 0) N J, so that the trace term is tr(P * weight).
ComplexMatrix trace_weight(const PlantModel& plant);

/// Bound-minimisation program at fixed tau1. Variables are the coordinates of
/// P in `basis` followed by the slack t >= |mu|.
struct BoundProgram {
  ConicProblem conic;
  StructuredPBasis basis;
  double tau1 = 0.0;
  double kappa = 0.0;
  double zeta = 0.0;
  double eps = 0.0;

  int slack_index() const { return basis.dim(); }
  ComplexMatrix P_of(const RealVector& x) const { return basis.compose(x.head(basis.dim())); }
  double slack_of(const RealVector& x) const { return x(slack_index()); }
};

/// Builds
///   minimise tr(P W) + sqrt(delta3) t + zeta
///   s.t. -LMI(P) - eps I >= 0,  P - eps I >= 0,  [[t, mu], [mu*, t]] >= 0.
/// kappa and zeta are supplied by the caller.
BoundProgram build_conic_program(const PlantModel& plant, const SectorConstants& sector,
                                 double tau1, double kappa, double zeta, double eps);

}  // namespace qcert
