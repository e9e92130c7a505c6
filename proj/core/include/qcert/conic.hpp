#pragma once

#include <string>
#include <vector>

#include "qcert/linalg.hpp"

namespace qcert {

/// Hermitian matrix-valued affine map x -> A0 + sum_i x_i A_i, constrained to
/// be positive semidefinite.
struct AffineHermitianBlock {
  std::string name;
  ComplexMatrix constant;
  std::vector<ComplexMatrix> coefficients;

  ComplexMatrix evaluate(const RealVector& x) const;
  /// Size of the real symmetric embedding handed to the solver.
  Eigen::Index embedded_dim() const { return 2 * constant.rows(); }
};

/// minimize objective . x + objective_offset
/// subject to  block_k(x) >= 0 (PSD) for every block.
struct ConicProblem {
  int num_vars = 0;
  RealVector objective;
  double objective_offset = 0.0;
  std::vector<AffineHermitianBlock> blocks;

  double evaluate_objective(const RealVector& x) const {
    return objective.dot(x) + objective_offset;
  }

  /// Throws ValidationError on inconsistent sizes or non-Hermitian data.
  void validate() const;
};

}  // namespace qcert
