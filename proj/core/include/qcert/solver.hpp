#pragma once

#include <string>

#include "qcert/conic.hpp"
#include "qcert/model.hpp"

namespace qcert {

struct SolverOptions {
  /// Target duality gap, relative to max(1, |objective|).
  double tol = 1e-9;
  /// Cap on the total number of Newton steps over both phases.
  int max_iter = 200;
  /// Every variable is kept inside |x_i| <= box_radius. Directions with zero
  /// cost then still have a finite analytic centre.
  double box_radius = 1e6;
};

struct SolveResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  RealVector x;
  double objective_value = 0.0;
  /// Dual objective at the final iterate.
  double dual_bound = 0.0;
  double duality_gap = 0.0;
  /// Max over i of |c_i - sum_k <Z_k, A_ki> + box multipliers|.
  double dual_residual = 0.0;
  int iterations = 0;
  /// Smallest eigenvalue over all constraint blocks at x.
  double min_block_eigenvalue = 0.0;
  std::string message;
};

/// Primal-dual path-following method (HKM direction, Mehrotra
/// predictor-corrector) with a phase-I stage for finding a strictly feasible
/// start. Deterministic: no randomisation, no threading.
SolveResult solve(const ConicProblem& problem, const SolverOptions& options = {});

}  // namespace qcert
