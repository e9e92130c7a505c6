#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "qcert/lmi.hpp"
#include "qcert/model.hpp"
#include "qcert/solver.hpp"

namespace qcert {

/// Multiplier of z z* in the LMI.
///
/// Literal mode evaluates the published piecewise formula. Derivation
/// consistent mode scales the (1/tau1^2 - 1) term by 1/gamma2^2 for
/// tau1^2 <= 1, which is what combining the sector bounds actually yields;
/// the tau1^2 > 1 branch is shared.
double kappa(double tau1, double gamma0, double gamma1, double gamma2, KappaMode mode);
double kappa(double tau1, const SectorConstants& s, KappaMode mode);

/// Constant term of the bound:
///   delta1 + (1/tau1^2 - 1) delta2                 for tau1^2 <= 1,
///   delta1 / tau1^2 + (1 - 1/tau1^2) delta0        otherwise.
double zeta(double tau1, double delta0, double delta1, double delta2);
double zeta(double tau1, const SectorConstants& s);

/// mu = -Et Sigma J P J Et^T.
Complex mu(const ComplexMatrix& P, const ComplexMatrix& E_tilde);

/// tr(P J N^dag diag(I_m, 0) N J) for doubled N. Throws NumericalError when
/// the imaginary residue exceeds 1e-12 relative.
double trace_term(const ComplexMatrix& P, const ComplexMatrix& N);

/// trace_term + zeta + sqrt(delta3) |mu|.
double bound_from(const ComplexMatrix& P, double tau1, const PlantModel& plant,
                  const SectorConstants& sector);

struct CertifyOptions {
  KappaMode kappa_mode = KappaMode::DerivationConsistent;
  double eps = 1e-8;
  SolverOptions solver;
};

/// The eps-shifted program has no solution at this tau1. Says nothing about
/// stability: the LMI condition is only sufficient.
struct Infeasible {
  double tau1 = 0.0;
  SolverDiagnostics solver;
};

/// Solver gave up (iteration limit, stalled Newton step, unbounded
/// objective). Carries the solver's diagnostics.
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(double tau1, SolverDiagnostics diag);
  double tau1() const { return tau1_; }
  const SolverDiagnostics& diagnostics() const { return diag_; }

 private:
  double tau1_;
  SolverDiagnostics diag_;
};

using CertifyOutcome = std::variant<Certificate, Infeasible>;

/// Fills every derived field of a certificate from P and tau1 (kappa, zeta,
/// mu, trace term, bound, feasibility margin).
Certificate make_certificate(const ComplexMatrix& P, double tau1, const PlantModel& plant,
                             const SectorConstants& sector, KappaMode mode);

CertifyOutcome certify_fixed_tau(double tau1, const PlantModel& plant,
                                 const SectorConstants& sector, const CertifyOptions& options);

struct SearchConfig {
  double grid_min = 0.031622776601683794;  // sqrt(1e-3)
  double grid_max = 31.622776601683793;    // sqrt(1e3)
  int grid_points = 31;
  int refine_iters = 24;
  /// Worker threads for the grid phase; results do not depend on this.
  int threads = 1;

  void validate() const;
};

struct TraceEntry {
  double tau1 = 0.0;
  std::optional<double> bound;  // empty when infeasible at this tau1
  bool refinement = false;
};

struct SearchResult {
  Certificate best;
  std::vector<TraceEntry> trace;
};

/// No grid point admitted a certificate.
class AllInfeasible : public std::runtime_error {
 public:
  explicit AllInfeasible(std::vector<TraceEntry> trace);
  const std::vector<TraceEntry>& trace() const { return trace_; }

 private:
  std::vector<TraceEntry> trace_;
};

/// Log-spaced grid over tau1, then golden-section refinement in log tau1
/// inside the contiguous feasible run around the best grid point.
SearchResult minimize_bound(const PlantModel& plant, const SectorConstants& sector,
                            const SearchConfig& search, const CertifyOptions& options);

}  // namespace qcert
