#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "qcert/linalg.hpp"
#include "qcert/model.hpp"

namespace qcert {

using SparseComplexMatrix = Eigen::SparseMatrix<Complex>;

/// Tensor product of n_modes truncated oscillators with levels 0..cutoff.
/// Mode 0 is the leftmost Kronecker factor. The interior subspace (total
/// photon number <= interior_cutoff) is where low-degree operator identities
/// hold exactly despite the truncation.
struct FockSpace {
  int n_modes = 1;
  int cutoff = 8;
  int interior_cutoff = 4;
  int max_dim = 4096;

  FockSpace() = default;
  FockSpace(int modes, int cut, int interior, int max_dimension = 4096);

  /// Throws ValidationError unless cutoff >= interior_cutoff + 2 and
  /// dim() <= max_dim.
  void validate() const;
  int dim() const;
  /// Occupation numbers of basis state `index`.
  std::vector<int> occupations(int index) const;
  int index_of(const std::vector<int>& occupations) const;
};

ComplexMatrix mode_annihilator(const FockSpace& space, int mode);

/// xi = [a_1..a_n, a_1^dag..a_n^dag].
std::vector<ComplexMatrix> mode_vector(const FockSpace& space);

/// z = sum_i E1_i a_i + E2_i a_i^dag.
ComplexMatrix build_z(const FockSpace& space, const ComplexMatrix& E1, const ComplexMatrix& E2);
/// q = z + z^dag.
ComplexMatrix build_q(const FockSpace& space, const ComplexMatrix& E1, const ComplexMatrix& E2);

/// sum_ij xi_i^dag X_ij xi_j for a 2n x 2n matrix X.
ComplexMatrix quadratic_form(const FockSpace& space, const ComplexMatrix& X);

/// 1/2 xi^dag M xi.
ComplexMatrix quadratic_hamiltonian(const FockSpace& space, const ComplexMatrix& M);

/// U g(Lambda) U^dag for Hermitian A.
ComplexMatrix func_of_hermitian(const ComplexMatrix& A, const std::function<double(double)>& g);

/// L_j = sum_i N1_ji a_i + N2_ji a_i^dag, one matrix per channel.
std::vector<ComplexMatrix> coupling_ops(const FockSpace& space, const ComplexMatrix& N1,
                                        const ComplexMatrix& N2);

/// Diagonal projector onto states with total photon number <= interior_cutoff.
ComplexMatrix interior_projector(const FockSpace& space);

/// Population of basis states in which some mode sits at the cutoff level.
double top_level_population(const FockSpace& space, const ComplexMatrix& rho);

ComplexMatrix fock_state(const FockSpace& space, const std::vector<int>& occupations);
ComplexMatrix vacuum_state(const FockSpace& space);

/// RK4 integrator for
///   rho' = -i[H, rho] + sum_j (L_j rho L_j^dag - 1/2 {L_j^dag L_j, rho}),
/// written as -i(K rho - rho K^dag) + sum_j L_j rho L_j^dag with
/// K = H - i/2 sum_j L_j^dag L_j. Since rho is Hermitian, rho K^dag is the
/// adjoint of K rho and only one product with K is formed per stage.
class LindbladIntegrator {
 public:
  LindbladIntegrator(const ComplexMatrix& H, const std::vector<ComplexMatrix>& Ls);

  ComplexMatrix rhs(const ComplexMatrix& rho) const;
  /// One RK4 step followed by rho <- (rho + rho^dag)/2. Throws NumericalError
  /// on non-finite entries.
  ComplexMatrix step(const ComplexMatrix& rho, double dt) const;

 private:
  using RowSparse = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;
  RowSparse K_;
  std::vector<RowSparse> L_;
};

ComplexMatrix lindblad_step(const ComplexMatrix& H, const std::vector<ComplexMatrix>& Ls,
                            const ComplexMatrix& rho, double dt);

enum class Ordering { AsWritten, Symmetrized };

std::string_view to_string(Ordering o);
Ordering ordering_from_string(std::string_view s);

struct InitialState {
  /// Empty means vacuum.
  std::vector<int> occupations;

  bool operator==(const InitialState&) const = default;
};

struct SimulationOptions {
  int cutoff = 8;
  int interior_cutoff = 4;
  double t_final = 10.0;
  double dt = 1e-3;
  InitialState initial;
  Ordering ordering = Ordering::AsWritten;
  int max_dim = 4096;
  /// Keep every k-th time point in the returned series.
  int record_every = 10;
  /// Check lambda_min(rho) every k steps.
  int positivity_every = 100;

  void validate() const;
  bool operator==(const SimulationOptions&) const = default;
};

struct SeriesRow {
  double t = 0.0;
  double expW = 0.0;
  double running_avg = 0.0;
  double top_level_population = 0.0;
};

struct SimulationResult {
  std::vector<SeriesRow> series;
  double final_average = 0.0;
  double final_expW = 0.0;
  double max_trace_drift = 0.0;
  double min_eigenvalue = 0.0;
  double max_top_level_population = 0.0;
  bool truncation_warning = false;
  int steps = 0;
};

/// Truncation-leak threshold on the top-level population.
inline constexpr double kTruncationLeakThreshold = 1e-6;

/// Operators used by the simulator.
struct SystemOperators {
  ComplexMatrix H;
  std::vector<ComplexMatrix> Ls;
  ComplexMatrix W;
  ComplexMatrix z;
  ComplexMatrix q;
};

/// H = 1/2 xi^dag M xi + g_f(q); W = c_w zz* + g_w(q), with zz* either z z^dag
/// (as written) or (z z^dag + z^dag z)/2.
SystemOperators build_system(const FockSpace& space, const PlantModel& plant,
                             const NonlinearitySpec& f, const CostSpec& cost, Ordering ordering);

/// Integrates from the initial state and returns <W>(t), the trapezoid running
/// average (1/T) int_0^T <W> dt, and integrity diagnostics.
SimulationResult simulate(const PlantModel& plant, const NonlinearitySpec& f, const CostSpec& cost,
                          const SimulationOptions& options);

/// Relative residuals, on the interior subspace, of the commutator identities
/// for V = xi^dag P xi:
///   mu_identity:     [z,[z,V]] = [z*,[z*,V]]* = mu I
///   quad_hamiltonian:[V, 1/2 xi^dag M xi] = xi^dag (P J M - M J P) xi
///   dissipation:     1/2 L^dag[V,L] + 1/2 [L^dag,V] L
///                      = tr(P J N^dag diag(I,0) N J) I
///                        - 1/2 xi^dag (N^dag J N J P + P J N^dag J N) xi
///   xi_commutator:   [xi, V] = 2 J P xi (max over components)
/// Each residual is ||Pi (lhs - rhs) Pi||_F / max(||Pi lhs Pi||_F,
/// ||Pi rhs Pi||_F, ||Pi V Pi||_F), or 0 when all three vanish.
struct IdentityReport {
  double mu_identity = 0.0;
  double quad_hamiltonian = 0.0;
  double dissipation = 0.0;
  double xi_commutator = 0.0;

  double max() const;
};

IdentityReport commutator_identity_report(const FockSpace& space, const ComplexMatrix& P,
                                          const PlantModel& plant);

}  // namespace qcert
