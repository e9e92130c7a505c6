#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qcert/linalg.hpp"

namespace qcert {

struct RawPlant;
struct PlantValidationOptions;

/// Nominal data of the uncertain system: quadratic Hamiltonian matrix,
/// coupling blocks and the row vector defining the scalar operator z.
///
/// The doubled Hamiltonian matrix is stored whole. Plants built from blocks
/// (M1, M2) are checked for the doubled structure; plants given as a full
/// Hermitian matrix are only checked for Hermiticity, and
/// `block_structured()` reports whether the structure happens to hold.
class PlantModel {
 public:
  int n_modes() const { return n_; }
  int m_channels() const { return m_; }

  const ComplexMatrix& M() const { return M_; }
  ComplexMatrix M1() const { return M_.topLeftCorner(n_, n_); }
  ComplexMatrix M2() const { return M_.topRightCorner(n_, n_); }
  const ComplexMatrix& N1() const { return N1_; }
  const ComplexMatrix& N2() const { return N2_; }
  const ComplexMatrix& E1() const { return E1_; }
  const ComplexMatrix& E2() const { return E2_; }
  bool block_structured() const { return block_structured_; }

  /// Dimension-aware exact comparison.
  bool operator==(const PlantModel& other) const;

 private:
  friend PlantModel validate_plant(const RawPlant& raw, const PlantValidationOptions& opts);
  int n_ = 0;
  int m_ = 0;
  ComplexMatrix M_;
  ComplexMatrix N1_, N2_, E1_, E2_;
  bool block_structured_ = false;
};

/// Unvalidated plant matrices as read from input. Exactly one of
/// {M1 and M2} or {M} must be present.
struct RawPlant {
  std::optional<int> n_modes;
  std::optional<int> m_channels;
  std::optional<ComplexMatrix> M1, M2, M;
  ComplexMatrix N1, N2, E1, E2;
};

struct PlantValidationOptions {
  /// Replace M1, M (by (A + A^dagger)/2) and M2 (by (A + A^T)/2) before
  /// validating.
  bool symmetrize = false;
  /// Accept E1 = E2 = 0 (degenerate z), for analysing the bare linear part.
  bool allow_zero_z = false;
};

PlantModel validate_plant(const RawPlant& raw, const PlantValidationOptions& opts = {});

struct DoubledMatrices {
  ComplexMatrix M;        // 2n x 2n
  ComplexMatrix N;        // 2m x 2n, [[N1, N2], [N2#, N1#]]
  ComplexMatrix E_tilde;  // 1 x 2n, [E1, E2]
};

DoubledMatrices doubled_matrices(const PlantModel& plant);

struct SectorConstants {
  double gamma0 = 1.0;
  double gamma1 = 1.0;
  double gamma2 = 1.0;
  double delta0 = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;

  /// Throws ValidationError naming the first offending constant.
  void validate() const;

  bool operator==(const SectorConstants&) const = default;
};

/// Power series in q with real coefficients c0 + c1 q + c2 q^2 + ...
struct PolynomialQ {
  std::vector<double> coeffs;

  double value(double q) const;
  /// k-th derivative.
  double derivative(double q, int k) const;

  bool operator==(const PolynomialQ&) const = default;
};

/// Perturbation Hamiltonian f(z, z*) = g_f(z + z*), described for simulation
/// by g_f and for sector verification by the formal derivatives df/dz and
/// d2f/dz2 evaluated on complex scalars.
class NonlinearitySpec {
 public:
  enum class Kind { NegCosQ, Zero, PolynomialQ, Custom };

  static NonlinearitySpec neg_cos_q();
  static NonlinearitySpec zero();
  static NonlinearitySpec polynomial_q(std::vector<double> coeffs);
  static NonlinearitySpec custom(std::function<double(double)> g_f,
                                 std::function<Complex(Complex)> f_z,
                                 std::function<Complex(Complex)> f_zz);
  /// Resolves "neg_cos_q" and "zero"; throws ConfigError otherwise.
  static NonlinearitySpec from_tag(std::string_view tag);

  Kind kind() const { return kind_; }
  std::string tag() const;
  const std::vector<double>& coeffs() const { return poly_.coeffs; }

  double g_f(double q) const { return g_f_(q); }
  Complex f_z(Complex z) const { return f_z_(z); }
  Complex f_zz(Complex z) const { return f_zz_(z); }

  const std::function<double(double)>& g_f_fn() const { return g_f_; }
  const std::function<Complex(Complex)>& f_z_fn() const { return f_z_; }
  const std::function<Complex(Complex)>& f_zz_fn() const { return f_zz_; }

  /// Compares kind and coefficients; Custom specs never compare equal.
  bool operator==(const NonlinearitySpec& other) const;

 private:
  Kind kind_ = Kind::Zero;
  PolynomialQ poly_;
  std::function<double(double)> g_f_;
  std::function<Complex(Complex)> f_z_;
  std::function<Complex(Complex)> f_zz_;
};

/// Cost W(z, z*) = c_w z z* + g_w(z + z*).
class CostSpec {
 public:
  enum class GwKind { NegSin2, Zero, Polynomial };

  /// c_w = 4, g_w(q) = -sin^2 q.
  static CostSpec josephson();
  static CostSpec make(double c_w, GwKind g_kind, std::vector<double> coeffs = {});

  bool is_josephson() const { return josephson_; }
  double c_w() const { return c_w_; }
  GwKind g_kind() const { return g_kind_; }
  const std::vector<double>& g_coeffs() const { return poly_.coeffs; }

  double g_w(double q) const;
  /// Scalar symbol with z z* replaced by |z|^2.
  double scalar(Complex z) const { return c_w_ * std::norm(z) + g_w(2.0 * z.real()); }

  bool operator==(const CostSpec&) const = default;

 private:
  bool josephson_ = false;
  double c_w_ = 0.0;
  GwKind g_kind_ = GwKind::Zero;
  PolynomialQ poly_;
};

std::string_view to_string(CostSpec::GwKind kind);

enum class KappaMode { Literal, DerivationConsistent };

std::string_view to_string(KappaMode mode);
/// Accepts "literal" and "derivation_consistent".
KappaMode kappa_mode_from_string(std::string_view s);

enum class SolveStatus { Optimal, Infeasible, NumericalFailure };

std::string_view to_string(SolveStatus status);

struct SolverDiagnostics {
  SolveStatus status = SolveStatus::NumericalFailure;
  int iterations = 0;
  double duality_gap = 0.0;
  double dual_bound = 0.0;
  std::string message;
};

/// Proof data for the cost bound at one value of tau1.
struct Certificate {
  ComplexMatrix P;
  double tau1 = 0.0;
  double kappa = 0.0;
  double zeta = 0.0;
  Complex mu{0.0, 0.0};
  double trace_term = 0.0;
  double bound = 0.0;
  double feasibility_margin = 0.0;
  KappaMode kappa_mode = KappaMode::DerivationConsistent;
  SolverDiagnostics solver;
};

}  // namespace qcert
