#include "qcert/model.hpp"

#include <cmath>
#include <sstream>

#include "qcert/errors.hpp"

namespace qcert {

namespace {

bool same_matrix(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
}

std::string dims(const ComplexMatrix& a) {
  std::ostringstream os;
  os << a.rows() << "x" << a.cols();
  return os.str();
}

void require_shape(const ComplexMatrix& a, Eigen::Index rows, Eigen::Index cols,
                   const char* name) {
  if (a.rows() != rows || a.cols() != cols) {
    std::ostringstream os;
    os << "dimension mismatch: " << name << " is " << dims(a) << ", expected " << rows << "x"
       << cols;
    throw ValidationError(os.str());
  }
}

}  // namespace

bool PlantModel::operator==(const PlantModel& o) const {
  return n_ == o.n_ && m_ == o.m_ && block_structured_ == o.block_structured_ &&
         same_matrix(M_, o.M_) && same_matrix(N1_, o.N1_) && same_matrix(N2_, o.N2_) &&
         same_matrix(E1_, o.E1_) && same_matrix(E2_, o.E2_);
}

PlantModel validate_plant(const RawPlant& raw, const PlantValidationOptions& opts) {
  const bool has_blocks = raw.M1.has_value() || raw.M2.has_value();
  const bool has_full = raw.M.has_value();
  if (has_blocks == has_full) {
    throw ValidationError("plant must give either M1 and M2, or the full doubled M");
  }
  if (has_blocks && !(raw.M1 && raw.M2)) {
    throw ValidationError("plant must give both M1 and M2");
  }

  int n = 0;
  if (has_blocks) {
    n = static_cast<int>(raw.M1->rows());
  } else {
    if (raw.M->rows() % 2 != 0) throw ValidationError("dimension mismatch: M must be 2n x 2n");
    n = static_cast<int>(raw.M->rows() / 2);
  }
  if (raw.n_modes && *raw.n_modes != n) {
    throw ValidationError("dimension mismatch: n_modes does not match M");
  }
  if (n < 1) throw ValidationError("n_modes must be positive");
  const int m = static_cast<int>(raw.N1.rows());
  if (raw.m_channels && *raw.m_channels != m) {
    throw ValidationError("dimension mismatch: m_channels does not match N1");
  }
  if (m < 1) throw ValidationError("m_channels must be positive");

  require_shape(raw.N1, m, n, "N1");
  require_shape(raw.N2, m, n, "N2");
  require_shape(raw.E1, 1, n, "E1");
  require_shape(raw.E2, 1, n, "E2");

  PlantModel p;
  p.n_ = n;
  p.m_ = m;
  p.N1_ = raw.N1;
  p.N2_ = raw.N2;
  p.E1_ = raw.E1;
  p.E2_ = raw.E2;

  if (has_blocks) {
    require_shape(*raw.M1, n, n, "M1");
    require_shape(*raw.M2, n, n, "M2");
    ComplexMatrix M1 = *raw.M1;
    ComplexMatrix M2 = *raw.M2;
    if (opts.symmetrize) {
      M1 = 0.5 * (M1 + M1.adjoint()).eval();
      M2 = 0.5 * (M2 + M2.transpose()).eval();
    }
    if (!is_hermitian(M1)) throw ValidationError("M1 not Hermitian");
    if (!is_symmetric(M2)) throw ValidationError("M2 not symmetric");
    p.M_.resize(2 * n, 2 * n);
    p.M_ << M1, M2, M2.conjugate(), M1.conjugate();
    p.block_structured_ = true;
  } else {
    require_shape(*raw.M, 2 * n, 2 * n, "M");
    ComplexMatrix M = *raw.M;
    if (opts.symmetrize) M = 0.5 * (M + M.adjoint()).eval();
    if (!is_hermitian(M)) throw ValidationError("M not Hermitian");
    p.M_ = M;
    const ComplexMatrix M1 = M.topLeftCorner(n, n);
    const ComplexMatrix M2 = M.topRightCorner(n, n);
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    p.block_structured_ =
        is_symmetric(M2) &&
        (M.bottomLeftCorner(n, n) - M2.conjugate()).cwiseAbs().maxCoeff() <= 1e-12 * scale &&
        (M.bottomRightCorner(n, n) - M1.conjugate()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
  }

  if (!opts.allow_zero_z && raw.E1.cwiseAbs().maxCoeff() == 0.0 && raw.E2.cwiseAbs().maxCoeff() == 0.0) {
    throw ValidationError("E1 and E2 are both zero: z must be a nontrivial operator");
  }
  return p;
}

DoubledMatrices doubled_matrices(const PlantModel& plant) {
  const int n = plant.n_modes();
  const int m = plant.m_channels();
  DoubledMatrices d;
  d.M = plant.M();
  d.N.resize(2 * m, 2 * n);
  d.N << plant.N1(), plant.N2(), plant.N2().conjugate(), plant.N1().conjugate();
  d.E_tilde.resize(1, 2 * n);
  d.E_tilde << plant.E1(), plant.E2();
  return d;
}

void SectorConstants::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ValidationError(std::string(name) + " must be positive");
    }
  };
  auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ValidationError(std::string(name) + " must be non-negative");
    }
  };
  positive(gamma0, "gamma0");
  positive(gamma1, "gamma1");
  positive(gamma2, "gamma2");
  nonneg(delta0, "delta0");
  nonneg(delta1, "delta1");
  nonneg(delta2, "delta2");
  nonneg(delta3, "delta3");
}

double PolynomialQ::value(double q) const { return derivative(q, 0); }

double PolynomialQ::derivative(double q, int k) const {
  // Horner on the k-th derivative's coefficients.
  double acc = 0.0;
  for (int i = static_cast<int>(coeffs.size()) - 1; i >= k; --i) {
    double c = coeffs[static_cast<std::size_t>(i)];
    for (int j = 0; j < k; ++j) c *= static_cast<double>(i - j);
    acc = acc * q + c;
  }
  return acc;
}

NonlinearitySpec NonlinearitySpec::neg_cos_q() {
  NonlinearitySpec s;
  s.kind_ = Kind::NegCosQ;
  s.g_f_ = [](double q) { return -std::cos(q); };
  s.f_z_ = [](Complex z) { return Complex(std::sin(2.0 * z.real()), 0.0); };
  s.f_zz_ = [](Complex z) { return Complex(std::cos(2.0 * z.real()), 0.0); };
  return s;
}

NonlinearitySpec NonlinearitySpec::zero() {
  NonlinearitySpec s;
  s.kind_ = Kind::Zero;
  s.g_f_ = [](double) { return 0.0; };
  s.f_z_ = [](Complex) { return Complex(0.0, 0.0); };
  s.f_zz_ = [](Complex) { return Complex(0.0, 0.0); };
  return s;
}

NonlinearitySpec NonlinearitySpec::polynomial_q(std::vector<double> coeffs) {
  NonlinearitySpec s;
  s.kind_ = Kind::PolynomialQ;
  s.poly_.coeffs = std::move(coeffs);
  const PolynomialQ p = s.poly_;
  s.g_f_ = [p](double q) { return p.value(q); };
  s.f_z_ = [p](Complex z) { return Complex(p.derivative(2.0 * z.real(), 1), 0.0); };
  s.f_zz_ = [p](Complex z) { return Complex(p.derivative(2.0 * z.real(), 2), 0.0); };
  return s;
}

NonlinearitySpec NonlinearitySpec::custom(std::function<double(double)> g_f,
                                          std::function<Complex(Complex)> f_z,
                                          std::function<Complex(Complex)> f_zz) {
  NonlinearitySpec s;
  s.kind_ = Kind::Custom;
  s.g_f_ = std::move(g_f);
  s.f_z_ = std::move(f_z);
  s.f_zz_ = std::move(f_zz);
  return s;
}

NonlinearitySpec NonlinearitySpec::from_tag(std::string_view tag) {
  if (tag == "neg_cos_q") return neg_cos_q();
  if (tag == "zero") return zero();
  throw ConfigError("unknown nonlinearity tag '" + std::string(tag) + "'");
}

std::string NonlinearitySpec::tag() const {
  switch (kind_) {
    case Kind::NegCosQ:
      return "neg_cos_q";
    case Kind::Zero:
      return "zero";
    case Kind::PolynomialQ:
      return "polynomial_q";
    case Kind::Custom:
      return "custom";
  }
  return "custom";
}

bool NonlinearitySpec::operator==(const NonlinearitySpec& other) const {
  if (kind_ == Kind::Custom || other.kind_ == Kind::Custom) return false;
  return kind_ == other.kind_ && poly_ == other.poly_;
}

CostSpec CostSpec::josephson() {
  CostSpec c = make(4.0, GwKind::NegSin2);
  c.josephson_ = true;
  return c;
}

CostSpec CostSpec::make(double c_w, GwKind g_kind, std::vector<double> coeffs) {
  if (!(c_w >= 0.0) || !std::isfinite(c_w)) throw ValidationError("c_w must be non-negative");
  CostSpec c;
  c.c_w_ = c_w;
  c.g_kind_ = g_kind;
  if (g_kind == GwKind::Polynomial) c.poly_.coeffs = std::move(coeffs);
  return c;
}

double CostSpec::g_w(double q) const {
  switch (g_kind_) {
    case GwKind::NegSin2: {
      const double s = std::sin(q);
      return -s * s;
    }
    case GwKind::Zero:
      return 0.0;
    case GwKind::Polynomial:
      return poly_.value(q);
  }
  return 0.0;
}

std::string_view to_string(CostSpec::GwKind kind) {
  switch (kind) {
    case CostSpec::GwKind::NegSin2:
      return "neg_sin2";
    case CostSpec::GwKind::Zero:
      return "zero";
    case CostSpec::GwKind::Polynomial:
      return "polynomial";
  }
  return "zero";
}

std::string_view to_string(KappaMode mode) {
  return mode == KappaMode::Literal ? "literal" : "derivation_consistent";
}

KappaMode kappa_mode_from_string(std::string_view s) {
  if (s == "literal") return KappaMode::Literal;
  if (s == "derivation_consistent") return KappaMode::DerivationConsistent;
  throw ConfigError("kappa_mode must be \"literal\" or \"derivation_consistent\", got \"" +
                    std::string(s) + "\"");
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::Infeasible:
      return "infeasible";
    case SolveStatus::NumericalFailure:
      return "numerical_failure";
  }
  return "numerical_failure";
}

}  // namespace qcert
