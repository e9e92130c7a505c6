#include "qcert/lmi.hpp"

#include <cmath>

#include "qcert/errors.hpp"

namespace qcert {

namespace {

ComplexMatrix unit(int dim, int r, int c, Complex v) {
  ComplexMatrix E = ComplexMatrix::Zero(dim, dim);
  E(r, c) = v;
  return E;
}

void check_inputs(const ComplexMatrix& P, double tau1, double kappa, const PlantModel& plant) {
  const int d = 2 * plant.n_modes();
  if (P.rows() != d || P.cols() != d) {
    throw ValidationError("dimension mismatch: P must be 2n x 2n");
  }
  if (!(tau1 > 0.0) || !std::isfinite(tau1)) throw ValidationError("tau1 must be positive");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ValidationError("kappa must be positive");
}

struct LmiParts {
  ComplexMatrix F;
  ComplexMatrix J;
  ComplexVector v;  // Sigma Et^T
};

LmiParts parts(const PlantModel& plant) {
  const DoubledMatrices d = doubled_matrices(plant);
  const int n = plant.n_modes();
  LmiParts p;
  p.F = build_F(d.M, d.N);
  p.J = build_J(n).cast<Complex>();
  p.v = build_Sigma(n).cast<Complex>() * d.E_tilde.transpose();
  return p;
}

}  // namespace

ComplexMatrix StructuredPBasis::compose(const RealVector& coords) const {
  if (coords.size() != dim()) throw ValidationError("compose: coordinate vector has wrong length");
  ComplexMatrix P = ComplexMatrix::Zero(2 * n, 2 * n);
  for (int i = 0; i < dim(); ++i) P += coords(i) * basis[static_cast<std::size_t>(i)];
  return P;
}

RealVector StructuredPBasis::decompose(const ComplexMatrix& P) const {
  if (P.rows() != 2 * n || P.cols() != 2 * n) {
    throw ValidationError("decompose: P must be 2n x 2n");
  }
  RealVector c(dim());
  for (int i = 0; i < dim(); ++i) {
    const ComplexMatrix& B = basis[static_cast<std::size_t>(i)];
    c(i) = (B.adjoint() * P).trace().real() / B.squaredNorm();
  }
  return c;
}

StructuredPBasis p_basis(int n) {
  if (n < 1) throw ValidationError("p_basis: n must be >= 1");
  StructuredPBasis b;
  b.n = n;
  const int d = 2 * n;
  const Complex one(1.0, 0.0);
  // P1 diagonal.
  for (int i = 0; i < n; ++i) b.basis.push_back(unit(d, i, i, one) + unit(d, n + i, n + i, one));
  // P1 off-diagonal, real and imaginary parts.
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      b.basis.push_back(unit(d, i, j, one) + unit(d, j, i, one) + unit(d, n + i, n + j, one) +
                        unit(d, n + j, n + i, one));
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      b.basis.push_back(unit(d, i, j, kI) + unit(d, j, i, -kI) + unit(d, n + i, n + j, -kI) +
                        unit(d, n + j, n + i, kI));
    }
  }
  // P2 (symmetric), real and imaginary parts; the lower-left block is P2#.
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      ComplexMatrix B = unit(d, i, n + j, one) + unit(d, n + j, i, one);
      if (i != j) B += unit(d, j, n + i, one) + unit(d, n + i, j, one);
      b.basis.push_back(B);
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      ComplexMatrix B = unit(d, i, n + j, kI) + unit(d, n + j, i, -kI);
      if (i != j) B += unit(d, j, n + i, kI) + unit(d, n + i, j, -kI);
      b.basis.push_back(B);
    }
  }
  return b;
}

bool is_structured(const ComplexMatrix& P, double tol) {
  if (P.rows() != P.cols() || P.rows() % 2 != 0) return false;
  const int n = static_cast<int>(P.rows() / 2);
  const ComplexMatrix S = build_Sigma(n).cast<Complex>();
  const double scale = std::max(1.0, P.cwiseAbs().maxCoeff());
  return is_hermitian(P, tol) &&
         (P - S * P.conjugate() * S).cwiseAbs().maxCoeff() <= tol * scale;
}

ComplexMatrix assemble_lmi(const ComplexMatrix& P, double tau1, double kappa,
                           const PlantModel& plant) {
  check_inputs(P, tau1, kappa, plant);
  const LmiParts p = parts(plant);
  const auto d = P.rows();
  ComplexMatrix out(d + 1, d + 1);
  out.topLeftCorner(d, d) = p.F.adjoint() * P + P * p.F + kappa * p.v * p.v.adjoint();
  const ComplexVector off = 2.0 * P * p.J * p.v;
  out.topRightCorner(d, 1) = off;
  out.bottomLeftCorner(1, d) = off.adjoint();
  out(d, d) = Complex(-1.0 / (tau1 * tau1), 0.0);
  return out;
}

ComplexMatrix assemble_qmi(const ComplexMatrix& P, double tau1, double kappa,
                           const PlantModel& plant) {
  check_inputs(P, tau1, kappa, plant);
  const LmiParts p = parts(plant);
  const ComplexVector w = P * p.J * p.v;
  return p.F.adjoint() * P + P * p.F + 4.0 * tau1 * tau1 * w * w.adjoint() +
         kappa * p.v * p.v.adjoint();
}

ComplexMatrix trace_weight(const PlantModel& plant) {
  const DoubledMatrices d = doubled_matrices(plant);
  const int n = plant.n_modes();
  const int m = plant.m_channels();
  const ComplexMatrix J = build_J(n).cast<Complex>();
  ComplexMatrix selector = ComplexMatrix::Zero(2 * m, 2 * m);
  selector.topLeftCorner(m, m).setIdentity();
  return J * d.N.adjoint() * selector * d.N * J;
}

BoundProgram build_conic_program(const PlantModel& plant, const SectorConstants& sector,
                                 double tau1, double kappa, double zeta, double eps) {
  sector.validate();
  if (!(eps > 0.0)) throw ValidationError("eps must be positive");
  if (!(tau1 > 0.0)) throw ValidationError("tau1 must be positive");

  BoundProgram bp;
  bp.basis = p_basis(plant.n_modes());
  bp.tau1 = tau1;
  bp.kappa = kappa;
  bp.zeta = zeta;
  bp.eps = eps;

  const int d = bp.basis.dim();
  const int dim_p = 2 * plant.n_modes();
  ConicProblem& cp = bp.conic;
  cp.num_vars = d + 1;
  cp.objective = RealVector::Zero(d + 1);
  cp.objective_offset = zeta;

  const ComplexMatrix W = trace_weight(plant);
  for (int i = 0; i < d; ++i) {
    cp.objective(i) = (bp.basis.basis[static_cast<std::size_t>(i)] * W).trace().real();
  }
  cp.objective(d) = std::sqrt(sector.delta3);

  const ComplexMatrix zeroP = ComplexMatrix::Zero(dim_p, dim_p);
  const ComplexMatrix lmi0 = assemble_lmi(zeroP, tau1, kappa, plant);
  const auto dl = lmi0.rows();

  AffineHermitianBlock lmi{"lmi", -lmi0 - eps * ComplexMatrix::Identity(dl, dl), {}};
  AffineHermitianBlock pos{"p_positive", -eps * ComplexMatrix::Identity(dim_p, dim_p), {}};
  AffineHermitianBlock slack{"mu_slack", ComplexMatrix::Zero(2, 2), {}};

  const DoubledMatrices dm = doubled_matrices(plant);
  const ComplexMatrix SJ = build_Sigma(plant.n_modes()).cast<Complex>() *
                           build_J(plant.n_modes()).cast<Complex>();
  const ComplexMatrix JEt = build_J(plant.n_modes()).cast<Complex>() * dm.E_tilde.transpose();

  for (int i = 0; i < d; ++i) {
    const ComplexMatrix& B = bp.basis.basis[static_cast<std::size_t>(i)];
    lmi.coefficients.push_back(-(assemble_lmi(B, tau1, kappa, plant) - lmi0));
    pos.coefficients.push_back(B);
    const Complex mu_i = -(dm.E_tilde * SJ * B * JEt)(0, 0);
    ComplexMatrix S = ComplexMatrix::Zero(2, 2);
    S(0, 1) = mu_i;
    S(1, 0) = std::conj(mu_i);
    slack.coefficients.push_back(S);
  }
  lmi.coefficients.push_back(ComplexMatrix::Zero(dl, dl));
  pos.coefficients.push_back(ComplexMatrix::Zero(dim_p, dim_p));
  slack.coefficients.push_back(ComplexMatrix::Identity(2, 2));

  cp.blocks = {std::move(lmi), std::move(pos), std::move(slack)};
  return bp;
}

}  // namespace qcert
