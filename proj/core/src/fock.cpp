#include "qcert/fock.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include "qcert/analysis.hpp"
#include "qcert/errors.hpp"

namespace qcert {

FockSpace::FockSpace(int modes, int cut, int interior, int max_dimension)
    : n_modes(modes), cutoff(cut), interior_cutoff(interior), max_dim(max_dimension) {
  validate();
}

void FockSpace::validate() const {
  if (n_modes < 1) throw ValidationError("fock space: n_modes must be >= 1");
  if (interior_cutoff < 0) throw ValidationError("fock space: interior_cutoff must be >= 0");
  if (cutoff < interior_cutoff + 2) {
    throw ValidationError("fock space: cutoff must be >= interior_cutoff + 2");
  }
  double d = 1.0;
  for (int i = 0; i < n_modes; ++i) d *= cutoff + 1;
  if (d > max_dim) {
    std::ostringstream os;
    os << "fock space: dimension " << d << " exceeds the configured maximum " << max_dim;
    throw ValidationError(os.str());
  }
}

int FockSpace::dim() const {
  int d = 1;
  for (int i = 0; i < n_modes; ++i) d *= cutoff + 1;
  return d;
}

std::vector<int> FockSpace::occupations(int index) const {
  std::vector<int> occ(static_cast<std::size_t>(n_modes));
  for (int k = n_modes - 1; k >= 0; --k) {
    occ[static_cast<std::size_t>(k)] = index % (cutoff + 1);
    index /= cutoff + 1;
  }
  return occ;
}

int FockSpace::index_of(const std::vector<int>& occ) const {
  if (static_cast<int>(occ.size()) != n_modes) {
    throw ValidationError("fock state: expected one occupation number per mode");
  }
  int index = 0;
  for (int k : occ) {
    if (k < 0 || k > cutoff) throw ValidationError("fock state: occupation outside 0..cutoff");
    index = index * (cutoff + 1) + k;
  }
  return index;
}

ComplexMatrix mode_annihilator(const FockSpace& space, int mode) {
  space.validate();
  if (mode < 0 || mode >= space.n_modes) throw ValidationError("mode index out of range");
  const int levels = space.cutoff + 1;
  ComplexMatrix a = ComplexMatrix::Zero(levels, levels);
  for (int k = 0; k + 1 < levels; ++k) a(k, k + 1) = std::sqrt(static_cast<double>(k + 1));
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (int k = 0; k < space.n_modes; ++k) {
    const ComplexMatrix factor = k == mode ? a : ComplexMatrix::Identity(levels, levels);
    out = Eigen::kroneckerProduct(out, factor).eval();
  }
  return out;
}

std::vector<ComplexMatrix> mode_vector(const FockSpace& space) {
  std::vector<ComplexMatrix> xi;
  for (int k = 0; k < space.n_modes; ++k) xi.push_back(mode_annihilator(space, k));
  for (int k = 0; k < space.n_modes; ++k) xi.push_back(xi[static_cast<std::size_t>(k)].adjoint());
  return xi;
}

ComplexMatrix build_z(const FockSpace& space, const ComplexMatrix& E1, const ComplexMatrix& E2) {
  const int n = space.n_modes;
  if (E1.rows() != 1 || E1.cols() != n || E2.rows() != 1 || E2.cols() != n) {
    throw ValidationError("dimension mismatch: E1 and E2 must be 1 x n_modes");
  }
  ComplexMatrix z = ComplexMatrix::Zero(space.dim(), space.dim());
  for (int i = 0; i < n; ++i) {
    const ComplexMatrix a = mode_annihilator(space, i);
    z += E1(0, i) * a + E2(0, i) * a.adjoint();
  }
  return z;
}

ComplexMatrix build_q(const FockSpace& space, const ComplexMatrix& E1, const ComplexMatrix& E2) {
  const ComplexMatrix z = build_z(space, E1, E2);
  return z + z.adjoint();
}

ComplexMatrix quadratic_form(const FockSpace& space, const ComplexMatrix& X) {
  const int d = 2 * space.n_modes;
  if (X.rows() != d || X.cols() != d) throw ValidationError("dimension mismatch: quadratic form");
  const std::vector<ComplexMatrix> xi = mode_vector(space);
  ComplexMatrix out = ComplexMatrix::Zero(space.dim(), space.dim());
  for (int i = 0; i < d; ++i) {
    ComplexMatrix row = ComplexMatrix::Zero(space.dim(), space.dim());
    for (int j = 0; j < d; ++j) {
      if (X(i, j) != Complex(0.0, 0.0)) row += X(i, j) * xi[static_cast<std::size_t>(j)];
    }
    out += xi[static_cast<std::size_t>(i)].adjoint() * row;
  }
  return out;
}

ComplexMatrix quadratic_hamiltonian(const FockSpace& space, const ComplexMatrix& M) {
  if (!is_hermitian(M)) throw ValidationError("quadratic_hamiltonian: M not Hermitian");
  return 0.5 * quadratic_form(space, M);
}

ComplexMatrix func_of_hermitian(const ComplexMatrix& A, const std::function<double(double)>& g) {
  if (!is_hermitian(A, 1e-10)) throw ValidationError("func_of_hermitian: matrix not Hermitian");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(A);
  if (es.info() != Eigen::Success) {
    throw NumericalError("func_of_hermitian: eigendecomposition failed");
  }
  RealVector gv(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < gv.size(); ++i) gv(i) = g(es.eigenvalues()(i));
  const ComplexMatrix& U = es.eigenvectors();
  ComplexMatrix out = U * gv.cast<Complex>().asDiagonal() * U.adjoint();
  return 0.5 * (out + out.adjoint());
}

std::vector<ComplexMatrix> coupling_ops(const FockSpace& space, const ComplexMatrix& N1,
                                        const ComplexMatrix& N2) {
  const int n = space.n_modes;
  if (N1.cols() != n || N2.cols() != n || N1.rows() != N2.rows()) {
    throw ValidationError("dimension mismatch: N1 and N2 must be m x n_modes");
  }
  std::vector<ComplexMatrix> a;
  for (int i = 0; i < n; ++i) a.push_back(mode_annihilator(space, i));
  std::vector<ComplexMatrix> Ls;
  for (Eigen::Index j = 0; j < N1.rows(); ++j) {
    ComplexMatrix L = ComplexMatrix::Zero(space.dim(), space.dim());
    for (int i = 0; i < n; ++i) {
      L += N1(j, i) * a[static_cast<std::size_t>(i)] + N2(j, i) * a[static_cast<std::size_t>(i)].adjoint();
    }
    Ls.push_back(std::move(L));
  }
  return Ls;
}

ComplexMatrix interior_projector(const FockSpace& space) {
  space.validate();
  ComplexMatrix Pi = ComplexMatrix::Zero(space.dim(), space.dim());
  for (int s = 0; s < space.dim(); ++s) {
    const auto occ = space.occupations(s);
    int total = 0;
    for (int k : occ) total += k;
    if (total <= space.interior_cutoff) Pi(s, s) = 1.0;
  }
  return Pi;
}

double top_level_population(const FockSpace& space, const ComplexMatrix& rho) {
  double pop = 0.0;
  for (int s = 0; s < space.dim(); ++s) {
    const auto occ = space.occupations(s);
    if (std::find(occ.begin(), occ.end(), space.cutoff) != occ.end()) pop += rho(s, s).real();
  }
  return pop;
}

ComplexMatrix fock_state(const FockSpace& space, const std::vector<int>& occupations) {
  space.validate();
  const int idx = space.index_of(occupations);
  ComplexMatrix rho = ComplexMatrix::Zero(space.dim(), space.dim());
  rho(idx, idx) = 1.0;
  return rho;
}

ComplexMatrix vacuum_state(const FockSpace& space) {
  return fock_state(space, std::vector<int>(static_cast<std::size_t>(space.n_modes), 0));
}

LindbladIntegrator::LindbladIntegrator(const ComplexMatrix& H, const std::vector<ComplexMatrix>& Ls) {
  if (H.rows() != H.cols()) throw ValidationError("lindblad: H must be square");
  if (!is_hermitian(H, 1e-10)) throw ValidationError("lindblad: H must be Hermitian");
  ComplexMatrix K = H;
  for (const auto& L : Ls) {
    if (L.rows() != H.rows() || L.cols() != H.cols()) {
      throw ValidationError("lindblad: coupling operator dimension mismatch");
    }
    K -= 0.5 * kI * (L.adjoint() * L);
    L_.push_back(L.sparseView());
  }
  K_ = K.sparseView();
}

ComplexMatrix LindbladIntegrator::rhs(const ComplexMatrix& rho) const {
  ComplexMatrix Krho = K_ * rho;
  ComplexMatrix out = -kI * (Krho - Krho.adjoint());
  ComplexMatrix Lrho(rho.rows(), rho.cols());
  for (const auto& L : L_) {
    Lrho.noalias() = L * rho;
    // (L rho) L^dag = (L (L rho)^dag)^dag since rho is Hermitian.
    Krho.noalias() = L * Lrho.adjoint();
    out += Krho.adjoint();
  }
  return out;
}

ComplexMatrix LindbladIntegrator::step(const ComplexMatrix& rho, double dt) const {
  const ComplexMatrix k1 = rhs(rho);
  const ComplexMatrix k2 = rhs(rho + 0.5 * dt * k1);
  const ComplexMatrix k3 = rhs(rho + 0.5 * dt * k2);
  const ComplexMatrix k4 = rhs(rho + dt * k3);
  ComplexMatrix next = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  next = 0.5 * (next + next.adjoint()).eval();
  if (!next.allFinite()) throw NumericalError("lindblad_step: non-finite density matrix");
  return next;
}

ComplexMatrix lindblad_step(const ComplexMatrix& H, const std::vector<ComplexMatrix>& Ls,
                            const ComplexMatrix& rho, double dt) {
  return LindbladIntegrator(H, Ls).step(rho, dt);
}

std::string_view to_string(Ordering o) {
  return o == Ordering::AsWritten ? "as_written" : "symmetrized";
}

Ordering ordering_from_string(std::string_view s) {
  if (s == "as_written") return Ordering::AsWritten;
  if (s == "symmetrized") return Ordering::Symmetrized;
  throw ValidationError("ordering must be \"as_written\" or \"symmetrized\"");
}

void SimulationOptions::validate() const {
  FockSpace(1, cutoff, interior_cutoff, std::max(max_dim, cutoff + 1)).validate();
  if (!(t_final > 0.0) || !std::isfinite(t_final)) throw ValidationError("t_final must be positive");
  if (!(dt > 0.0) || !(dt <= t_final)) throw ValidationError("dt must be in (0, t_final]");
  if (record_every < 1) throw ValidationError("record_every must be >= 1");
  if (positivity_every < 1) throw ValidationError("positivity_every must be >= 1");
  for (int k : initial.occupations) {
    if (k < 0 || k > cutoff) throw ValidationError("initial_state occupation outside 0..cutoff");
  }
}

SystemOperators build_system(const FockSpace& space, const PlantModel& plant,
                             const NonlinearitySpec& f, const CostSpec& cost, Ordering ordering) {
  if (space.n_modes != plant.n_modes()) {
    throw ValidationError("dimension mismatch: fock space modes differ from plant");
  }
  SystemOperators ops;
  ops.z = build_z(space, plant.E1(), plant.E2());
  ops.q = ops.z + ops.z.adjoint();
  ops.H = quadratic_hamiltonian(space, plant.M());
  if (f.kind() != NonlinearitySpec::Kind::Zero) ops.H += func_of_hermitian(ops.q, f.g_f_fn());
  ops.Ls = coupling_ops(space, plant.N1(), plant.N2());
  const ComplexMatrix zz = ordering == Ordering::AsWritten
                               ? ComplexMatrix(ops.z * ops.z.adjoint())
                               : ComplexMatrix(0.5 * (ops.z * ops.z.adjoint() + ops.z.adjoint() * ops.z));
  ops.W = cost.c_w() * zz;
  if (cost.g_kind() != CostSpec::GwKind::Zero) {
    ops.W += func_of_hermitian(ops.q, [&cost](double x) { return cost.g_w(x); });
  }
  return ops;
}

namespace {

double expectation(const ComplexMatrix& A, const ComplexMatrix& rho) {
  // tr(A rho) = sum_ij A_ij rho_ji
  return (A.transpose().cwiseProduct(rho)).sum().real();
}

}  // namespace

SimulationResult simulate(const PlantModel& plant, const NonlinearitySpec& f, const CostSpec& cost,
                          const SimulationOptions& options) {
  options.validate();
  const FockSpace space(plant.n_modes(), options.cutoff, options.interior_cutoff, options.max_dim);
  const SystemOperators ops = build_system(space, plant, f, cost, options.ordering);
  const LindbladIntegrator integrator(ops.H, ops.Ls);

  ComplexMatrix rho = options.initial.occupations.empty()
                          ? vacuum_state(space)
                          : fock_state(space, options.initial.occupations);

  const auto steps = static_cast<int>(std::llround(options.t_final / options.dt));
  const double dt = options.t_final / steps;

  SimulationResult res;
  res.steps = steps;
  res.min_eigenvalue = hermitian_lambda_min(rho);
  double integral = 0.0;
  double prev_w = expectation(ops.W, rho);
  auto record = [&](int k, double w) {
    const double t = k * dt;
    const double top = top_level_population(space, rho);
    res.max_top_level_population = std::max(res.max_top_level_population, top);
    res.max_trace_drift = std::max(res.max_trace_drift, std::abs(rho.trace().real() - 1.0));
    const double avg = k == 0 ? w : integral / t;
    if (k % options.record_every == 0 || k == steps) res.series.push_back({t, w, avg, top});
    res.final_average = avg;
    res.final_expW = w;
  };
  record(0, prev_w);
  for (int k = 1; k <= steps; ++k) {
    try {
      rho = integrator.step(rho, dt);
    } catch (const NumericalError& e) {
      std::ostringstream os;
      os << e.what() << " at t = " << k * dt;
      throw NumericalError(os.str());
    }
    const double w = expectation(ops.W, rho);
    integral += 0.5 * dt * (prev_w + w);
    prev_w = w;
    if (k % options.positivity_every == 0 || k == steps) {
      res.min_eigenvalue = std::min(res.min_eigenvalue, hermitian_lambda_min(rho));
    }
    record(k, w);
  }
  res.truncation_warning = res.max_top_level_population > kTruncationLeakThreshold;
  return res;
}

double IdentityReport::max() const {
  return std::max({mu_identity, quad_hamiltonian, dissipation, xi_commutator});
}

namespace {

class InteriorResidual {
 public:
  InteriorResidual(const ComplexMatrix& Pi, const ComplexMatrix& V)
      : Pi_(Pi), v_norm_((Pi * V * Pi).norm()) {}

  double operator()(const ComplexMatrix& lhs, const ComplexMatrix& rhs) const {
    const ComplexMatrix pl = Pi_ * lhs * Pi_;
    const ComplexMatrix pr = Pi_ * rhs * Pi_;
    const double denom = std::max({pl.norm(), pr.norm(), v_norm_});
    if (denom == 0.0) return 0.0;
    return (pl - pr).norm() / denom;
  }

 private:
  const ComplexMatrix& Pi_;
  double v_norm_;
};

ComplexMatrix commutator(const ComplexMatrix& A, const ComplexMatrix& B) { return A * B - B * A; }

}  // namespace

IdentityReport commutator_identity_report(const FockSpace& space, const ComplexMatrix& P,
                                          const PlantModel& plant) {
  space.validate();
  const int n = plant.n_modes();
  if (space.n_modes != n) throw ValidationError("dimension mismatch: fock space modes differ from plant");
  if (P.rows() != 2 * n || P.cols() != 2 * n) throw ValidationError("dimension mismatch: P must be 2n x 2n");

  const DoubledMatrices d = doubled_matrices(plant);
  const int m = plant.m_channels();
  const ComplexMatrix Jn = build_J(n).cast<Complex>();
  const ComplexMatrix Jm = build_J(m).cast<Complex>();
  const ComplexMatrix Pi = interior_projector(space);
  const ComplexMatrix I = ComplexMatrix::Identity(space.dim(), space.dim());
  const std::vector<ComplexMatrix> xi = mode_vector(space);
  const ComplexMatrix V = quadratic_form(space, P);
  const InteriorResidual residual(Pi, V);

  IdentityReport rep;

  const ComplexMatrix z = build_z(space, plant.E1(), plant.E2());
  const ComplexMatrix zd = z.adjoint();
  const Complex mu_value = mu(P, d.E_tilde);
  const ComplexMatrix zzV = commutator(z, commutator(z, V));
  const ComplexMatrix zdzdV = commutator(zd, commutator(zd, V)).adjoint();
  rep.mu_identity = std::max(residual(zzV, mu_value * I), residual(zdzdV, mu_value * I));

  const ComplexMatrix Hq = quadratic_hamiltonian(space, d.M);
  rep.quad_hamiltonian =
      residual(commutator(V, Hq), quadratic_form(space, P * Jn * d.M - d.M * Jn * P));

  const std::vector<ComplexMatrix> Ls = coupling_ops(space, plant.N1(), plant.N2());
  ComplexMatrix diss = ComplexMatrix::Zero(space.dim(), space.dim());
  for (const auto& L : Ls) {
    const ComplexMatrix Ld = L.adjoint();
    diss += 0.5 * Ld * commutator(V, L) + 0.5 * commutator(Ld, V) * L;
  }
  const ComplexMatrix NJN = d.N.adjoint() * Jm * d.N;
  const ComplexMatrix diss_rhs =
      trace_term(P, d.N) * I - 0.5 * quadratic_form(space, NJN * Jn * P + P * Jn * NJN);
  rep.dissipation = residual(diss, diss_rhs);

  const ComplexMatrix JP2 = 2.0 * Jn * P;
  for (int k = 0; k < 2 * n; ++k) {
    ComplexMatrix rhs = ComplexMatrix::Zero(space.dim(), space.dim());
    for (int j = 0; j < 2 * n; ++j) rhs += JP2(k, j) * xi[static_cast<std::size_t>(j)];
    rep.xi_commutator =
        std::max(rep.xi_commutator, residual(commutator(xi[static_cast<std::size_t>(k)], V), rhs));
  }
  return rep;
}

}  // namespace qcert
