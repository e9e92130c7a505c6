#include "qcert/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "qcert/errors.hpp"

namespace qcert {

ComplexMatrix AffineHermitianBlock::evaluate(const RealVector& x) const {
  ComplexMatrix out = constant;
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    out += x(static_cast<Eigen::Index>(i)) * coefficients[i];
  }
  return out;
}

void ConicProblem::validate() const {
  if (num_vars < 1) throw ValidationError("conic problem: num_vars must be positive");
  if (objective.size() != num_vars) {
    throw ValidationError("conic problem: objective length differs from num_vars");
  }
  for (const auto& b : blocks) {
    if (b.constant.rows() != b.constant.cols() || b.constant.rows() == 0) {
      throw ValidationError("conic problem: block '" + b.name + "' is not square");
    }
    if (static_cast<int>(b.coefficients.size()) != num_vars) {
      throw ValidationError("conic problem: block '" + b.name +
                            "' has wrong number of coefficient matrices");
    }
    if (!is_hermitian(b.constant, 1e-12)) {
      throw ValidationError("conic problem: block '" + b.name + "' constant is not Hermitian");
    }
    for (const auto& c : b.coefficients) {
      if (c.rows() != b.constant.rows() || c.cols() != b.constant.cols()) {
        throw ValidationError("conic problem: block '" + b.name + "' coefficient size mismatch");
      }
      if (!is_hermitian(c, 1e-12)) {
        throw ValidationError("conic problem: block '" + b.name +
                              "' coefficient is not Hermitian");
      }
    }
  }
}

namespace {

/// Real symmetric block S(x) = constant + sum_i x_i coefficients[i].
struct RealBlock {
  RealMatrix constant;
  std::vector<RealMatrix> coefficients;

  RealMatrix value(const RealVector& x) const {
    RealMatrix S = constant;
    for (std::size_t i = 0; i < coefficients.size(); ++i) {
      const double xi = x(static_cast<Eigen::Index>(i));
      if (xi != 0.0) S.noalias() += xi * coefficients[i];
    }
    return S;
  }
};

/// minimize cost . x subject to S_k(x) >= 0 for every block.
struct RealSdp {
  int num_vars = 0;
  RealVector cost;
  std::vector<RealBlock> blocks;

  double degree() const {
    double m = 0.0;
    for (const auto& b : blocks) m += static_cast<double>(b.constant.rows());
    return m;
  }
};

std::vector<RealBlock> embed_blocks(const ConicProblem& problem) {
  std::vector<RealBlock> out;
  out.reserve(problem.blocks.size());
  for (const auto& b : problem.blocks) {
    RealBlock rb;
    rb.constant = real_embedding(b.constant);
    for (const auto& c : b.coefficients) rb.coefficients.push_back(real_embedding(c));
    out.push_back(std::move(rb));
  }
  return out;
}

/// Appends the 1 x 1 blocks R - x_i >= 0 and R + x_i >= 0 for i < num_boxed.
void add_box(RealSdp& p, int num_boxed, double radius) {
  for (int i = 0; i < num_boxed; ++i) {
    for (const double sign : {-1.0, 1.0}) {
      RealBlock b;
      b.constant = RealMatrix::Constant(1, 1, radius);
      b.coefficients.assign(static_cast<std::size_t>(p.num_vars), RealMatrix::Zero(1, 1));
      b.coefficients[static_cast<std::size_t>(i)](0, 0) = sign;
      p.blocks.push_back(std::move(b));
    }
  }
}

std::optional<Eigen::LLT<RealMatrix>> cholesky(const RealMatrix& A) {
  Eigen::LLT<RealMatrix> llt(A);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const RealVector d = llt.matrixLLT().diagonal();
  if (!d.allFinite() || !(d.minCoeff() > 0.0)) return std::nullopt;
  return llt;
}

/// Largest alpha with A + alpha D >= 0, given the Cholesky factor of A.
double max_step(const Eigen::LLT<RealMatrix>& llt, const RealMatrix& D) {
  const auto L = llt.matrixL();
  RealMatrix Y = L.solve(D);
  RealMatrix W = L.solve(Y.transpose());
  W = 0.5 * (W + W.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(W, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  return lo < 0.0 ? -1.0 / lo : std::numeric_limits<double>::infinity();
}

double inner(const RealMatrix& A, const RealMatrix& B) { return (A.array() * B.array()).sum(); }

struct PdState {
  RealVector x;
  std::vector<RealMatrix> Z;
  int iterations = 0;
};

struct PdMeasures {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;         // sum_k <S_k, Z_k>
  double residual = 0.0;    // max_i |c_i - sum_k <A_ki, Z_k>|
};

PdMeasures measure(const RealSdp& p, const PdState& st) {
  PdMeasures m;
  m.primal = p.cost.dot(st.x);
  RealVector rd = p.cost;
  for (std::size_t k = 0; k < p.blocks.size(); ++k) {
    const RealBlock& b = p.blocks[k];
    m.dual -= inner(b.constant, st.Z[k]);
    m.gap += inner(b.value(st.x), st.Z[k]);
    for (int i = 0; i < p.num_vars; ++i) rd(i) -= inner(b.coefficients[static_cast<std::size_t>(i)], st.Z[k]);
  }
  m.residual = rd.cwiseAbs().maxCoeff();
  return m;
}

enum class PdOutcome { Converged, Stopped, IterationLimit, Stalled };

/// Primal-dual path following with the HKM direction and a Mehrotra
/// predictor-corrector step. The primal iterate stays strictly feasible; the
/// dual may start infeasible. `stop(x, measures)` is consulted after every
/// step and ends the run when it returns true.
template <typename StopFn>
PdOutcome pd_run(const RealSdp& p, PdState& st, double tol, int max_total_iter, StopFn stop) {
  constexpr double kStepFraction = 0.98;
  const int nv = p.num_vars;
  const std::size_t nb = p.blocks.size();
  const double m = p.degree();
  const double cscale = 1.0 + p.cost.cwiseAbs().maxCoeff();

  for (;;) {
    std::vector<RealMatrix> S(nb);
    std::vector<Eigen::LLT<RealMatrix>> Sf(nb);
    for (std::size_t k = 0; k < nb; ++k) {
      S[k] = p.blocks[k].value(st.x);
      auto f = cholesky(S[k]);
      if (!f) return PdOutcome::Stalled;
      Sf[k] = std::move(*f);
    }
    const PdMeasures pm = measure(p, st);
    if (stop(st.x, pm)) return PdOutcome::Stopped;
    if (pm.gap <= tol * std::max(1.0, std::abs(pm.primal)) && pm.residual <= tol * cscale) {
      return PdOutcome::Converged;
    }
    if (st.iterations >= max_total_iter) return PdOutcome::IterationLimit;

    const double mu = pm.gap / m;
    RealVector rd = p.cost;
    std::vector<RealMatrix> Sinv(nb);
    // SAZ[k][j] = S^{-1} A_kj Z.
    std::vector<std::vector<RealMatrix>> SAZ(nb);
    for (std::size_t k = 0; k < nb; ++k) {
      const auto n = S[k].rows();
      Sinv[k] = Sf[k].solve(RealMatrix::Identity(n, n));
      Sinv[k] = 0.5 * (Sinv[k] + Sinv[k].transpose()).eval();
      SAZ[k].resize(static_cast<std::size_t>(nv));
      for (int j = 0; j < nv; ++j) {
        const RealMatrix& A = p.blocks[k].coefficients[static_cast<std::size_t>(j)];
        rd(j) -= inner(A, st.Z[k]);
        SAZ[k][static_cast<std::size_t>(j)] = Sinv[k] * A * st.Z[k];
      }
    }
    RealMatrix H = RealMatrix::Zero(nv, nv);
    for (std::size_t k = 0; k < nb; ++k) {
      for (int i = 0; i < nv; ++i) {
        const RealMatrix& Ai = p.blocks[k].coefficients[static_cast<std::size_t>(i)];
        for (int j = 0; j <= i; ++j) H(i, j) += inner(Ai, SAZ[k][static_cast<std::size_t>(j)]);
      }
    }
    H = H.selfadjointView<Eigen::Lower>();
    Eigen::LDLT<RealMatrix> Hf(H);
    if (Hf.info() != Eigen::Success) return PdOutcome::Stalled;

    // Direction for complementarity target sigma*mu with an optional
    // second-order term S^{-1} dS_a dZ_a.
    struct Direction {
      RealVector dx;
      std::vector<RealMatrix> dS, dZ;
      double ap = 0.0, ad = 0.0;
    };
    auto direction = [&](double sigma, const std::vector<RealMatrix>* corr) {
      Direction d;
      std::vector<RealMatrix> T(nb);  // sigma mu S^{-1} - Z - S^{-1} corr
      RealVector rhs = -rd;
      for (std::size_t k = 0; k < nb; ++k) {
        T[k] = sigma * mu * Sinv[k] - st.Z[k];
        if (corr) T[k] -= Sinv[k] * (*corr)[k];
        for (int i = 0; i < nv; ++i) {
          rhs(i) += inner(p.blocks[k].coefficients[static_cast<std::size_t>(i)], T[k]);
        }
      }
      d.dx = Hf.solve(rhs);
      d.dS.resize(nb);
      d.dZ.resize(nb);
      d.ap = d.ad = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < nb; ++k) {
        const auto n = S[k].rows();
        d.dS[k] = RealMatrix::Zero(n, n);
        RealMatrix dZ = T[k];
        for (int j = 0; j < nv; ++j) {
          d.dS[k].noalias() += d.dx(j) * p.blocks[k].coefficients[static_cast<std::size_t>(j)];
          dZ.noalias() -= d.dx(j) * SAZ[k][static_cast<std::size_t>(j)];
        }
        d.dZ[k] = 0.5 * (dZ + dZ.transpose());
        d.ap = std::min(d.ap, max_step(Sf[k], d.dS[k]));
      }
      for (std::size_t k = 0; k < nb; ++k) {
        auto zf = cholesky(st.Z[k]);
        d.ad = zf ? std::min(d.ad, max_step(*zf, d.dZ[k])) : 0.0;
      }
      return d;
    };

    const Direction aff = direction(0.0, nullptr);
    if (!aff.dx.allFinite()) return PdOutcome::Stalled;
    const double ap_a = std::min(1.0, aff.ap);
    const double ad_a = std::min(1.0, aff.ad);
    double gap_aff = 0.0;
    std::vector<RealMatrix> corr(nb);
    for (std::size_t k = 0; k < nb; ++k) {
      gap_aff += inner(S[k] + ap_a * aff.dS[k], st.Z[k] + ad_a * aff.dZ[k]);
      corr[k] = aff.dS[k] * aff.dZ[k];
    }
    const double ratio = std::clamp(gap_aff / pm.gap, 0.0, 1.0);
    const double sigma = ratio * ratio * ratio;
    Direction d = direction(sigma, &corr);
    if (!d.dx.allFinite()) return PdOutcome::Stalled;
    const double ap = std::min(1.0, kStepFraction * d.ap);
    const double ad = std::min(1.0, kStepFraction * d.ad);
    if (!(ap > 0.0) && !(ad > 0.0)) return PdOutcome::Stalled;
    st.x += ap * d.dx;
    for (std::size_t k = 0; k < nb; ++k) st.Z[k] += ad * d.dZ[k];
    ++st.iterations;
  }
}

std::vector<RealMatrix> identity_duals(const RealSdp& p) {
  std::vector<RealMatrix> Z;
  for (const auto& b : p.blocks) Z.push_back(RealMatrix::Identity(b.constant.rows(), b.constant.cols()));
  return Z;
}

double min_block_eigenvalue(const ConicProblem& problem, const RealVector& x) {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& b : problem.blocks) lo = std::min(lo, hermitian_lambda_min(b.evaluate(x)));
  return lo;
}

bool strictly_feasible(const std::vector<RealBlock>& blocks, const RealVector& x) {
  for (const auto& b : blocks) {
    if (!cholesky(b.value(x))) return false;
  }
  return true;
}

}  // namespace

SolveResult solve(const ConicProblem& problem, const SolverOptions& options) {
  problem.validate();
  if (!(options.tol > 0.0)) throw ValidationError("solver: tol must be positive");
  if (options.max_iter < 1) throw ValidationError("solver: max_iter must be positive");
  if (!(options.box_radius > 0.0)) throw ValidationError("solver: box_radius must be positive");

  const int nv = problem.num_vars;
  const std::vector<RealBlock> blocks = embed_blocks(problem);

  SolveResult result;
  result.x = RealVector::Zero(nv);
  RealVector x0 = RealVector::Zero(nv);

  // Phase I: minimise s subject to S_k(x) + s I >= 0, stopping as soon as
  // s < 0. A dual point with positive objective proves min s > 0.
  if (!strictly_feasible(blocks, x0)) {
    RealSdp p1;
    p1.num_vars = nv + 1;
    p1.cost = RealVector::Zero(nv + 1);
    p1.cost(nv) = 1.0;
    double worst = 0.0;
    for (const auto& b : blocks) {
      RealBlock rb = b;
      rb.coefficients.push_back(RealMatrix::Identity(b.constant.rows(), b.constant.cols()));
      Eigen::SelfAdjointEigenSolver<RealMatrix> es(b.constant, Eigen::EigenvaluesOnly);
      worst = std::max(worst, -es.eigenvalues().minCoeff());
      p1.blocks.push_back(std::move(rb));
    }
    add_box(p1, nv, options.box_radius);
    PdState s1;
    s1.x = RealVector::Zero(nv + 1);
    s1.x(nv) = worst + 1.0;
    s1.Z = identity_duals(p1);
    bool certified_infeasible = false;
    auto stop = [&](const RealVector& y, const PdMeasures& m) {
      if (y(nv) < 0.0) return true;
      if (m.residual <= 1e-9 && m.dual > 0.0) {
        certified_infeasible = true;
        return true;
      }
      return false;
    };
    const PdOutcome oc = pd_run(p1, s1, options.tol, options.max_iter, stop);
    result.iterations = s1.iterations;
    const double s = s1.x(nv);
    if (s < 0.0) {
      x0 = s1.x.head(nv);
    } else {
      result.x = s1.x.head(nv);
      result.objective_value = problem.evaluate_objective(result.x);
      result.min_block_eigenvalue = min_block_eigenvalue(problem, result.x);
      std::ostringstream os;
      if (certified_infeasible || oc == PdOutcome::Converged) {
        result.status = SolveStatus::Infeasible;
        os << "no strictly feasible point: phase-I value s = " << s << " >= 0";
        if (certified_infeasible) os << ", dual certificate " << measure(p1, s1).dual << " > 0";
      } else {
        result.status = SolveStatus::NumericalFailure;
        os << (oc == PdOutcome::IterationLimit ? "phase I hit the iteration limit"
                                               : "phase I stalled")
           << "; last s = " << s;
      }
      result.message = os.str();
      return result;
    }
  }

  // Phase II from the strictly feasible x0.
  RealSdp p2;
  p2.num_vars = nv;
  p2.cost = problem.objective;
  p2.blocks = blocks;
  add_box(p2, nv, options.box_radius);
  PdState s2;
  s2.x = x0;
  s2.Z = identity_duals(p2);
  s2.iterations = result.iterations;
  auto never = [](const RealVector&, const PdMeasures&) { return false; };
  const PdOutcome oc = pd_run(p2, s2, options.tol, options.max_iter, never);

  const PdMeasures pm = measure(p2, s2);
  result.x = s2.x;
  result.iterations = s2.iterations;
  result.objective_value = problem.evaluate_objective(s2.x);
  result.dual_bound = pm.dual + problem.objective_offset;
  result.dual_residual = pm.residual;
  result.duality_gap = result.objective_value - result.dual_bound;
  result.min_block_eigenvalue = min_block_eigenvalue(problem, s2.x);

  for (int i = 0; i < nv; ++i) {
    if (problem.objective(i) != 0.0 && std::abs(s2.x(i)) > 0.5 * options.box_radius) {
      result.status = SolveStatus::NumericalFailure;
      result.message = "objective appears unbounded: variable " + std::to_string(i) +
                       " reached the internal box";
      return result;
    }
  }
  if (oc == PdOutcome::Converged) {
    result.status = SolveStatus::Optimal;
  } else {
    std::ostringstream os;
    os << (oc == PdOutcome::IterationLimit ? "iteration limit reached" : "path following stalled")
       << "; gap " << pm.gap << ", dual residual " << pm.residual;
    result.status = SolveStatus::NumericalFailure;
    result.message = os.str();
  }
  return result;
}

}  // namespace qcert
