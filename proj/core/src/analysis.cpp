#include "qcert/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>

#include "qcert/errors.hpp"

namespace qcert {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string(name) + " must be positive");
}

void require_nonnegative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw ValidationError(std::string(name) + " must be non-negative");
  }
}

std::string failure_text(double tau1, const SolverDiagnostics& d) {
  std::ostringstream os;
  os << "solver failed at tau1 = " << tau1 << " after " << d.iterations
     << " iterations: " << d.message;
  return os.str();
}

SolverDiagnostics diagnostics_of(const SolveResult& r) {
  SolverDiagnostics d;
  d.status = r.status;
  d.iterations = r.iterations;
  d.duality_gap = r.duality_gap;
  d.dual_bound = r.dual_bound;
  d.message = r.message;
  return d;
}

}  // namespace

double kappa(double tau1, double gamma0, double gamma1, double gamma2, KappaMode mode) {
  require_positive(tau1, "tau1");
  require_positive(gamma0, "gamma0");
  require_positive(gamma1, "gamma1");
  require_positive(gamma2, "gamma2");
  const double t2 = tau1 * tau1;
  if (t2 <= 1.0) {
    const double excess = 1.0 / t2 - 1.0;
    const double weight = mode == KappaMode::Literal ? 1.0 : 1.0 / (gamma2 * gamma2);
    return 1.0 / (gamma1 * gamma1) + excess * weight;
  }
  return 1.0 / (t2 * gamma1 * gamma1) + (1.0 - 1.0 / t2) / (gamma0 * gamma0);
}

double kappa(double tau1, const SectorConstants& s, KappaMode mode) {
  return kappa(tau1, s.gamma0, s.gamma1, s.gamma2, mode);
}

double zeta(double tau1, double delta0, double delta1, double delta2) {
  require_positive(tau1, "tau1");
  require_nonnegative(delta0, "delta0");
  require_nonnegative(delta1, "delta1");
  require_nonnegative(delta2, "delta2");
  const double t2 = tau1 * tau1;
  if (t2 <= 1.0) return delta1 + (1.0 / t2 - 1.0) * delta2;
  return delta1 / t2 + (1.0 - 1.0 / t2) * delta0;
}

double zeta(double tau1, const SectorConstants& s) {
  return zeta(tau1, s.delta0, s.delta1, s.delta2);
}

Complex mu(const ComplexMatrix& P, const ComplexMatrix& E_tilde) {
  if (P.rows() != P.cols() || P.rows() % 2 != 0 || E_tilde.rows() != 1 ||
      E_tilde.cols() != P.rows()) {
    throw ValidationError("dimension mismatch: mu needs P 2n x 2n and E_tilde 1 x 2n");
  }
  const int n = static_cast<int>(P.rows() / 2);
  const ComplexMatrix J = build_J(n).cast<Complex>();
  const ComplexMatrix S = build_Sigma(n).cast<Complex>();
  return -(E_tilde * S * J * P * J * E_tilde.transpose())(0, 0);
}

double trace_term(const ComplexMatrix& P, const ComplexMatrix& N) {
  if (P.rows() != P.cols() || P.rows() % 2 != 0 || N.cols() != P.rows() || N.rows() % 2 != 0) {
    throw ValidationError("dimension mismatch: trace_term needs P 2n x 2n and N 2m x 2n");
  }
  const int n = static_cast<int>(P.rows() / 2);
  const int m = static_cast<int>(N.rows() / 2);
  const ComplexMatrix J = build_J(n).cast<Complex>();
  ComplexMatrix selector = ComplexMatrix::Zero(2 * m, 2 * m);
  selector.topLeftCorner(m, m).setIdentity();
  const Complex tr = (P * J * N.adjoint() * selector * N * J).trace();
  if (std::abs(tr.imag()) > 1e-12 * std::max(1.0, std::abs(tr.real()))) {
    throw NumericalError("trace_term: imaginary residue too large (P not Hermitian?)");
  }
  return tr.real();
}

double bound_from(const ComplexMatrix& P, double tau1, const PlantModel& plant,
                  const SectorConstants& sector) {
  sector.validate();
  const DoubledMatrices d = doubled_matrices(plant);
  return trace_term(P, d.N) + zeta(tau1, sector) + std::sqrt(sector.delta3) * std::abs(mu(P, d.E_tilde));
}

SolverFailure::SolverFailure(double tau1, SolverDiagnostics diag)
    : std::runtime_error(failure_text(tau1, diag)), tau1_(tau1), diag_(std::move(diag)) {}

Certificate make_certificate(const ComplexMatrix& P, double tau1, const PlantModel& plant,
                             const SectorConstants& sector, KappaMode mode) {
  sector.validate();
  const DoubledMatrices d = doubled_matrices(plant);
  Certificate c;
  c.P = P;
  c.tau1 = tau1;
  c.kappa_mode = mode;
  c.kappa = kappa(tau1, sector, mode);
  c.zeta = zeta(tau1, sector);
  c.mu = mu(P, d.E_tilde);
  c.trace_term = trace_term(P, d.N);
  c.bound = c.trace_term + c.zeta + std::sqrt(sector.delta3) * std::abs(c.mu);
  c.feasibility_margin = -hermitian_lambda_max(assemble_lmi(P, tau1, c.kappa, plant));
  return c;
}

CertifyOutcome certify_fixed_tau(double tau1, const PlantModel& plant,
                                 const SectorConstants& sector, const CertifyOptions& options) {
  require_positive(tau1, "tau1");
  const double k = kappa(tau1, sector, options.kappa_mode);
  const double z = zeta(tau1, sector);
  const BoundProgram bp = build_conic_program(plant, sector, tau1, k, z, options.eps);
  const SolveResult r = solve(bp.conic, options.solver);
  SolverDiagnostics diag = diagnostics_of(r);
  if (r.status == SolveStatus::Infeasible) return Infeasible{tau1, diag};
  if (r.status != SolveStatus::Optimal) throw SolverFailure(tau1, diag);

  Certificate c = make_certificate(bp.P_of(r.x), tau1, plant, sector, options.kappa_mode);
  c.solver = diag;
  if (!(c.feasibility_margin > 0.0)) {
    diag.status = SolveStatus::NumericalFailure;
    diag.message = "returned P does not satisfy the strict LMI";
    throw SolverFailure(tau1, diag);
  }
  return c;
}

void SearchConfig::validate() const {
  if (!(grid_min > 0.0) || !std::isfinite(grid_min)) {
    throw ValidationError("tau1 search grid_min must be positive");
  }
  if (!(grid_max >= grid_min) || !std::isfinite(grid_max)) {
    throw ValidationError("tau1 search grid_max must be >= grid_min");
  }
  if (grid_points < 1) throw ValidationError("tau1 search grid_points must be >= 1");
  if (refine_iters < 0) throw ValidationError("tau1 search refine_iters must be >= 0");
  if (threads < 1) throw ValidationError("tau1 search threads must be >= 1");
}

AllInfeasible::AllInfeasible(std::vector<TraceEntry> trace)
    : std::runtime_error("no feasible tau1 on grid"), trace_(std::move(trace)) {}

namespace {

struct Evaluation {
  double tau1 = 0.0;
  std::optional<Certificate> cert;
  double value() const {
    return cert ? cert->bound : std::numeric_limits<double>::infinity();
  }
};

Evaluation evaluate(double tau1, const PlantModel& plant, const SectorConstants& sector,
                    const CertifyOptions& options) {
  Evaluation e;
  e.tau1 = tau1;
  try {
    CertifyOutcome out = certify_fixed_tau(tau1, plant, sector, options);
    if (auto* c = std::get_if<Certificate>(&out)) e.cert = std::move(*c);
  } catch (const SolverFailure&) {
    // Scored like an infeasible point.
  }
  return e;
}

/// Strictly better: smaller bound, then smaller tau1.
bool better(const Evaluation& a, const Evaluation& b) {
  if (a.value() != b.value()) return a.value() < b.value();
  return a.tau1 < b.tau1;
}

}  // namespace

SearchResult minimize_bound(const PlantModel& plant, const SectorConstants& sector,
                            const SearchConfig& search, const CertifyOptions& options) {
  search.validate();
  sector.validate();

  const int npts = search.grid_points;
  std::vector<double> grid(static_cast<std::size_t>(npts));
  const double lo = std::log(search.grid_min);
  const double hi = std::log(search.grid_max);
  for (int i = 0; i < npts; ++i) {
    const double u = npts == 1 ? lo : lo + (hi - lo) * i / (npts - 1);
    grid[static_cast<std::size_t>(i)] = std::exp(u);
  }

  std::vector<Evaluation> evals(grid.size());
  if (search.threads <= 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) evals[i] = evaluate(grid[i], plant, sector, options);
  } else {
    std::vector<std::future<void>> workers;
    const auto nthreads = static_cast<std::size_t>(search.threads);
    for (std::size_t w = 0; w < nthreads; ++w) {
      workers.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t i = w; i < grid.size(); i += nthreads) {
          evals[i] = evaluate(grid[i], plant, sector, options);
        }
      }));
    }
    for (auto& f : workers) f.get();
  }

  SearchResult result;
  for (const auto& e : evals) {
    result.trace.push_back({e.tau1, e.cert ? std::optional<double>(e.cert->bound) : std::nullopt, false});
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < evals.size(); ++i) {
    if (better(evals[i], evals[best])) best = i;
  }
  if (!evals[best].cert) throw AllInfeasible(result.trace);

  std::size_t run_lo = best;
  std::size_t run_hi = best;
  while (run_lo > 0 && evals[run_lo - 1].cert) --run_lo;
  while (run_hi + 1 < evals.size() && evals[run_hi + 1].cert) ++run_hi;

  Evaluation incumbent = evals[best];
  double a = std::log(evals[best > run_lo ? best - 1 : best].tau1);
  double b = std::log(evals[best < run_hi ? best + 1 : best].tau1);

  if (search.refine_iters > 0 && b > a) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    auto probe = [&](double u) {
      Evaluation e = evaluate(std::exp(u), plant, sector, options);
      result.trace.push_back(
          {e.tau1, e.cert ? std::optional<double>(e.cert->bound) : std::nullopt, true});
      if (better(e, incumbent)) incumbent = e;
      return e.value();
    };
    double c = b - g * (b - a);
    double d = a + g * (b - a);
    double fc = probe(c);
    double fd = probe(d);
    for (int it = 0; it < search.refine_iters; ++it) {
      if (fc <= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - g * (b - a);
        fc = probe(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + g * (b - a);
        fd = probe(d);
      }
    }
  }
  result.best = std::move(*incumbent.cert);
  return result;
}

}  // namespace qcert
