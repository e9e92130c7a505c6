#include "qcert/sector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "qcert/errors.hpp"

namespace qcert {

namespace {

std::string point_text(Complex z) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << z.real() << ", " << z.imag() << ")";
  return os.str();
}

double normalized_arg(Complex z) {
  double a = std::arg(z);
  if (a < 0.0) a += 2.0 * std::numbers::pi;
  return a;
}

/// True when (v, z) should replace the current maximum (best_v, best_z).
bool replaces(double v, Complex z, double best_v, Complex best_z) {
  if (v != best_v) return v > best_v;
  const double r = std::abs(z);
  const double br = std::abs(best_z);
  if (r != br) return r < br;
  return normalized_arg(z) < normalized_arg(best_z);
}

struct Samples {
  double w = 0.0;
  double fz_sq = 0.0;
  double fzz_sq = 0.0;
};

Samples sample(const ScalarField& W, const ComplexField& f_z, const ComplexField& f_zz, Complex z) {
  Samples s;
  try {
    s.w = W(z);
    s.fz_sq = std::norm(f_z(z));
    s.fzz_sq = std::norm(f_zz(z));
  } catch (const std::exception& e) {
    throw SampleError(std::string("callable failed at z = ") + point_text(z) + ": " + e.what(), z);
  }
  if (!std::isfinite(s.w) || !std::isfinite(s.fz_sq) || !std::isfinite(s.fzz_sq)) {
    throw SampleError("non-finite callable value at z = " + point_text(z), z);
  }
  return s;
}

struct Violations {
  double cost = 0.0;
  double a = 0.0;
  double c = 0.0;
  double lip = 0.0;
};

Violations violations(const Samples& s, Complex z, const SectorConstants& k) {
  const double r2 = std::norm(z);
  Violations v;
  v.cost = s.w - (r2 / (k.gamma0 * k.gamma0) + k.delta0);
  v.a = s.w + s.fz_sq - (r2 / (k.gamma1 * k.gamma1) + k.delta1);
  v.c = s.fz_sq - (r2 / (k.gamma2 * k.gamma2) + k.delta2);
  v.lip = s.fzz_sq - k.delta3;
  return v;
}

void update(ConditionReport& r, double v, Complex z) {
  if (r.samples == 0 || replaces(v, z, r.max_violation, r.witness)) {
    r.max_violation = v;
    r.witness = z;
  }
  ++r.samples;
}

}  // namespace

SampleError::SampleError(const std::string& what, Complex z) : std::runtime_error(what), point_(z) {}

void SectorGrid::validate() const {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ValidationError("sector grid radius must be positive");
  if (n_radial < 1) throw ValidationError("sector grid n_radial must be >= 1");
  if (n_angular < 1) throw ValidationError("sector grid n_angular must be >= 1");
}

std::vector<Complex> SectorGrid::points() const {
  validate();
  std::vector<Complex> pts;
  pts.reserve(static_cast<std::size_t>(n_radial) * static_cast<std::size_t>(n_angular) + 1);
  pts.emplace_back(0.0, 0.0);
  for (int i = 1; i <= n_radial; ++i) {
    const double r = radius * static_cast<double>(i) / n_radial;
    for (int j = 0; j < n_angular; ++j) {
      const double th = 2.0 * std::numbers::pi * static_cast<double>(j) / n_angular;
      pts.push_back(std::polar(r, th));
    }
  }
  return pts;
}

bool SectorReport::passed(double tol) const {
  const auto conds = conditions();
  return std::all_of(conds.begin(), conds.end(),
                     [&](const ConditionReport* c) { return c->passed(tol); });
}

SectorReport verify_sector(const ScalarField& W, const ComplexField& f_z, const ComplexField& f_zz,
                           const SectorConstants& sector, const SectorGrid& grid) {
  sector.validate();
  SectorReport rep;
  rep.cost_bound.name = "cost_bound";
  rep.sector_a.name = "sector_a";
  rep.sector_c.name = "sector_c";
  rep.lipschitz.name = "lipschitz";
  for (const Complex z : grid.points()) {
    const Violations v = violations(sample(W, f_z, f_zz, z), z, sector);
    update(rep.cost_bound, v.cost, z);
    update(rep.sector_a, v.a, z);
    update(rep.sector_c, v.c, z);
    update(rep.lipschitz, v.lip, z);
  }
  return rep;
}

SectorReport verify_sector(const CostSpec& cost, const NonlinearitySpec& f,
                           const SectorConstants& sector, const SectorGrid& grid) {
  return verify_sector([&cost](Complex z) { return cost.scalar(z); }, f.f_z_fn(), f.f_zz_fn(),
                       sector, grid);
}

Deltas calibrate_deltas(const ScalarField& W, const ComplexField& f_z, const ComplexField& f_zz,
                        double gamma0, double gamma1, double gamma2, const SectorGrid& grid) {
  SectorConstants probe;
  probe.gamma0 = gamma0;
  probe.gamma1 = gamma1;
  probe.gamma2 = gamma2;
  probe.validate();
  // With all deltas zero the violations are exactly left - quadratic part.
  Deltas d;
  for (const Complex z : grid.points()) {
    const Violations v = violations(sample(W, f_z, f_zz, z), z, probe);
    d.delta0 = std::max(d.delta0, v.cost);
    d.delta1 = std::max(d.delta1, v.a);
    d.delta2 = std::max(d.delta2, v.c);
    d.delta3 = std::max(d.delta3, v.lip);
  }
  return d;
}

double derivative_crosscheck(const std::function<double(double)>& g_f, const ComplexField& f_z,
                             const SectorGrid& grid) {
  constexpr double h = 1e-5;
  double worst = 0.0;
  for (const Complex z : grid.points()) {
    const double q = 2.0 * z.real();
    const double fd = (g_f(q + h) - g_f(q - h)) / (2.0 * h);
    worst = std::max(worst, std::abs(f_z(Complex(z.real(), 0.0)) - fd));
  }
  return worst;
}

void write_sector_csv(std::ostream& os, const ScalarField& W, const ComplexField& f_z,
                      const ComplexField& f_zz, const SectorConstants& sector,
                      const SectorGrid& grid) {
  sector.validate();
  os << "re,im,W,fz_sq,fzz_sq,viol_cost_bound,viol_sector_a,viol_sector_c,viol_lipschitz\n";
  const auto old_precision = os.precision(17);
  for (const Complex z : grid.points()) {
    const Samples s = sample(W, f_z, f_zz, z);
    const Violations v = violations(s, z, sector);
    os << z.real() << ',' << z.imag() << ',' << s.w << ',' << s.fz_sq << ',' << s.fzz_sq << ','
       << v.cost << ',' << v.a << ',' << v.c << ',' << v.lip << '\n';
  }
  os.precision(old_precision);
}

}  // namespace qcert
