#pragma once

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcert/model.hpp"

namespace qcert {

// Scalar-shadow checks of the cost and sector conditions: z is a complex
// number and z z* is read as |z|^2. Passing is a necessary condition for the
// operator inequalities, not a proof of them. The operator ordering of z z*
// (annihilator first) differs from the scalar reading by a commutator
// constant that is not modelled here.

using ScalarField = std::function<double(Complex)>;
using ComplexField = std::function<Complex(Complex)>;

/// Polar mesh on the disc |z| <= radius: z = 0 plus radius*i/n_radial
/// (i = 1..n_radial) times exp(2 pi i j / n_angular) (j = 0..n_angular-1).
/// Doubling both counts yields a superset of the points.
struct SectorGrid {
  double radius = 3.0;
  int n_radial = 60;
  int n_angular = 60;

  void validate() const;
  std::vector<Complex> points() const;

  bool operator==(const SectorGrid&) const = default;
};

struct ConditionReport {
  std::string name;
  /// Max over the grid of (left side - right side).
  double max_violation = 0.0;
  Complex witness{0.0, 0.0};
  int samples = 0;

  bool passed(double tol) const { return max_violation <= tol; }
};

struct SectorReport {
  static constexpr const char* kKind = "scalar-shadow necessary-condition check";
  static constexpr const char* kOrderingNote =
      "z z* is read as |z|^2; operator ordering corrections are not modelled";

  ConditionReport cost_bound;  // W <= |z|^2/gamma0^2 + delta0
  ConditionReport sector_a;    // W + |f_z|^2 <= |z|^2/gamma1^2 + delta1
  ConditionReport sector_c;    // |f_z|^2 <= |z|^2/gamma2^2 + delta2
  ConditionReport lipschitz;   // |f_zz|^2 <= delta3

  std::vector<const ConditionReport*> conditions() const {
    return {&cost_bound, &sector_a, &sector_c, &lipschitz};
  }
  bool passed(double tol) const;
};

/// A user callable threw or returned a non-finite value.
class SampleError : public std::runtime_error {
 public:
  SampleError(const std::string& what, Complex z);
  Complex point() const { return point_; }

 private:
  Complex point_;
};

SectorReport verify_sector(const ScalarField& W, const ComplexField& f_z, const ComplexField& f_zz,
                           const SectorConstants& sector, const SectorGrid& grid = {});

/// Convenience overload using the scalar symbols of a cost and nonlinearity.
SectorReport verify_sector(const CostSpec& cost, const NonlinearitySpec& f,
                           const SectorConstants& sector, const SectorGrid& grid = {});

struct Deltas {
  double delta0 = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
};

/// Smallest deltas (clamped at zero) that make verify_sector pass on `grid`
/// for the given gammas.
Deltas calibrate_deltas(const ScalarField& W, const ComplexField& f_z, const ComplexField& f_zz,
                        double gamma0, double gamma1, double gamma2, const SectorGrid& grid = {});

/// Largest |f_z(x) - (g_f(2x + h) - g_f(2x - h)) / 2h| over real samples
/// x = Re z of the grid, with h = 1e-5. For f = g_f(z + z*) the two agree.
double derivative_crosscheck(const std::function<double(double)>& g_f, const ComplexField& f_z,
                             const SectorGrid& grid = {});

/// One row per sample: re, im, W, fz_sq, fzz_sq and the four violations.
void write_sector_csv(std::ostream& os, const ScalarField& W, const ComplexField& f_z,
                      const ComplexField& f_zz, const SectorConstants& sector,
                      const SectorGrid& grid = {});

}  // namespace qcert
