#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "qcert/analysis.hpp"
#include "qcert/fock.hpp"
#include "qcert/model.hpp"
#include "qcert/sector.hpp"

namespace qcert {

struct SolverSettings {
  double eps_margin = 1e-8;
  double tol = 1e-9;
  int max_iter = 200;

  bool operator==(const SolverSettings&) const = default;
};

struct Tau1Settings {
  /// When set, certify at this value only; otherwise search.
  std::optional<double> fixed;
  double grid_min = SearchConfig{}.grid_min;
  double grid_max = SearchConfig{}.grid_max;
  int grid_points = SearchConfig{}.grid_points;
  int refine_iters = SearchConfig{}.refine_iters;

  SearchConfig search() const;
  bool operator==(const Tau1Settings&) const = default;
};

/// Fully populated analysis input.
struct AnalysisConfig {
  PlantModel plant;
  /// Serialise the plant as M1/M2 blocks rather than the full M.
  bool plant_as_blocks = true;
  SectorConstants sector;
  CostSpec cost = CostSpec::josephson();
  NonlinearitySpec nonlinearity = NonlinearitySpec::neg_cos_q();
  Tau1Settings tau1;
  SolverSettings solver;
  KappaMode kappa_mode = KappaMode::DerivationConsistent;
  SimulationOptions simulate;
  SectorGrid sector_grid;

  CertifyOptions certify_options() const;
  bool operator==(const AnalysisConfig&) const = default;
};

struct LoadOptions {
  /// Average M (or M1, M2) with its adjoint (transpose for M2) before
  /// validation.
  bool symmetrize = false;
};

/// Parses a JSON document. Throws ConfigError with line and column on syntax
/// errors and with the offending key on schema errors.
AnalysisConfig load_config(std::string_view text, const LoadOptions& options = {});

/// Canonical JSON text (two-space indent, trailing newline).
std::string serialize_config(const AnalysisConfig& config);

/// The Josephson-junction-in-a-cavity example shipped with the library.
std::string_view josephson_config_text();
AnalysisConfig josephson_config();

}  // namespace qcert
