#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qcert/config.hpp"

namespace qcert {

/// Cost bound reported for the Josephson example at tau1 = 0.8165.
inline constexpr double kReportedBound = 6.0965;
inline constexpr double kReportedTau1 = 0.8165;

/// The rounded P printed for the Josephson example.
ComplexMatrix reported_P();

struct AcceptanceInputs {
  AnalysisConfig config = josephson_config();
  ComplexMatrix P = reported_P();
  double tau1 = kReportedTau1;
  std::uint64_t seed = 20240607;
  /// Second cutoff for the truncation-convergence check in A6.
  int comparison_cutoff = 10;
};

struct CriterionResult {
  std::string id;
  std::string title;
  bool passed = false;
  /// Requirement and measured values, human readable.
  std::string requirement;
  std::string measured;
  double seconds = 0.0;
  double time_limit = 0.0;
};

std::vector<std::string> criterion_ids();

/// Throws std::invalid_argument for an unknown id.
CriterionResult run_criterion(const std::string& id, const AcceptanceInputs& inputs);

/// Runs the listed criteria (all when `only` is empty) in order.
std::vector<CriterionResult> run_acceptance(const AcceptanceInputs& inputs,
                                            const std::vector<std::string>& only = {});

}  // namespace qcert
