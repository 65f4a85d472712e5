#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ternstab/config.hpp"
#include "ternstab/verifier.hpp"

namespace ternstab {

/// Exit-code contract of the runner: 0 converged with the sound bound
/// holding, 1 validation error (raised as ConfigError before a result
/// exists), 2 premise failure, 3 ran but not certified.
inline constexpr int kExitCertified = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitPremiseFail = 2;
inline constexpr int kExitNotCertified = 3;

struct RunResult {
  ExperimentConfig config;
  std::vector<std::string> notes;
  CanonicalOutcome outcome;
  LedgerEntry ledger_entry;
  int exit_code = kExitCertified;
};

/// Full pipeline for one config: validate, construct, verify the premise,
/// stabilize, compute residuals and bound checks, and record the ledger row.
/// Throws ConfigError on invalid configs; pass a null ledger to skip
/// persistence.
RunResult run_experiment(const ExperimentConfig& config, Ledger* ledger);

/// Shortest round-trip decimal rendering (infinities as "inf").
std::string format_double(double value);

nlohmann::json certificate_to_json(const StabilityCertificate& certificate);
StabilityCertificate certificate_from_json(const nlohmann::json& json);

/// The JSON document `run` writes: run parameters, premise report, constant
/// comparisons, and the certificate (absent on premise failure).
std::string certificate_file_text(const RunResult& result);

std::string sweep_csv_header();

/// One CSV row in the sweep column contract; `error` carries the per-row
/// error code ("" when the run succeeded).
std::string sweep_csv_row(const ExperimentConfig& config, const CanonicalOutcome* outcome,
                          const std::string& error);

/// Runs the grid (order: p, then theta_prime, then k, then probe seed) with
/// `jobs` parallel workers. Rows and ledger entries are emitted in grid
/// order, so output bytes do not depend on scheduling. A failing grid point
/// becomes a row with an error code instead of aborting the sweep.
std::string sweep_to_csv(const ExperimentConfig& template_config, int jobs, Ledger* ledger);

/// Single-row CSV with the same columns as a sweep.
std::string run_csv_text(const RunResult& result);

}  // namespace ternstab
