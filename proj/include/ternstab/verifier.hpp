#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ternstab/perturbation.hpp"
#include "ternstab/residuals.hpp"
#include "ternstab/stabilizer.hpp"

namespace ternstab {

struct BoundCheck {
  double sup_ratio = 0.0;
  bool holds = false;
};

/// sup over probes of ||f(x) - D(x)|| / phi(x, 0, ...); holds iff the
/// supremum stays within constant * (1 + tolerance).
BoundCheck bound_check(const MapFn& f, const MapFn& limit, const ControlFunction& phi,
                       double constant, const ProbeSet& probes, double tolerance = 1e-6);

inline BoundCheck bound_check(const EvaluableMap& f, const EvaluableMap& limit,
                              const ControlFunction& phi, double constant,
                              const ProbeSet& probes, double tolerance = 1e-6) {
  return bound_check(as_fn(f), as_fn(limit), phi, constant, probes, tolerance);
}

/// The corollaries' stated constant, theta-relative: 2^p/(2 - 2^p) for the
/// expand-regime corollaries and 1/(3^p - 3) for the contract-regime ones.
double paper_corollary_constant(double p, DilationMode mode);

/// The constant actually derivable from the premise via the fixed point
/// alternative, theta-relative. Expand: d(f, Jf) <= L with L = 3^(p-1), so
/// L/(1-L). Contract: the premise only yields d(f, Jf) <= 1 (the claimed
/// extra factor L/3 does not follow), so 1/(1-L) with L = 3^(1-p).
double derived_theorem_constant(double p, DilationMode mode);

/// One append-only row of the discrepancy ledger; carries the full run
/// parameters so a contested constant is reproducible from the row alone.
struct LedgerEntry {
  std::string tag;  // COROLLARY_2_3 / 2_5 / 2_7 / 2_9 or EXTRA
  std::string status = "OK";  // OK or PREMISE_FAIL
  int k = 0;
  std::uint64_t derivation_seed = 0;
  double derivation_scale = 1.0;
  std::uint64_t direction_seed = 0;
  std::uint64_t probe_seed = 0;
  double theta_prime = 0.0;
  double theta = 0.0;
  double p = 0.0;
  int arity = 6;
  DilationMode mode = DilationMode::kExpand;
  double L = 0.0;
  bool premise_additive_holds = false;
  bool premise_bracket_holds = false;
  double measured_ratio = 0.0;
  double paper_constant = 0.0;
  double derived_constant = 0.0;
  double sound_constant = 0.0;
  bool paper_holds = false;
  bool derived_holds = false;
  bool sound_holds = false;

  std::string to_csv_row() const;
  static std::string csv_header();
};

/// Append-only CSV ledger with a serialized writer.
class Ledger {
 public:
  explicit Ledger(std::filesystem::path path);
  void append(const LedgerEntry& entry);
  const std::filesystem::path& path() const { return path_; }
  static std::vector<std::string> read_rows(const std::filesystem::path& path);

 private:
  std::filesystem::path path_;
  std::mutex mutex_;
};

/// Parameters of the canonical experiment family: an inner derivation from a
/// seeded commutator plus a power perturbation, against a power-type control
/// function.
struct CanonicalParams {
  int k = 2;
  std::uint64_t derivation_seed = 1;
  double derivation_scale = 1.0;  // operator norm of the commutator element m
  double theta_prime = 0.01;
  double p = 0.5;
  std::uint64_t direction_seed = 2;
  double theta = 0.04;
  int arity = 6;
  DilationMode mode = DilationMode::kExpand;
};

struct CanonicalOutcome {
  EvaluableMap base;  // the exact derivation the family perturbs
  EvaluableMap start;  // the perturbed map handed to the stabilizer
  PremiseReport premise;
  bool premise_ok = false;
  std::optional<EvaluableMap> limit;
  std::optional<StabilityCertificate> certificate;
  double paper_constant = 0.0;
  double derived_constant = 0.0;
  double sound_constant = 0.0;
  double measured_ratio = 0.0;
  bool paper_holds = false;
  bool derived_holds = false;
  bool sound_holds = false;
  bool in_corollary_range = false;
};

/// Full pipeline for one family member: construct, verify the premise,
/// stabilize, fill residuals, and evaluate all three constants. On a premise
/// failure no bound claims are made.
CanonicalOutcome evaluate_canonical_family(const CanonicalParams& params,
                                           const StabilizerConfig& config,
                                           const ProbeSet& probes);

/// Ledger row for an already-evaluated family member.
LedgerEntry ledger_entry_from_outcome(const CanonicalParams& params, std::uint64_t probe_seed,
                                      const CanonicalOutcome& outcome);

/// Runs the pipeline and records the corollary-versus-certified comparison.
/// Exponents outside the corollaries' stated ranges produce EXTRA rows gated
/// on the additive premise only. Pass a null ledger to skip persistence.
LedgerEntry corollary_check(const CanonicalParams& params, const StabilizerConfig& config,
                            const ProbeSet& probes, Ledger* ledger);

}  // namespace ternstab
