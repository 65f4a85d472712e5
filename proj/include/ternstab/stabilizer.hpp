#pragma once

#include <vector>

#include "ternstab/maps.hpp"
#include "ternstab/residuals.hpp"

namespace ternstab {

struct StabilizerConfig {
  DilationMode mode = DilationMode::kExpand;
  int max_iterations = 40;
  double convergence_tolerance = 1e-9;  // on successive-iterate generalized distance
  double ratio_cap = kDefaultRatioCap;
  double bound_tolerance = 1e-6;  // relative slack on bound flags

  void validate() const;
};

/// Machine-checkable record of one stabilization run. All distances and
/// bounds are in units of phi(x, 0, ..., 0) (theta-relative). paper_bound is
/// the claimed constant L/(1-L) (expand) or L/(3-3L) (contract);
/// sound_bound = d(f, Jf)/(1-L) is the a-posteriori constant backed by the
/// fixed point alternative and must hold on every converged run.
struct StabilityCertificate {
  DilationMode mode = DilationMode::kExpand;
  double L = 0.0;
  int n_star = 0;
  double d_f_Jf = 0.0;
  double d_f_D = 0.0;
  double paper_bound = 0.0;
  double sound_bound = 0.0;
  std::vector<double> contraction_profile;
  bool paper_bound_holds = false;
  bool sound_bound_holds = false;
  bool converged = false;
  ResidualReport residuals;
  /// Rounding floor of one profile entry: successive-iterate differences
  /// below this level are dominated by double-precision noise from the
  /// non-decaying part of the iterates.
  double noise_floor = 0.0;

  bool operator==(const StabilityCertificate&) const;
};

/// Claimed distance constant of the stability theorems, theta-relative:
/// L/(1-L) for expand, L/(3-3L) for contract.
double paper_theorem_constant(double contraction_constant, DilationMode mode);

/// One more dilation step; n applications of apply_J starting from f equal
/// dilation_iterate(f, n, mode).
EvaluableMap apply_J(const EvaluableMap& f, DilationMode mode);

struct StabilizeResult {
  EvaluableMap limit;
  StabilityCertificate certificate;
};

/// Iterates J until successive iterates are within convergence_tolerance in
/// generalized distance or max_iterations is reached. Residuals of the limit
/// are left empty; the verifier fills them.
StabilizeResult stabilize(const EvaluableMap& f, const ControlFunction& phi,
                          const StabilizerConfig& config, const ProbeSet& probes);

/// Per-step contraction of the recorded profile:
/// profile[n+1] <= L * profile[n] * (1 + bound_tolerance) + noise_floor.
bool contraction_profile_consistent(const StabilityCertificate& certificate,
                                    double bound_tolerance = 1e-6);

/// Empirical check of the four conclusions of the fixed point alternative:
/// finite successive distances, convergence, a common limit for alternate
/// starting maps at finite distance, and the a-posteriori bound
/// d(g, D) <= d(g, Jg)/(1-L) for each of them.
struct FixedPointAlternativeReport {
  bool distances_finite = false;
  bool sequence_converged = false;
  double max_limit_disagreement = 0.0;
  bool unique_limit = false;
  struct AlternateCheck {
    bool finite_distance_to_f = false;  // membership in the theorem's set Lambda
    double d_g_D = 0.0;
    double d_g_Jg = 0.0;
    double aposteriori_bound = 0.0;
    bool aposteriori_holds = false;
    bool same_limit = false;
  };
  std::vector<AlternateCheck> alternates;
  bool aposteriori_all_hold = false;

  bool all_pass() const {
    return distances_finite && sequence_converged && unique_limit && aposteriori_all_hold;
  }
};

FixedPointAlternativeReport fixed_point_alternative_check(
    const EvaluableMap& f, const ControlFunction& phi, const StabilizerConfig& config,
    const ProbeSet& probes, const std::vector<EvaluableMap>& alternates);

}  // namespace ternstab
