#pragma once

#include <algorithm>

#include "ternstab/maps.hpp"

namespace ternstab {

/// Each residual is a supremum over probe samples of a defect norm, reported
/// both raw and normalized by (1 + sum of sampled argument norms) so values
/// stay comparable across probe scales.
struct ResidualPair {
  double normalized = 0.0;
  double raw = 0.0;
};

struct ResidualReport {
  ResidualPair jensen;
  ResidualPair additivity;
  ResidualPair homogeneity_T;
  ResidualPair homogeneity_C;
  ResidualPair derivation;
  ResidualPair jordan;

  double max_normalized() const {
    return std::max({jensen.normalized, additivity.normalized, homogeneity_T.normalized,
                     homogeneity_C.normalized, derivation.normalized, jordan.normalized});
  }
};

/// Defect of mu D((x+y+z)/3) + mu D((x-2y+z)/3) + mu D((x+y-2z)/3) = D(mu x)
/// over probe triples and unit scalars.
ResidualPair jensen_residual(const MapFn& map, const ProbeSet& probes);

struct SubstitutionReport {
  ResidualPair additivity;
  /// Worst entrywise error of ((x+y+z) + (x-2y+z) + (x+y-2z))/3 against x,
  /// scaled by the participating entry magnitudes.
  double max_reconstruction_error = 0.0;
  bool reconstruction_ok = false;
};

/// Defect of D(w+t+s) = D(w) + D(t) + D(s) over probe triples, plus a check
/// that the change of variables w, t, s reconstructs x.
SubstitutionReport substitution_check(const MapFn& map, const ProbeSet& probes);

/// Defect of D(mu x) = mu D(x) over unit scalars.
ResidualPair homogeneity_T_residual(const MapFn& map, const ProbeSet& probes);

/// Defect of D(lambda x) = lambda D(x) over sampled complex scalars.
ResidualPair homogeneity_C_residual(const MapFn& map, const ProbeSet& probes);

/// Defect of D([xyz]) = [D(x)yz] + [xD(y)z] + [xyD(z)] over probe triples.
ResidualPair derivation_residual(const MapFn& map, const ProbeSet& probes);

/// Derivation defect restricted to diagonal triples (x, x, x).
ResidualPair jordan_residual(const MapFn& map, const ProbeSet& probes);

ResidualReport compute_residual_report(const MapFn& map, const ProbeSet& probes);

inline ResidualPair jensen_residual(const EvaluableMap& map, const ProbeSet& probes) {
  return jensen_residual(as_fn(map), probes);
}
inline SubstitutionReport substitution_check(const EvaluableMap& map, const ProbeSet& probes) {
  return substitution_check(as_fn(map), probes);
}
inline ResidualPair homogeneity_T_residual(const EvaluableMap& map, const ProbeSet& probes) {
  return homogeneity_T_residual(as_fn(map), probes);
}
inline ResidualPair homogeneity_C_residual(const EvaluableMap& map, const ProbeSet& probes) {
  return homogeneity_C_residual(as_fn(map), probes);
}
inline ResidualPair derivation_residual(const EvaluableMap& map, const ProbeSet& probes) {
  return derivation_residual(as_fn(map), probes);
}
inline ResidualPair jordan_residual(const EvaluableMap& map, const ProbeSet& probes) {
  return jordan_residual(as_fn(map), probes);
}
inline ResidualReport compute_residual_report(const EvaluableMap& map, const ProbeSet& probes) {
  return compute_residual_report(as_fn(map), probes);
}

}  // namespace ternstab
