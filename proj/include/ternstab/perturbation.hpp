#pragma once

#include <cstdint>
#include <string>

#include "ternstab/maps.hpp"

namespace ternstab {

enum class PerturbationKind { kPower };

/// Power-type perturbation x -> theta' ||x||^p u with a seeded unit
/// direction u. The only perturbation kind in scope.
struct PerturbationSpec {
  double theta_prime = 0.0;
  double exponent = 0.5;
  std::uint64_t direction_seed = 2;
  PerturbationKind kind = PerturbationKind::kPower;
};

/// x -> m*x - x*m. The returned map is an exact ternary derivation: its
/// derivation residual telescopes to zero on every triple.
EvaluableMap make_inner_derivation(Element m);

/// base + power perturbation; theta_prime = 0 returns base unchanged.
/// The result always maps 0 to 0.
EvaluableMap make_perturbed_map(const EvaluableMap& base, const PerturbationSpec& spec);

/// Premise check in the split two-inequality form: the Jensen-type defect
/// against phi(x, y, z, 0, ...) over probe triples and unit scalars, and the
/// bracket defect against phi(0, 0, 0, a, b, c) (arity 6) or phi(0, 0, 0, a)
/// on diagonal triples (arity 4). The bracket side is restricted to probes
/// in the closed unit ball; power perturbations only satisfy a power-type
/// budget there.
struct PremiseReport {
  double sup_additive_ratio = 0.0;
  double sup_bracket_ratio = 0.0;
  bool additive_holds = false;
  bool bracket_holds = false;
  std::string domain_note;

  bool both_hold() const { return additive_holds && bracket_holds; }
};

PremiseReport verify_premise(const EvaluableMap& f, const ControlFunction& phi,
                             const ProbeSet& probes, double tolerance = 1e-9);

}  // namespace ternstab
