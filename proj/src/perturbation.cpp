#include "ternstab/perturbation.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace ternstab {

EvaluableMap make_inner_derivation(Element m) {
  return EvaluableMap::inner_derivation(std::move(m));
}

EvaluableMap make_perturbed_map(const EvaluableMap& base, const PerturbationSpec& spec) {
  if (spec.theta_prime == 0.0) return base;
  Element direction = random_element(spec.direction_seed, 1.0, base.dimension());
  EvaluableMap perturbation =
      EvaluableMap::power_perturbation(spec.theta_prime, spec.exponent, std::move(direction));
  return EvaluableMap::sum(base, std::move(perturbation));
}

namespace {

constexpr double kUnitBallSlack = 1.0 + 1e-12;

// sup of LHS/RHS with the infinite branch when the budget vanishes under a
// nonzero defect.
void fold_ratio(double lhs, double rhs, double& sup) {
  if (rhs > 0.0) {
    sup = std::max(sup, lhs / rhs);
  } else if (lhs > 1e-14) {
    sup = std::numeric_limits<double>::infinity();
  }
}

}  // namespace

PremiseReport verify_premise(const EvaluableMap& f, const ControlFunction& phi,
                             const ProbeSet& probes, double tolerance) {
  PremiseReport report;

  const auto& elements = probes.elements();
  for (const auto& [ix, iy, iz] : probes.triples()) {
    const Element& x = elements[ix];
    const Element& y = elements[iy];
    const Element& z = elements[iz];
    const Element fw = f(Element((x + y + z) / 3.0));
    const Element ft = f(Element((x - 2.0 * y + z) / 3.0));
    const Element fs = f(Element((x + y - 2.0 * z) / 3.0));
    const double budget = phi.jensen_slots(x, y, z);
    for (Complex mu : probes.unit_scalars()) {
      double defect = operator_norm(Element(mu * (fw + ft + fs) - f(Element(mu * x))));
      fold_ratio(defect, budget, report.sup_additive_ratio);
    }
  }

  std::vector<int> ball;
  for (int i = 0; i < int(elements.size()); ++i)
    if (operator_norm(elements[i]) <= kUnitBallSlack) ball.push_back(i);
  if (ball.empty())
    throw std::invalid_argument(
        "verify_premise: bracket premise needs probes inside the unit ball (set r_min < 1)");

  auto bracket_defect = [&](const Element& a, const Element& b, const Element& c) {
    Element lhs = f(ternary_product(a, b, c)) - ternary_product(f(a), b, c) -
                  ternary_product(a, f(b), c) - ternary_product(a, b, f(c));
    return operator_norm(lhs);
  };

  if (phi.arity() == 6) {
    const int n = int(ball.size());
    for (int i = 0; i < n; ++i)
      for (int shift = 0; shift <= 2; ++shift) {
        const Element& a = elements[ball[i]];
        const Element& b = elements[ball[(i + shift) % n]];
        const Element& c = elements[ball[(i + 2 * shift + 1) % n]];
        const Element slots[] = {a, b, c};
        fold_ratio(bracket_defect(a, b, c), phi.bracket_slots(slots), report.sup_bracket_ratio);
      }
    report.domain_note =
        "bracket premise restricted to probe triples in the closed unit ball; "
        "jensen premise over all probe triples and unit scalars";
  } else {
    for (int i : ball) {
      const Element& a = elements[i];
      const Element slots[] = {a};
      fold_ratio(bracket_defect(a, a, a), phi.bracket_slots(slots), report.sup_bracket_ratio);
    }
    report.domain_note =
        "jordan bracket premise on diagonal triples (a, a, a) in the closed unit ball; "
        "jensen premise over all probe triples and unit scalars";
  }

  report.additive_holds = report.sup_additive_ratio <= 1.0 + tolerance;
  report.bracket_holds = report.sup_bracket_ratio <= 1.0 + tolerance;
  return report;
}

}  // namespace ternstab
