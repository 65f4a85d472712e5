#include "ternstab/stabilizer.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ternstab {

void StabilizerConfig::validate() const {
  if (max_iterations < 1)
    throw std::invalid_argument("stabilizer.max_iterations must be >= 1");
  if (!(convergence_tolerance > 0.0))
    throw std::invalid_argument("stabilizer.tolerance must be > 0");
  if (!(ratio_cap > 0.0)) throw std::invalid_argument("stabilizer.ratio_cap must be > 0");
  if (!(bound_tolerance > 0.0))
    throw std::invalid_argument("stabilizer bound_tolerance must be > 0");
}

bool StabilityCertificate::operator==(const StabilityCertificate& other) const {
  auto pair_eq = [](const ResidualPair& a, const ResidualPair& b) {
    return a.normalized == b.normalized && a.raw == b.raw;
  };
  return mode == other.mode && L == other.L && n_star == other.n_star &&
         d_f_Jf == other.d_f_Jf && d_f_D == other.d_f_D && paper_bound == other.paper_bound &&
         sound_bound == other.sound_bound && contraction_profile == other.contraction_profile &&
         paper_bound_holds == other.paper_bound_holds &&
         sound_bound_holds == other.sound_bound_holds && converged == other.converged &&
         noise_floor == other.noise_floor && pair_eq(residuals.jensen, other.residuals.jensen) &&
         pair_eq(residuals.additivity, other.residuals.additivity) &&
         pair_eq(residuals.homogeneity_T, other.residuals.homogeneity_T) &&
         pair_eq(residuals.homogeneity_C, other.residuals.homogeneity_C) &&
         pair_eq(residuals.derivation, other.residuals.derivation) &&
         pair_eq(residuals.jordan, other.residuals.jordan);
}

double paper_theorem_constant(double contraction_constant, DilationMode mode) {
  const double L = contraction_constant;
  return mode == DilationMode::kExpand ? L / (1.0 - L) : L / (3.0 - 3.0 * L);
}

EvaluableMap apply_J(const EvaluableMap& f, DilationMode mode) { return f.dilate_once(mode); }

namespace {

// One profile entry's rounding scale: u times the worst evaluation-to-budget
// ratio over the probes. The non-decaying part of an iterate is of the order
// of f itself, so differences of successive iterates carry absolute noise of
// about eps * ||f(x)||.
double evaluation_noise_floor(const EvaluableMap& f, const ControlFunction& phi,
                              const ProbeSet& probes) {
  double worst = 0.0;
  for (const Element& x : probes.elements()) {
    double denom = phi.first_slot(x);
    if (!(denom > 0.0)) continue;
    worst = std::max(worst, (1.0 + operator_norm(f(x))) / denom);
  }
  return 1024.0 * std::numeric_limits<double>::epsilon() * worst;
}

}  // namespace

StabilizeResult stabilize(const EvaluableMap& f, const ControlFunction& phi,
                          const StabilizerConfig& config, const ProbeSet& probes) {
  config.validate();
  if (phi.mode_hint() != config.mode)
    throw std::invalid_argument("stabilize: control function mode hint does not match config mode");
  const double L = phi.contraction_constant();
  if (!(L < 1.0))
    throw std::invalid_argument("stabilize: contraction constant must be < 1 (hypothesis violation)");

  const Element zero = Element::Zero(f.dimension(), f.dimension());
  if (operator_norm(f(zero)) > 1e-12)
    throw std::invalid_argument("stabilize: starting map must send 0 to 0");

  StabilityCertificate certificate;
  certificate.mode = config.mode;
  certificate.L = L;
  certificate.paper_bound = paper_theorem_constant(L, config.mode);
  certificate.noise_floor = evaluation_noise_floor(f, phi, probes);

  EvaluableMap current = f;
  bool converged = false;
  int n_star = config.max_iterations;
  for (int n = 0; n < config.max_iterations; ++n) {
    EvaluableMap next = apply_J(current, config.mode);
    double step = generalized_distance(current, next, phi, probes, config.ratio_cap);
    certificate.contraction_profile.push_back(step);
    current = std::move(next);
    if (std::isfinite(step) && step < config.convergence_tolerance) {
      converged = true;
      n_star = n + 1;
      break;
    }
  }

  certificate.converged = converged;
  certificate.n_star = n_star;
  certificate.d_f_Jf = certificate.contraction_profile.front();
  certificate.d_f_D = generalized_distance(f, current, phi, probes, config.ratio_cap);
  certificate.sound_bound = certificate.d_f_Jf / (1.0 - L);
  if (converged) {
    certificate.paper_bound_holds =
        certificate.d_f_D <= certificate.paper_bound * (1.0 + config.bound_tolerance);
    certificate.sound_bound_holds =
        certificate.d_f_D <= certificate.sound_bound * (1.0 + config.bound_tolerance);
  }
  return StabilizeResult{std::move(current), std::move(certificate)};
}

bool contraction_profile_consistent(const StabilityCertificate& certificate,
                                    double bound_tolerance) {
  const auto& profile = certificate.contraction_profile;
  for (std::size_t n = 0; n + 1 < profile.size(); ++n) {
    if (!std::isfinite(profile[n]) || !std::isfinite(profile[n + 1])) return false;
    double allowed =
        certificate.L * profile[n] * (1.0 + bound_tolerance) + certificate.noise_floor;
    if (profile[n + 1] > allowed) return false;
  }
  return true;
}

FixedPointAlternativeReport fixed_point_alternative_check(
    const EvaluableMap& f, const ControlFunction& phi, const StabilizerConfig& config,
    const ProbeSet& probes, const std::vector<EvaluableMap>& alternates) {
  FixedPointAlternativeReport report;
  StabilizeResult main = stabilize(f, phi, config, probes);

  report.distances_finite = true;
  for (double step : main.certificate.contraction_profile)
    if (!std::isfinite(step)) report.distances_finite = false;
  report.sequence_converged = main.certificate.converged;

  const double L = main.certificate.L;
  const double agreement_tolerance = 10.0 * config.convergence_tolerance;
  report.unique_limit = true;
  report.aposteriori_all_hold = true;

  for (const EvaluableMap& g : alternates) {
    FixedPointAlternativeReport::AlternateCheck check;
    double d_f_g = generalized_distance(f, g, phi, probes, config.ratio_cap);
    check.finite_distance_to_f = std::isfinite(d_f_g);
    if (check.finite_distance_to_f) {
      StabilizeResult alt = stabilize(g, phi, config, probes);
      double disagreement =
          generalized_distance(alt.limit, main.limit, phi, probes, config.ratio_cap);
      report.max_limit_disagreement = std::max(report.max_limit_disagreement, disagreement);
      check.same_limit = disagreement <= agreement_tolerance;
      check.d_g_D = generalized_distance(g, main.limit, phi, probes, config.ratio_cap);
      check.d_g_Jg = generalized_distance(g, apply_J(g, config.mode), phi, probes, config.ratio_cap);
      check.aposteriori_bound = check.d_g_Jg / (1.0 - L);
      check.aposteriori_holds =
          check.d_g_D <= check.aposteriori_bound * (1.0 + config.bound_tolerance);
      report.unique_limit = report.unique_limit && check.same_limit;
      report.aposteriori_all_hold = report.aposteriori_all_hold && check.aposteriori_holds;
    }
    report.alternates.push_back(check);
  }
  return report;
}

}  // namespace ternstab
