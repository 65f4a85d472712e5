#include "ternstab/selftest.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "ternstab/perturbation.hpp"
#include "ternstab/stabilizer.hpp"
#include "ternstab/verifier.hpp"

namespace ternstab {

namespace {

constexpr double kNormTolerance = 1e-10;

std::string format(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

double uniform_in(std::mt19937_64& gen, double lo, double hi) {
  return lo + (hi - lo) * (double(gen() >> 11) * 0x1.0p-53);
}

bool exactly_equal(const Element& a, const Element& b) {
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (a(i, j) != b(i, j)) return false;
  return true;
}

EvaluableMap seeded_random_map(std::uint64_t seed, int k) {
  std::mt19937_64 gen(detail::mix_seed(seed, 0x5EED));
  EvaluableMap map =
      make_inner_derivation(random_element(detail::mix_seed(seed, 1), uniform_in(gen, 0.2, 1.5), k));
  if (gen() % 2 == 0) {
    double amplitude = uniform_in(gen, 0.0, 0.5);
    if (amplitude > 0.0)
      map = EvaluableMap::sum(
          map, EvaluableMap::power_perturbation(
                   amplitude, 0.5, random_element(detail::mix_seed(seed, 2), 1.0, k)));
  }
  if (gen() % 2 == 0)
    map = EvaluableMap::scalar_multiple(
        Complex(uniform_in(gen, -1.0, 1.0), uniform_in(gen, -1.0, 1.0)), map);
  return map;
}

}  // namespace

SuiteResult algebra_axiom_suite(int tuples_per_identity, const NormFn& product_norm) {
  SuiteResult suite;
  suite.name = "algebra_axioms";
  const int k = 3;

  bool submultiplicative = true;
  for (int i = 0; i < tuples_per_identity; ++i) {
    std::mt19937_64 gen(detail::mix_seed(0xA1, i));
    Element a = random_element(detail::mix_seed(0xA2, i), uniform_in(gen, 0.1, 2.0), k);
    Element b = random_element(detail::mix_seed(0xA3, i), uniform_in(gen, 0.1, 2.0), k);
    Element c = random_element(detail::mix_seed(0xA4, i), uniform_in(gen, 0.1, 2.0), k);
    double lhs = product_norm(ternary_product(a, b, c));
    double rhs = operator_norm(a) * operator_norm(b) * operator_norm(c);
    if (!(lhs <= rhs * (1.0 + 10.0 * kNormTolerance))) submultiplicative = false;
  }
  suite.check(submultiplicative, "submultiplicativity ||[abc]|| <= ||a|| ||b|| ||c||");

  // Bracket compatibility: with X = A and a single associative product, each
  // of the five chains is generalized associativity of a five-letter word.
  // Integer-valued draws keep every association order exact in doubles, so
  // the chains are checked as bitwise equalities.
  for (int position = 0; position < 5; ++position) {
    bool identity_holds = true;
    for (int i = 0; i < tuples_per_identity; ++i) {
      Element word[5];
      for (int w = 0; w < 5; ++w)
        word[w] = random_integer_element(detail::mix_seed(0xB0 + position, i * 5 + w), k, 2);
      Element left = ternary_product(ternary_product(word[0], word[1], word[2]), word[3], word[4]);
      Element middle = ternary_product(word[0], ternary_product(word[1], word[2], word[3]), word[4]);
      Element right = ternary_product(word[0], word[1], ternary_product(word[2], word[3], word[4]));
      if (!exactly_equal(left, middle) || !exactly_equal(middle, right)) identity_holds = false;
    }
    suite.check(identity_holds,
                "bracket identity chain, module slot " + std::to_string(position + 1));
  }

  bool homogeneous = true;
  for (int i = 0; i < 100; ++i) {
    std::mt19937_64 gen(detail::mix_seed(0xC1, i));
    Element a = random_element(detail::mix_seed(0xC2, i), uniform_in(gen, 0.1, 2.0), k);
    Complex lambda(uniform_in(gen, -2.0, 2.0), uniform_in(gen, -2.0, 2.0));
    double lhs = operator_norm(scale(lambda, a));
    double rhs = std::abs(lambda) * operator_norm(a);
    if (std::abs(lhs - rhs) > kNormTolerance * (1.0 + rhs)) homogeneous = false;
  }
  suite.check(homogeneous, "operator_norm(scale(lambda, a)) = |lambda| operator_norm(a)");

  bool slot_linear = true;
  for (int i = 0; i < 100; ++i) {
    Element a = random_element(detail::mix_seed(0xD1, i), 1.0, k);
    Element a2 = random_element(detail::mix_seed(0xD2, i), 0.7, k);
    Element b = random_element(detail::mix_seed(0xD3, i), 1.3, k);
    Element c = random_element(detail::mix_seed(0xD4, i), 0.9, k);
    Element lhs = ternary_product(add(a, a2), b, c);
    Element rhs = ternary_product(a, b, c) + ternary_product(a2, b, c);
    double scale_ref = operator_norm(ternary_product(a, b, c)) +
                       operator_norm(ternary_product(a2, b, c));
    if (!(operator_norm(Element(lhs - rhs)) <= 1e-12 * (1.0 + scale_ref))) slot_linear = false;
  }
  suite.check(slot_linear, "ternary_product linear in the first slot");

  return suite;
}

SuiteResult maps_metric_suite(const ProbeConfig& probe_config) {
  SuiteResult suite;
  suite.name = "maps_metric";
  const int k = 2;
  ProbeSet probes(k, probe_config);
  ControlFunction phi(1.0, 0.5, 6, DilationMode::kExpand);

  bool symmetric = true;
  bool triangle = true;
  for (int i = 0; i < 50; ++i) {
    EvaluableMap f = seeded_random_map(detail::mix_seed(0xE1, i), k);
    EvaluableMap g = seeded_random_map(detail::mix_seed(0xE2, i), k);
    EvaluableMap h = seeded_random_map(detail::mix_seed(0xE3, i), k);
    double d_fg = generalized_distance(f, g, phi, probes);
    double d_gf = generalized_distance(g, f, phi, probes);
    if (d_fg != d_gf) symmetric = false;
    double d_fh = generalized_distance(f, h, phi, probes);
    double d_gh = generalized_distance(g, h, phi, probes);
    if (!(d_fh <= (d_fg + d_gh) * (1.0 + 1e-12))) triangle = false;
  }
  suite.check(symmetric, "generalized_distance symmetry is exact");
  suite.check(triangle, "generalized_distance triangle inequality");

  {
    EvaluableMap base = make_inner_derivation(random_element(11, 1.0, k));
    EvaluableMap perturbed = make_perturbed_map(base, {0.02, 0.5, 12, PerturbationKind::kPower});
    ControlFunction matched(0.08, 0.5, 6, DilationMode::kExpand);
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const Element& x : probes.elements()) {
      double ratio = operator_norm(Element(perturbed(x) - base(x))) / matched.first_slot(x);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    suite.check((hi - lo) <= 1e-9 * hi, "canonical-family ratio constant across probes");
    double estimate = generalized_distance(base, perturbed, matched, probes);
    suite.check(std::abs(estimate - 0.25) <= 1e-9, "probe estimate equals theta'/theta");

    ProbeConfig smaller = probe_config;
    smaller.element_count = std::max(1, probe_config.element_count / 2);
    ProbeSet subset(k, smaller);
    suite.check(generalized_distance(base, perturbed, matched, subset) <= estimate * (1.0 + 1e-12),
                "enlarging the probe set never decreases the distance");
  }

  {
    bool homogeneous = true;
    ControlFunction phi4(0.7, 0.5, 4, DilationMode::kExpand);
    for (int i = 0; i < 100; ++i) {
      std::mt19937_64 gen(detail::mix_seed(0xF1, i));
      Element args[4];
      for (int j = 0; j < 4; ++j)
        args[j] = random_element(detail::mix_seed(0xF2 + j, i), uniform_in(gen, 0.2, 2.0), k);
      Complex lambda(uniform_in(gen, -2.0, 2.0), uniform_in(gen, -2.0, 2.0));
      Element scaled[4];
      for (int j = 0; j < 4; ++j) scaled[j] = lambda * args[j];
      double lhs = phi4(std::span<const Element>(scaled, 4));
      double rhs = std::pow(std::abs(lambda), 0.5) * phi4(std::span<const Element>(args, 4));
      if (std::abs(lhs - rhs) > 1e-12 * (1.0 + rhs)) homogeneous = false;
    }
    suite.check(homogeneous, "control function homogeneity phi(lambda x) = |lambda|^p phi(x)");
  }

  return suite;
}

SuiteResult perturbation_premise_suite(const ProbeConfig& probe_config) {
  SuiteResult suite;
  suite.name = "perturbation_premises";
  const int k = 2;
  ProbeSet probes(k, probe_config);

  bool exact_everywhere = true;
  bool fixed_point_both_modes = true;
  for (int i = 0; i < 5; ++i) {
    EvaluableMap derivation = make_inner_derivation(random_element(detail::mix_seed(0x1A, i), 1.0, k));
    ResidualReport report = compute_residual_report(derivation, probes);
    if (report.max_normalized() > 1e-12) exact_everywhere = false;
    ControlFunction expand_phi(1.0, 0.5, 6, DilationMode::kExpand);
    ControlFunction contract_phi(1.0, 4.0, 6, DilationMode::kContract);
    if (generalized_distance(derivation, apply_J(derivation, DilationMode::kExpand), expand_phi,
                             probes) > 1e-12)
      fixed_point_both_modes = false;
    if (generalized_distance(derivation, apply_J(derivation, DilationMode::kContract),
                             contract_phi, probes) > 1e-12)
      fixed_point_both_modes = false;
  }
  suite.check(exact_everywhere, "inner derivations have zero residuals");
  suite.check(fixed_point_both_modes, "inner derivations are exact fixed points of both modes");

  const double theta_prime = 0.01;
  EvaluableMap base = make_inner_derivation(random_element(21, 1.0, k));
  for (double p : {0.25, 0.5, 0.75}) {
    EvaluableMap f = make_perturbed_map(base, {theta_prime, p, 22, PerturbationKind::kPower});
    ControlFunction phi(4.0 * theta_prime, p, 6, DilationMode::kExpand);
    PremiseReport premise = verify_premise(f, phi, probes);
    suite.check(premise.both_hold(), "premise holds at theta = 4 theta', p = " + format(p));
  }
  for (double p : {4.0, 5.0}) {
    EvaluableMap f = make_perturbed_map(base, {theta_prime, p, 22, PerturbationKind::kPower});
    ControlFunction phi(4.0 * theta_prime, p, 6, DilationMode::kContract);
    PremiseReport premise = verify_premise(f, phi, probes);
    suite.check(premise.both_hold(), "premise holds at theta = 4 theta', p = " + format(p));
  }
  return suite;
}

SuiteResult stabilizer_contraction_suite(const ProbeConfig& probe_config) {
  SuiteResult suite;
  suite.name = "stabilizer_contraction";
  const int k = 2;
  ProbeSet probes(k, probe_config);

  {
    EvaluableMap derivation = make_inner_derivation(random_element(31, 1.0, k));
    for (DilationMode mode : {DilationMode::kExpand, DilationMode::kContract}) {
      double p = mode == DilationMode::kExpand ? 0.5 : 4.0;
      ControlFunction phi(1.0, p, 6, mode);
      StabilizerConfig config;
      config.mode = mode;
      StabilizeResult run = stabilize(derivation, phi, config, probes);
      suite.check(run.certificate.converged && run.certificate.n_star == 1 &&
                      run.certificate.d_f_D <= 1e-10 && run.certificate.sound_bound_holds,
                  "exact fixed point recovered in one step, mode " + to_string(mode));
    }
  }

  const double decay = std::pow(3.0, -0.5);
  {
    // Small commutator base keeps the cancellation noise of the non-decaying
    // part far below the 1e-9 relative check at depth 20.
    EvaluableMap base = make_inner_derivation(random_element(32, 0.1, k));
    EvaluableMap f = make_perturbed_map(base, {1.0, 0.5, 33, PerturbationKind::kPower});
    ControlFunction phi(4.0, 0.5, 6, DilationMode::kExpand);
    StabilizerConfig config;
    config.mode = DilationMode::kExpand;
    config.max_iterations = 60;
    StabilizeResult run = stabilize(f, phi, config, probes);
    bool geometric = run.certificate.contraction_profile.size() >= 21;
    for (int n = 0; geometric && n <= 20; ++n) {
      double expected = std::pow(decay, n) * run.certificate.contraction_profile[0];
      if (std::abs(run.certificate.contraction_profile[n] - expected) > 1e-9 * expected)
        geometric = false;
    }
    suite.check(geometric, "expand profile follows 3^((p-1)n) exactly to 1e-9");
    suite.check(run.certificate.converged && run.certificate.sound_bound_holds,
                "expand run converges with the sound bound holding");
    suite.check(contraction_profile_consistent(run.certificate),
                "expand profile per-step contraction consistent");
    // After n* steps the measured distance is (theta'/theta)(1 - L^n*), i.e.
    // within tolerance/(1-L) of the true infimum.
    suite.check(std::abs(run.certificate.d_f_D - 0.25) <= 10.0 * config.convergence_tolerance,
                "expand distance to limit equals theta'/theta");

    double invariance = generalized_distance(apply_J(run.limit, config.mode), run.limit, phi, probes);
    suite.check(invariance < config.convergence_tolerance, "limit is dilation-invariant");
  }

  {
    // Zero base derivation: at depth 20 the contract profile sits 27^20 below
    // its start, beneath the cancellation floor of any nonzero commutator.
    EvaluableMap base = make_inner_derivation(Element::Zero(k, k));
    EvaluableMap f = make_perturbed_map(base, {1.0, 4.0, 34, PerturbationKind::kPower});
    ControlFunction phi(4.0, 4.0, 6, DilationMode::kContract);
    StabilizerConfig config;
    config.mode = DilationMode::kContract;
    config.max_iterations = 21;
    config.convergence_tolerance = 1e-35;
    StabilizeResult run = stabilize(f, phi, config, probes);
    const double contract_decay = std::pow(3.0, 1.0 - 4.0);
    bool geometric = run.certificate.contraction_profile.size() == 21;
    for (int n = 0; geometric && n <= 20; ++n) {
      double expected = std::pow(contract_decay, n) * run.certificate.contraction_profile[0];
      if (std::abs(run.certificate.contraction_profile[n] - expected) > 1e-9 * expected)
        geometric = false;
    }
    suite.check(geometric, "contract profile follows 3^((1-p)n) exactly to 1e-9");
  }

  {
    // Mode duality: exponents p and 2-p give the same per-step decay factor.
    EvaluableMap base = make_inner_derivation(random_element(35, 0.1, k));
    EvaluableMap f_expand = make_perturbed_map(base, {1.0, 0.5, 36, PerturbationKind::kPower});
    EvaluableMap f_contract = make_perturbed_map(base, {1.0, 1.5, 36, PerturbationKind::kPower});
    ControlFunction phi_expand(4.0, 0.5, 6, DilationMode::kExpand);
    ControlFunction phi_contract(4.0, 1.5, 6, DilationMode::kContract);
    StabilizerConfig config_expand;
    config_expand.mode = DilationMode::kExpand;
    StabilizerConfig config_contract;
    config_contract.mode = DilationMode::kContract;
    StabilizeResult expand_run = stabilize(f_expand, phi_expand, config_expand, probes);
    StabilizeResult contract_run = stabilize(f_contract, phi_contract, config_contract, probes);
    bool dual = true;
    for (int n = 0; n < 3; ++n) {
      double expand_ratio = expand_run.certificate.contraction_profile[n + 1] /
                            expand_run.certificate.contraction_profile[n];
      double contract_ratio = contract_run.certificate.contraction_profile[n + 1] /
                              contract_run.certificate.contraction_profile[n];
      if (std::abs(expand_ratio - decay) > 1e-9 * decay) dual = false;
      if (std::abs(contract_ratio - decay) > 1e-9 * decay) dual = false;
    }
    suite.check(dual, "expand at p and contract at 2-p decay by the same factor");
  }

  {
    EvaluableMap base = make_inner_derivation(random_element(37, 1.0, k));
    EvaluableMap f = make_perturbed_map(base, {0.01, 0.5, 38, PerturbationKind::kPower});
    ControlFunction phi(0.04, 0.5, 6, DilationMode::kExpand);
    StabilizerConfig config;
    config.mode = DilationMode::kExpand;
    config.max_iterations = 60;
    std::vector<EvaluableMap> alternates = {
        f,
        make_perturbed_map(base, {0.02, 0.5, 38, PerturbationKind::kPower}),
        make_perturbed_map(base, {0.01, 0.5, 39, PerturbationKind::kPower}),
    };
    FixedPointAlternativeReport report =
        fixed_point_alternative_check(f, phi, config, probes, alternates);
    suite.check(report.all_pass(), "fixed point alternative: all four conclusions verified");
  }

  return suite;
}

SuiteResult verifier_bound_suite(const ProbeConfig& probe_config) {
  SuiteResult suite;
  suite.name = "verifier_bounds";
  const int k = 2;
  ProbeSet probes(k, probe_config);
  StabilizerConfig config;

  bool jordan_below = true;
  for (int i = 0; i < 20; ++i) {
    EvaluableMap map = seeded_random_map(detail::mix_seed(0x2A, i), k);
    if (jordan_residual(map, probes).normalized > derivation_residual(map, probes).normalized)
      jordan_below = false;
  }
  suite.check(jordan_below, "jordan residual never exceeds the derivation residual");

  bool expansion_bounds = true;
  bool derived_tighter = true;
  for (double p : {0.25, 0.5, 0.75}) {
    CanonicalParams params;
    params.theta_prime = 0.01;
    params.theta = 0.04;
    params.p = p;
    params.mode = DilationMode::kExpand;
    config.mode = DilationMode::kExpand;
    config.max_iterations = 80;
    LedgerEntry entry = corollary_check(params, config, probes, nullptr);
    if (!(entry.status == "OK" && entry.paper_holds && entry.derived_holds && entry.sound_holds))
      expansion_bounds = false;
    if (!(entry.derived_constant <= entry.paper_constant)) derived_tighter = false;
  }
  suite.check(expansion_bounds, "expand-regime corollary, theorem, and sound constants hold");
  suite.check(derived_tighter, "3-dilation theorem constant is tighter than the stated corollary constant");

  bool contract_discrepancy = true;
  for (double p : {4.0, 5.0}) {
    CanonicalParams params;
    params.theta_prime = 0.01;
    params.theta = 0.04;
    params.p = p;
    params.mode = DilationMode::kContract;
    config.mode = DilationMode::kContract;
    config.max_iterations = 40;
    LedgerEntry entry = corollary_check(params, config, probes, nullptr);
    if (!(entry.status == "OK" && !entry.paper_holds && entry.sound_holds))
      contract_discrepancy = false;
  }
  suite.check(contract_discrepancy,
              "contract-regime stated constant fails while the sound constant holds");

  bool extra_rows = true;
  for (double p : {2.0, 2.5}) {
    CanonicalParams params;
    params.theta_prime = 0.01;
    params.theta = 0.04;
    params.p = p;
    params.mode = DilationMode::kContract;
    config.mode = DilationMode::kContract;
    LedgerEntry entry = corollary_check(params, config, probes, nullptr);
    if (!(entry.tag == "EXTRA" && entry.premise_additive_holds && entry.sound_holds))
      extra_rows = false;
  }
  suite.check(extra_rows, "intermediate exponents recorded as EXTRA rows with sound bounds");

  bool jordan_chain = true;
  for (double p : {0.5, 4.0}) {
    CanonicalParams params;
    params.theta_prime = 0.01;
    params.theta = 0.04;
    params.p = p;
    params.arity = 4;
    params.mode = p < 1.0 ? DilationMode::kExpand : DilationMode::kContract;
    config.mode = params.mode;
    LedgerEntry entry = corollary_check(params, config, probes, nullptr);
    std::string expected_tag = p < 1.0 ? "COROLLARY_2_7" : "COROLLARY_2_9";
    bool expected_paper = p < 1.0;
    if (!(entry.tag == expected_tag && entry.status == "OK" && entry.sound_holds &&
          entry.paper_holds == expected_paper))
      jordan_chain = false;
  }
  suite.check(jordan_chain, "jordan-premise rows mirror the full-premise verdicts");

  return suite;
}

std::vector<SuiteResult> run_selftest(const ProbeConfig& probes) {
  std::vector<SuiteResult> suites;
  suites.push_back(algebra_axiom_suite(1000, [](const Element& a) { return operator_norm(a); }));
  suites.push_back(maps_metric_suite(probes));
  suites.push_back(perturbation_premise_suite(probes));
  suites.push_back(stabilizer_contraction_suite(probes));
  suites.push_back(verifier_bound_suite(probes));
  return suites;
}

std::vector<SuiteResult> run_selftest() { return run_selftest(ProbeConfig{}); }

bool all_passed(const std::vector<SuiteResult>& suites) {
  for (const SuiteResult& suite : suites)
    if (suite.failed != 0) return false;
  return true;
}

void print_selftest_report(const std::vector<SuiteResult>& suites, std::ostream& out) {
  for (const SuiteResult& suite : suites) {
    out << "suite " << suite.name << ": " << suite.passed << "/" << (suite.passed + suite.failed)
        << " checks passed\n";
    for (const std::string& failure : suite.failures) out << "  FAIL " << failure << "\n";
  }
  out << (all_passed(suites) ? "selftest: PASS\n" : "selftest: FAIL\n");
}

}  // namespace ternstab
