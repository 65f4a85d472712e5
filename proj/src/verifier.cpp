#include "ternstab/verifier.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ternstab {

BoundCheck bound_check(const MapFn& f, const MapFn& limit, const ControlFunction& phi,
                       double constant, const ProbeSet& probes, double tolerance) {
  if (!(constant > 0.0)) throw std::invalid_argument("bound_check: constant must be > 0");
  BoundCheck result;
  for (const Element& x : probes.elements()) {
    double denom = phi.first_slot(x);
    if (!(denom > 0.0))
      throw std::invalid_argument("bound_check: phi(x, 0, ...) must be positive at every probe");
    double ratio = operator_norm(Element(f(x) - limit(x))) / denom;
    result.sup_ratio = std::max(result.sup_ratio, ratio);
  }
  result.holds = result.sup_ratio <= constant * (1.0 + tolerance);
  return result;
}

double paper_corollary_constant(double p, DilationMode mode) {
  if (mode == DilationMode::kExpand) return std::pow(2.0, p) / (2.0 - std::pow(2.0, p));
  return 1.0 / (std::pow(3.0, p) - 3.0);
}

double derived_theorem_constant(double p, DilationMode mode) {
  if (mode == DilationMode::kExpand) {
    double L = std::pow(3.0, p - 1.0);
    return L / (1.0 - L);
  }
  double L = std::pow(3.0, 1.0 - p);
  return 1.0 / (1.0 - L);
}

namespace {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

const char* bool_text(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string LedgerEntry::csv_header() {
  return "tag,status,k,derivation_seed,derivation_scale,direction_seed,probe_seed,"
         "theta_prime,theta,p,arity,mode,L,premise_additive_holds,premise_bracket_holds,"
         "measured_ratio,paper_constant,derived_constant,sound_constant,"
         "paper_holds,derived_holds,sound_holds";
}

std::string LedgerEntry::to_csv_row() const {
  std::ostringstream row;
  row << tag << ',' << status << ',' << k << ',' << derivation_seed << ','
      << format_number(derivation_scale) << ',' << direction_seed << ',' << probe_seed << ','
      << format_number(theta_prime) << ',' << format_number(theta) << ',' << format_number(p)
      << ',' << arity << ',' << to_string(mode) << ',' << format_number(L) << ','
      << bool_text(premise_additive_holds) << ',' << bool_text(premise_bracket_holds) << ','
      << format_number(measured_ratio) << ',' << format_number(paper_constant) << ','
      << format_number(derived_constant) << ',' << format_number(sound_constant) << ','
      << bool_text(paper_holds) << ',' << bool_text(derived_holds) << ','
      << bool_text(sound_holds);
  return row.str();
}

Ledger::Ledger(std::filesystem::path path) : path_(std::move(path)) {}

void Ledger::append(const LedgerEntry& entry) {
  std::lock_guard<std::mutex> lock(mutex_);
  bool fresh = !std::filesystem::exists(path_) || std::filesystem::file_size(path_) == 0;
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::app);
  if (!out) throw std::runtime_error("ledger: cannot open " + path_.string() + " for append");
  if (fresh) out << "# ternstab ledger v1\n" << LedgerEntry::csv_header() << '\n';
  out << entry.to_csv_row() << '\n';
}

std::vector<std::string> Ledger::read_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("ledger: cannot open " + path.string());
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (line.rfind("tag,", 0) == 0) continue;
    rows.push_back(line);
  }
  return rows;
}

CanonicalOutcome evaluate_canonical_family(const CanonicalParams& params,
                                           const StabilizerConfig& config,
                                           const ProbeSet& probes) {
  if (params.k < 1) throw std::invalid_argument("algebra.k must be >= 1");
  if (!(params.theta_prime >= 0.0) || !std::isfinite(params.theta_prime))
    throw std::invalid_argument("perturbation.theta_prime must be finite and >= 0");
  if (!(params.theta > 0.0))
    throw std::invalid_argument("control.theta must be > 0 (the generalized metric divides by it)");
  if (!(params.derivation_scale > 0.0))
    throw std::invalid_argument("derivation_scale must be > 0");

  Element m = random_element(params.derivation_seed, params.derivation_scale, params.k);
  EvaluableMap base = make_inner_derivation(std::move(m));
  PerturbationSpec spec{params.theta_prime, params.p, params.direction_seed,
                        PerturbationKind::kPower};
  EvaluableMap start = make_perturbed_map(base, spec);
  ControlFunction phi(params.theta, params.p, params.arity, params.mode);

  CanonicalOutcome outcome{
      .base = base,
      .start = start,
      .premise = verify_premise(start, phi, probes),
      .premise_ok = false,
      .limit = std::nullopt,
      .certificate = std::nullopt,
      .paper_constant = paper_corollary_constant(params.p, params.mode),
      .derived_constant = derived_theorem_constant(params.p, params.mode),
      .sound_constant = 0.0,
      .measured_ratio = 0.0,
      .paper_holds = false,
      .derived_holds = false,
      .sound_holds = false,
      .in_corollary_range = params.mode == DilationMode::kExpand
                                ? (params.p > 0.0 && params.p < 1.0)
                                : (params.p > 3.0),
  };

  // EXTRA rows (exponents outside the corollaries' ranges) are gated on the
  // additive premise only; the power-type bracket budget is not claimed there.
  outcome.premise_ok = outcome.in_corollary_range ? outcome.premise.both_hold()
                                                  : outcome.premise.additive_holds;
  if (!outcome.premise_ok) return outcome;

  StabilizeResult run = stabilize(start, phi, config, probes);
  run.certificate.residuals = compute_residual_report(run.limit, probes);
  outcome.measured_ratio = run.certificate.d_f_D;
  outcome.sound_constant = run.certificate.sound_bound;
  if (run.certificate.converged) {
    const double slack = 1.0 + config.bound_tolerance;
    outcome.paper_holds = outcome.measured_ratio <= outcome.paper_constant * slack;
    outcome.derived_holds = outcome.measured_ratio <= outcome.derived_constant * slack;
    outcome.sound_holds = run.certificate.sound_bound_holds;
  }
  outcome.limit = std::move(run.limit);
  outcome.certificate = std::move(run.certificate);
  return outcome;
}

namespace {

std::string corollary_tag(const CanonicalParams& params, bool in_range) {
  if (!in_range) return "EXTRA";
  if (params.mode == DilationMode::kExpand)
    return params.arity == 6 ? "COROLLARY_2_3" : "COROLLARY_2_7";
  return params.arity == 6 ? "COROLLARY_2_5" : "COROLLARY_2_9";
}

}  // namespace

LedgerEntry ledger_entry_from_outcome(const CanonicalParams& params, std::uint64_t probe_seed,
                                      const CanonicalOutcome& outcome) {
  LedgerEntry entry;
  entry.tag = corollary_tag(params, outcome.in_corollary_range);
  entry.status = outcome.premise_ok ? "OK" : "PREMISE_FAIL";
  entry.k = params.k;
  entry.derivation_seed = params.derivation_seed;
  entry.derivation_scale = params.derivation_scale;
  entry.direction_seed = params.direction_seed;
  entry.probe_seed = probe_seed;
  entry.theta_prime = params.theta_prime;
  entry.theta = params.theta;
  entry.p = params.p;
  entry.arity = params.arity;
  entry.mode = params.mode;
  entry.L = ControlFunction(params.theta, params.p, params.arity, params.mode)
                .contraction_constant();
  entry.premise_additive_holds = outcome.premise.additive_holds;
  entry.premise_bracket_holds = outcome.premise.bracket_holds;
  entry.paper_constant = outcome.paper_constant;
  entry.derived_constant = outcome.derived_constant;
  if (outcome.premise_ok) {
    entry.measured_ratio = outcome.measured_ratio;
    entry.sound_constant = outcome.sound_constant;
    entry.paper_holds = outcome.paper_holds;
    entry.derived_holds = outcome.derived_holds;
    entry.sound_holds = outcome.sound_holds;
  }
  return entry;
}

LedgerEntry corollary_check(const CanonicalParams& params, const StabilizerConfig& config,
                            const ProbeSet& probes, Ledger* ledger) {
  CanonicalOutcome outcome = evaluate_canonical_family(params, config, probes);
  LedgerEntry entry = ledger_entry_from_outcome(params, probes.seed(), outcome);
  if (ledger != nullptr) ledger->append(entry);
  return entry;
}

}  // namespace ternstab
