#include "ternstab/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>

namespace ternstab {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

// The generalized metric takes the value infinity; JSON numbers cannot, so
// the infinite branch is encoded as the string "INFINITE".
nlohmann::json encode_distance(double value) {
  if (std::isinf(value) && value > 0) return "INFINITE";
  return value;
}

double decode_distance(const nlohmann::json& value) {
  if (value.is_string() && value.get<std::string>() == "INFINITE")
    return std::numeric_limits<double>::infinity();
  return value.get<double>();
}

nlohmann::json pair_to_json(const ResidualPair& pair) {
  return {{"normalized", pair.normalized}, {"raw", pair.raw}};
}

ResidualPair pair_from_json(const nlohmann::json& json) {
  return ResidualPair{json.at("normalized").get<double>(), json.at("raw").get<double>()};
}

}  // namespace

nlohmann::json certificate_to_json(const StabilityCertificate& certificate) {
  nlohmann::json profile = nlohmann::json::array();
  for (double step : certificate.contraction_profile) profile.push_back(encode_distance(step));
  return {
      {"mode", to_string(certificate.mode)},
      {"L", certificate.L},
      {"n_star", certificate.n_star},
      {"d_f_Jf", encode_distance(certificate.d_f_Jf)},
      {"d_f_D", encode_distance(certificate.d_f_D)},
      {"paper_bound", certificate.paper_bound},
      {"sound_bound", encode_distance(certificate.sound_bound)},
      {"contraction_profile", profile},
      {"paper_bound_holds", certificate.paper_bound_holds},
      {"sound_bound_holds", certificate.sound_bound_holds},
      {"converged", certificate.converged},
      {"noise_floor", certificate.noise_floor},
      {"residuals",
       {{"jensen", pair_to_json(certificate.residuals.jensen)},
        {"additivity", pair_to_json(certificate.residuals.additivity)},
        {"homogeneity_T", pair_to_json(certificate.residuals.homogeneity_T)},
        {"homogeneity_C", pair_to_json(certificate.residuals.homogeneity_C)},
        {"derivation", pair_to_json(certificate.residuals.derivation)},
        {"jordan", pair_to_json(certificate.residuals.jordan)}}},
  };
}

StabilityCertificate certificate_from_json(const nlohmann::json& json) {
  StabilityCertificate certificate;
  certificate.mode = dilation_mode_from_string(json.at("mode").get<std::string>());
  certificate.L = json.at("L").get<double>();
  certificate.n_star = json.at("n_star").get<int>();
  certificate.d_f_Jf = decode_distance(json.at("d_f_Jf"));
  certificate.d_f_D = decode_distance(json.at("d_f_D"));
  certificate.paper_bound = json.at("paper_bound").get<double>();
  certificate.sound_bound = decode_distance(json.at("sound_bound"));
  for (const auto& step : json.at("contraction_profile"))
    certificate.contraction_profile.push_back(decode_distance(step));
  certificate.paper_bound_holds = json.at("paper_bound_holds").get<bool>();
  certificate.sound_bound_holds = json.at("sound_bound_holds").get<bool>();
  certificate.converged = json.at("converged").get<bool>();
  certificate.noise_floor = json.at("noise_floor").get<double>();
  const auto& residuals = json.at("residuals");
  certificate.residuals.jensen = pair_from_json(residuals.at("jensen"));
  certificate.residuals.additivity = pair_from_json(residuals.at("additivity"));
  certificate.residuals.homogeneity_T = pair_from_json(residuals.at("homogeneity_T"));
  certificate.residuals.homogeneity_C = pair_from_json(residuals.at("homogeneity_C"));
  certificate.residuals.derivation = pair_from_json(residuals.at("derivation"));
  certificate.residuals.jordan = pair_from_json(residuals.at("jordan"));
  return certificate;
}

RunResult run_experiment(const ExperimentConfig& config, Ledger* ledger) {
  std::vector<std::string> notes = config.validate();
  ProbeSet probes(config.k, config.probes);
  StabilizerConfig stab = config.stabilizer_config();
  CanonicalParams params = config.canonical_params();
  CanonicalOutcome outcome = evaluate_canonical_family(params, stab, probes);
  LedgerEntry entry = ledger_entry_from_outcome(params, probes.seed(), outcome);
  if (ledger != nullptr) ledger->append(entry);

  int exit_code = kExitNotCertified;
  if (!outcome.premise_ok) {
    exit_code = kExitPremiseFail;
  } else if (outcome.certificate && outcome.certificate->converged &&
             outcome.certificate->sound_bound_holds) {
    exit_code = kExitCertified;
  }
  return RunResult{config, std::move(notes), std::move(outcome), std::move(entry), exit_code};
}

namespace {

nlohmann::json parameters_to_json(const ExperimentConfig& config) {
  return {
      {"algebra", {{"k", config.k}, {"norm_tolerance", config.norm_tolerance}}},
      {"derivation_seed", config.derivation_seed},
      {"derivation_scale", config.derivation_scale},
      {"perturbation",
       {{"theta_prime", config.theta_prime},
        {"p", config.p},
        {"direction_seed", config.direction_seed}}},
      {"control", {{"theta", config.resolved_theta()}, {"arity", config.arity}}},
      {"stabilizer",
       {{"mode", to_string(config.mode)},
        {"max_iterations", config.max_iterations},
        {"tolerance", config.tolerance},
        {"ratio_cap", config.ratio_cap}}},
      {"probes",
       {{"seed", config.probes.seed},
        {"element_count", config.probes.element_count},
        {"r_min", config.probes.r_min},
        {"r_max", config.probes.r_max},
        {"mu_count", config.probes.mu_count}}},
  };
}

std::string run_status(const RunResult& result) {
  if (result.exit_code == kExitPremiseFail) return "PREMISE_FAIL";
  if (result.exit_code == kExitCertified) return "CERTIFIED";
  return "NOT_CERTIFIED";
}

}  // namespace

std::string certificate_file_text(const RunResult& result) {
  nlohmann::json doc = {
      {"status", run_status(result)},
      {"parameters", parameters_to_json(result.config)},
      {"premise",
       {{"sup_additive_ratio", encode_distance(result.outcome.premise.sup_additive_ratio)},
        {"sup_bracket_ratio", encode_distance(result.outcome.premise.sup_bracket_ratio)},
        {"additive_holds", result.outcome.premise.additive_holds},
        {"bracket_holds", result.outcome.premise.bracket_holds},
        {"domain_note", result.outcome.premise.domain_note}}},
      {"constants",
       {{"paper_constant", result.outcome.paper_constant},
        {"derived_constant", result.outcome.derived_constant},
        {"sound_constant", encode_distance(result.outcome.sound_constant)},
        {"measured_ratio", encode_distance(result.outcome.measured_ratio)},
        {"paper_holds", result.outcome.paper_holds},
        {"derived_holds", result.outcome.derived_holds},
        {"sound_holds", result.outcome.sound_holds},
        {"in_corollary_range", result.outcome.in_corollary_range}}},
  };
  if (!result.notes.empty()) doc["notes"] = result.notes;
  if (result.outcome.certificate) doc["certificate"] = certificate_to_json(*result.outcome.certificate);
  return doc.dump(2) + "\n";
}

std::string sweep_csv_header() {
  return "# ternstab sweep-csv v1\n"
         "p,theta_prime,theta,mode,L,n_star,d_f_Jf,d_f_D,paper_constant,derived_constant,"
         "sound_constant,paper_holds,derived_holds,sound_holds,max_residual,converged,error\n";
}

namespace {

std::string sanitize_error(std::string text) {
  for (char& c : text)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return text;
}

const char* bool_text(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string sweep_csv_row(const ExperimentConfig& config, const CanonicalOutcome* outcome,
                          const std::string& error) {
  std::ostringstream row;
  row << format_double(config.p) << ',' << format_double(config.theta_prime) << ','
      << format_double(config.resolved_theta()) << ',' << to_string(config.mode) << ',';
  double L = config.mode == DilationMode::kExpand ? std::pow(3.0, config.p - 1.0)
                                                  : std::pow(3.0, 1.0 - config.p);
  row << format_double(L) << ',';
  if (outcome != nullptr && outcome->certificate) {
    const StabilityCertificate& cert = *outcome->certificate;
    row << cert.n_star << ',' << format_double(cert.d_f_Jf) << ',' << format_double(cert.d_f_D)
        << ',' << format_double(outcome->paper_constant) << ','
        << format_double(outcome->derived_constant) << ',' << format_double(cert.sound_bound)
        << ',' << bool_text(outcome->paper_holds) << ',' << bool_text(outcome->derived_holds)
        << ',' << bool_text(outcome->sound_holds) << ','
        << format_double(cert.residuals.max_normalized()) << ',' << bool_text(cert.converged);
  } else if (outcome != nullptr) {
    // Premise failure: constants are known, run fields are not.
    row << ",,," << format_double(outcome->paper_constant) << ','
        << format_double(outcome->derived_constant) << ",,,,,,";
  } else {
    row << ",,,,,,,,,,";
  }
  row << ',' << sanitize_error(error);
  return row.str();
}

std::string run_csv_text(const RunResult& result) {
  std::string error;
  if (result.exit_code == kExitPremiseFail) error = "PREMISE_FAIL";
  return sweep_csv_header() + sweep_csv_row(result.config, &result.outcome, error) + "\n";
}

std::string sweep_to_csv(const ExperimentConfig& template_config, int jobs, Ledger* ledger) {
  template_config.validate();
  if (jobs < 1) throw ConfigError("field '--jobs': must be >= 1");

  std::vector<double> grid_p = template_config.sweep_p;
  if (grid_p.empty()) grid_p.push_back(template_config.p);
  std::vector<double> grid_tp = template_config.sweep_theta_prime;
  if (grid_tp.empty()) grid_tp.push_back(template_config.theta_prime);
  std::vector<int> grid_k = template_config.sweep_k;
  if (grid_k.empty()) grid_k.push_back(template_config.k);
  std::vector<std::uint64_t> grid_seed = template_config.sweep_seed;
  if (grid_seed.empty()) grid_seed.push_back(template_config.probes.seed);

  std::vector<ExperimentConfig> points;
  for (double p : grid_p)
    for (double tp : grid_tp)
      for (int k : grid_k)
        for (std::uint64_t seed : grid_seed) {
          ExperimentConfig point = template_config;
          point.p = p;
          point.theta_prime = tp;
          point.k = k;
          point.probes.seed = seed;
          point.sweep_p.clear();
          point.sweep_theta_prime.clear();
          point.sweep_k.clear();
          point.sweep_seed.clear();
          points.push_back(std::move(point));
        }

  struct PointResult {
    std::string row;
    std::optional<LedgerEntry> entry;
  };
  auto run_point = [](const ExperimentConfig& point) -> PointResult {
    try {
      point.validate();
      ProbeSet probes(point.k, point.probes);
      StabilizerConfig stab = point.stabilizer_config();
      CanonicalParams params = point.canonical_params();
      CanonicalOutcome outcome = evaluate_canonical_family(params, stab, probes);
      std::string error = outcome.premise_ok ? "" : "PREMISE_FAIL";
      LedgerEntry entry = ledger_entry_from_outcome(params, probes.seed(), outcome);
      return PointResult{sweep_csv_row(point, &outcome, error), std::move(entry)};
    } catch (const ConfigError& err) {
      return PointResult{sweep_csv_row(point, nullptr, std::string("VALIDATION: ") + err.what()),
                         std::nullopt};
    } catch (const std::exception& err) {
      return PointResult{sweep_csv_row(point, nullptr, std::string("RUN_ERROR: ") + err.what()),
                         std::nullopt};
    }
  };

  std::vector<PointResult> results(points.size());
  if (jobs == 1) {
    for (std::size_t i = 0; i < points.size(); ++i) results[i] = run_point(points[i]);
  } else {
    std::size_t next = 0;
    std::mutex mutex;
    auto worker = [&]() {
      for (;;) {
        std::size_t index;
        {
          std::lock_guard<std::mutex> lock(mutex);
          if (next >= points.size()) return;
          index = next++;
        }
        results[index] = run_point(points[index]);
      }
    };
    std::vector<std::future<void>> workers;
    for (int j = 0; j < jobs; ++j) workers.push_back(std::async(std::launch::async, worker));
    for (auto& w : workers) w.get();
  }

  // Buffered output: rows and ledger entries land in grid order regardless
  // of worker scheduling.
  std::string csv = sweep_csv_header();
  for (const PointResult& result : results) {
    csv += result.row;
    csv += '\n';
    if (ledger != nullptr && result.entry) ledger->append(*result.entry);
  }
  return csv;
}

}  // namespace ternstab
