#include "ternstab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ternstab {

std::string to_string(OutputFormat format) {
  return format == OutputFormat::kJson ? "json" : "csv";
}

OutputFormat output_format_from_string(const std::string& text) {
  if (text == "json") return OutputFormat::kJson;
  if (text == "csv") return OutputFormat::kCsv;
  throw ConfigError("outputs.format must be 'csv' or 'json', got '" + text + "'");
}

namespace {

std::string trim(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r");
  auto end = s.find_last_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("field '" + key + "': expected a number, got '" + value + "'");
  }
}

long long parse_integer(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("field '" + key + "': expected an integer, got '" + value + "'");
  }
}

std::uint64_t parse_seed(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    std::uint64_t v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("field '" + key + "': expected a non-negative integer, got '" + value + "'");
  }
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream stream(value);
  std::string item;
  while (std::getline(stream, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

}  // namespace

double ExperimentConfig::resolved_theta() const {
  if (theta >= 0.0) return theta;
  if (theta_ratio >= 0.0) return theta_ratio * theta_prime;
  return 4.0 * theta_prime;  // canonical coupling theta = 4 theta'
}

std::vector<std::string> ExperimentConfig::validate() const {
  std::vector<std::string> notes;
  if (k < 1) throw ConfigError("field 'algebra.k': must be >= 1");
  if (!(norm_tolerance > 0.0) || !std::isfinite(norm_tolerance))
    throw ConfigError("field 'algebra.norm_tolerance': must be positive and finite");
  if (!(derivation_scale > 0.0) || !std::isfinite(derivation_scale))
    throw ConfigError("field 'derivation_scale': must be positive and finite");
  if (!(theta_prime >= 0.0) || !std::isfinite(theta_prime))
    throw ConfigError("field 'perturbation.theta_prime': must be finite and >= 0");
  if (!std::isfinite(p)) throw ConfigError("field 'perturbation.p': must be finite");
  if (theta >= 0.0 && theta_ratio >= 0.0)
    throw ConfigError("fields 'control.theta' and 'control.theta_ratio': set at most one");
  if (sweep_theta_prime.empty() && !(resolved_theta() > 0.0))
    throw ConfigError(
        "field 'control.theta': resolved theta must be > 0 "
        "(set control.theta, or control.theta_ratio with theta_prime > 0)");
  if (arity != 4 && arity != 6) throw ConfigError("field 'control.arity': must be 4 or 6");
  // A swept exponent replaces the template's, so only grid values are
  // checked against the mode in that case.
  if (sweep_p.empty()) {
    if (mode == DilationMode::kExpand && !(p < 1.0))
      throw ConfigError(
          "fields 'stabilizer.mode'/'perturbation.p': expand mode requires p < 1, got p = " +
          std::to_string(p));
    if (mode == DilationMode::kContract && !(p > 1.0))
      throw ConfigError(
          "fields 'stabilizer.mode'/'perturbation.p': contract mode requires p > 1, got p = " +
          std::to_string(p));
  }
  if (max_iterations < 1) throw ConfigError("field 'stabilizer.max_iterations': must be >= 1");
  if (!(tolerance > 0.0)) throw ConfigError("field 'stabilizer.tolerance': must be > 0");
  if (!(ratio_cap > 0.0)) throw ConfigError("field 'stabilizer.ratio_cap': must be > 0");
  try {
    probes.validate();
  } catch (const std::invalid_argument& err) {
    throw ConfigError(std::string("field '") + err.what() + "'");
  }

  if (sweep_p.empty()) {
    if (mode == DilationMode::kExpand && !(p > 0.0 && p < 1.0))
      notes.push_back("perturbation.p outside the expand-regime corollary range (0, 1); "
                      "ledger rows are tagged EXTRA");
    if (mode == DilationMode::kContract && !(p > 3.0))
      notes.push_back("perturbation.p outside the contract-regime corollary range (3, inf); "
                      "ledger rows are tagged EXTRA");
  }
  for (double grid_p : sweep_p) {
    if (mode == DilationMode::kExpand && !(grid_p < 1.0))
      throw ConfigError("field 'sweep.p': expand mode requires p < 1, got p = " +
                        std::to_string(grid_p));
    if (mode == DilationMode::kContract && !(grid_p > 1.0))
      throw ConfigError("field 'sweep.p': contract mode requires p > 1, got p = " +
                        std::to_string(grid_p));
  }
  for (double grid_tp : sweep_theta_prime)
    if (!(grid_tp >= 0.0)) throw ConfigError("field 'sweep.theta_prime': values must be >= 0");
  for (int grid_k : sweep_k)
    if (grid_k < 1) throw ConfigError("field 'sweep.k': values must be >= 1");
  return notes;
}

CanonicalParams ExperimentConfig::canonical_params() const {
  CanonicalParams params;
  params.k = k;
  params.derivation_seed = derivation_seed;
  params.derivation_scale = derivation_scale;
  params.theta_prime = theta_prime;
  params.p = p;
  params.direction_seed = direction_seed;
  params.theta = resolved_theta();
  params.arity = arity;
  params.mode = mode;
  return params;
}

StabilizerConfig ExperimentConfig::stabilizer_config() const {
  StabilizerConfig config;
  config.mode = mode;
  config.max_iterations = max_iterations;
  config.convergence_tolerance = tolerance;
  config.ratio_cap = ratio_cap;
  return config;
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig config;
  std::istringstream stream(text);
  std::string line;
  int line_number = 0;
  while (std::getline(stream, line)) {
    ++line_number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_number) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("line " + std::to_string(line_number) + ": empty key or value");

    if (key == "algebra.k") config.k = int(parse_integer(key, value));
    else if (key == "algebra.norm_tolerance") config.norm_tolerance = parse_double(key, value);
    else if (key == "derivation_seed") config.derivation_seed = parse_seed(key, value);
    else if (key == "derivation_scale") config.derivation_scale = parse_double(key, value);
    else if (key == "perturbation.theta_prime") config.theta_prime = parse_double(key, value);
    else if (key == "perturbation.p") config.p = parse_double(key, value);
    else if (key == "perturbation.direction_seed") config.direction_seed = parse_seed(key, value);
    else if (key == "control.theta") config.theta = parse_double(key, value);
    else if (key == "control.theta_ratio") config.theta_ratio = parse_double(key, value);
    else if (key == "control.arity") config.arity = int(parse_integer(key, value));
    else if (key == "stabilizer.mode") {
      try {
        config.mode = dilation_mode_from_string(value);
      } catch (const std::invalid_argument& err) {
        throw ConfigError(err.what());
      }
    } else if (key == "stabilizer.max_iterations")
      config.max_iterations = int(parse_integer(key, value));
    else if (key == "stabilizer.tolerance") config.tolerance = parse_double(key, value);
    else if (key == "stabilizer.ratio_cap") config.ratio_cap = parse_double(key, value);
    else if (key == "probes.seed") config.probes.seed = parse_seed(key, value);
    else if (key == "probes.element_count") config.probes.element_count = int(parse_integer(key, value));
    else if (key == "probes.r_min") config.probes.r_min = parse_double(key, value);
    else if (key == "probes.r_max") config.probes.r_max = parse_double(key, value);
    else if (key == "probes.mu_count") config.probes.mu_count = int(parse_integer(key, value));
    else if (key == "outputs.format") config.format = output_format_from_string(value);
    else if (key == "outputs.path") config.out_path = value;
    else if (key == "outputs.ledger") config.ledger_path = value;
    else if (key == "sweep.p") {
      config.sweep_p.clear();
      for (const auto& item : split_list(value)) config.sweep_p.push_back(parse_double(key, item));
    } else if (key == "sweep.theta_prime") {
      config.sweep_theta_prime.clear();
      for (const auto& item : split_list(value))
        config.sweep_theta_prime.push_back(parse_double(key, item));
    } else if (key == "sweep.k") {
      config.sweep_k.clear();
      for (const auto& item : split_list(value))
        config.sweep_k.push_back(int(parse_integer(key, item)));
    } else if (key == "sweep.seed") {
      config.sweep_seed.clear();
      for (const auto& item : split_list(value)) config.sweep_seed.push_back(parse_seed(key, item));
    } else {
      throw ConfigError("unknown field '" + key + "' (line " + std::to_string(line_number) + ")");
    }
  }
  return config;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

std::filesystem::path apply_output_dir_override(const std::filesystem::path& path,
                                                const char* override_dir) {
  if (override_dir == nullptr || *override_dir == '\0' || path.is_absolute()) return path;
  return std::filesystem::path(override_dir) / path;
}

}  // namespace ternstab
