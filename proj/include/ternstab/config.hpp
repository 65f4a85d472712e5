#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ternstab/maps.hpp"
#include "ternstab/stabilizer.hpp"
#include "ternstab/verifier.hpp"

namespace ternstab {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OutputFormat { kJson, kCsv };

std::string to_string(OutputFormat format);
OutputFormat output_format_from_string(const std::string& text);

/// Declarative experiment description. The on-disk format is flat
/// `section.key = value` text, one level deep, '#' comments.
struct ExperimentConfig {
  // algebra
  int k = 2;
  double norm_tolerance = 1e-10;
  // derivation
  std::uint64_t derivation_seed = 1;
  double derivation_scale = 1.0;
  // perturbation
  double theta_prime = 0.01;
  double p = 0.5;
  std::uint64_t direction_seed = 2;
  // control: either theta (absolute) or theta_ratio (theta = ratio * theta')
  double theta = -1.0;
  double theta_ratio = -1.0;
  int arity = 6;
  // stabilizer
  DilationMode mode = DilationMode::kExpand;
  int max_iterations = 40;
  double tolerance = 1e-9;
  double ratio_cap = kDefaultRatioCap;
  // probes
  ProbeConfig probes;
  // outputs
  OutputFormat format = OutputFormat::kJson;
  std::string out_path = "certificate.json";
  std::string ledger_path = "ledger.csv";
  // sweep grid; empty lists mean the template value is the only grid point
  std::vector<double> sweep_p;
  std::vector<double> sweep_theta_prime;
  std::vector<int> sweep_k;
  std::vector<std::uint64_t> sweep_seed;

  /// Effective theta after resolving the theta/theta_ratio choice.
  double resolved_theta() const;
  /// Throws ConfigError naming the offending field. Returns advisory notes
  /// (e.g. exponent outside the corollaries' stated ranges).
  std::vector<std::string> validate() const;

  CanonicalParams canonical_params() const;
  StabilizerConfig stabilizer_config() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::filesystem::path& path);

/// Applies the output-directory override (TERNSTAB_OUT_DIR) to a relative
/// path; absolute paths and empty overrides pass through.
std::filesystem::path apply_output_dir_override(const std::filesystem::path& path,
                                                const char* override_dir);

}  // namespace ternstab
