#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ternstab/pipeline.hpp"
#include "ternstab/selftest.hpp"

namespace {

using namespace ternstab;

std::filesystem::path resolve_output(const std::string& path) {
  return apply_output_dir_override(path, std::getenv("TERNSTAB_OUT_DIR"));
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

struct CommonOptions {
  std::string config_path;
  std::string out_path;
  std::string format_text;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

ExperimentConfig load_with_overrides(const CommonOptions& options) {
  ExperimentConfig config = load_config_file(options.config_path);
  if (options.seed_set) config.probes.seed = options.seed;
  if (!options.format_text.empty()) config.format = output_format_from_string(options.format_text);
  if (!options.out_path.empty()) config.out_path = options.out_path;
  return config;
}

int command_run(const CommonOptions& options) {
  ExperimentConfig config = load_with_overrides(options);
  std::filesystem::path out_path = resolve_output(config.out_path);
  Ledger ledger(resolve_output(config.ledger_path));
  RunResult result = run_experiment(config, &ledger);
  write_file(out_path, config.format == OutputFormat::kJson ? certificate_file_text(result)
                                                            : run_csv_text(result));
  for (const std::string& note : result.notes) std::cout << "note: " << note << "\n";
  std::cout << "run: wrote " << out_path.string() << " (exit " << result.exit_code << ")\n";
  return result.exit_code;
}

int command_sweep(const CommonOptions& options, int jobs) {
  ExperimentConfig config = load_with_overrides(options);
  std::filesystem::path out_path =
      resolve_output(options.out_path.empty() ? "sweep.csv" : options.out_path);
  Ledger ledger(resolve_output(config.ledger_path));
  std::string csv = sweep_to_csv(config, jobs, &ledger);
  write_file(out_path, csv);

  int premise_failures = 0;
  int errors = 0;
  std::istringstream lines(csv);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty() || line.front() == '#' || line.rfind("p,", 0) == 0) continue;
    auto last_comma = line.find_last_of(',');
    std::string error = line.substr(last_comma + 1);
    if (error == "PREMISE_FAIL") ++premise_failures;
    else if (!error.empty()) ++errors;
  }
  std::cout << "sweep: wrote " << out_path.string();
  if (premise_failures > 0) std::cout << ", " << premise_failures << " premise failure(s)";
  if (errors > 0) std::cout << ", " << errors << " errored row(s)";
  std::cout << "\n";
  if (errors > 0) return kExitNotCertified;
  if (premise_failures > 0) return kExitPremiseFail;
  return kExitCertified;
}

int command_selftest(const std::string& config_path) {
  ProbeConfig probes;
  if (!config_path.empty()) {
    ExperimentConfig config = load_config_file(config_path);
    config.validate();
    probes = config.probes;
  }
  std::vector<SuiteResult> suites = run_selftest(probes);
  print_selftest_report(suites, std::cout);
  return all_passed(suites) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for the stability of ternary derivations"};
  app.require_subcommand(1);

  CommonOptions options;
  int jobs = 1;

  CLI::App* run_cmd = app.add_subcommand("run", "run one experiment and write a certificate");
  run_cmd->add_option("--config", options.config_path, "experiment config file")->required();
  run_cmd->add_option("--out", options.out_path, "output path (overrides outputs.path)");
  run_cmd->add_option("--format", options.format_text, "csv or json (overrides outputs.format)");
  run_cmd->add_option("--seed", options.seed, "probe seed override")
      ->each([&options](const std::string&) { options.seed_set = true; });

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a parameter grid and write a CSV table");
  sweep_cmd->add_option("--config", options.config_path, "sweep config file")->required();
  sweep_cmd->add_option("--out", options.out_path, "output CSV path");
  sweep_cmd->add_option("--jobs", jobs, "parallel workers")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--seed", options.seed, "probe seed override")
      ->each([&options](const std::string&) { options.seed_set = true; });

  std::string selftest_config;
  CLI::App* selftest_cmd = app.add_subcommand("selftest", "run every module's invariant suite");
  selftest_cmd->add_option("--config", selftest_config, "optional config for probe settings");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return command_run(options);
    if (sweep_cmd->parsed()) return command_sweep(options, jobs);
    return command_selftest(selftest_config);
  } catch (const ConfigError& err) {
    std::cerr << "validation error: " << err.what() << "\n";
    return ternstab::kExitValidation;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return ternstab::kExitValidation;
  }
}
