#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ternstab/maps.hpp"

namespace ternstab {

struct SuiteResult {
  std::string name;
  int passed = 0;
  int failed = 0;
  std::vector<std::string> failures;

  void check(bool ok, const std::string& label) {
    if (ok) {
      ++passed;
    } else {
      ++failed;
      failures.push_back(label);
    }
  }
};

using NormFn = std::function<double(const Element&)>;

/// Norm inequality ||[abc]|| <= ||a|| ||b|| ||c|| and the bracket
/// compatibility identities on seeded tuples. The norm used for products is
/// injectable so a tampered norm is caught by the suite.
SuiteResult algebra_axiom_suite(int tuples_per_identity, const NormFn& product_norm);

SuiteResult maps_metric_suite(const ProbeConfig& probes);
SuiteResult perturbation_premise_suite(const ProbeConfig& probes);
SuiteResult stabilizer_contraction_suite(const ProbeConfig& probes);
SuiteResult verifier_bound_suite(const ProbeConfig& probes);

/// Fixed-seed invariant suites of every module.
std::vector<SuiteResult> run_selftest(const ProbeConfig& probes);
std::vector<SuiteResult> run_selftest();

bool all_passed(const std::vector<SuiteResult>& suites);
void print_selftest_report(const std::vector<SuiteResult>& suites, std::ostream& out);

}  // namespace ternstab
