#pragma once
// Acceptance checks: invariants, scaling-law slopes, baseline contrasts and
// oracle cross-checks. Each check yields one pass/fail line.

#include <functional>
#include <string>
#include <vector>

namespace oco {

struct CheckResult {
  int id = 0;
  std::string name;
  bool pass = false;
  /// Measured values next to their thresholds.
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  unsigned jobs = 1;
  /// Check ids to run; empty runs all.
  std::vector<int> only;
  /// Called as each check finishes.
  std::function<void(const CheckResult&)> on_result;
};

/// Names of the checks in id order (ids start at 1).
const std::vector<std::string>& acceptance_check_names();

/// Results are returned sorted by id.
std::vector<CheckResult> run_acceptance(const AcceptanceOptions& options = {});

/// "PASS  3 balanced-scaling  <detail>  (1.2s)"
std::string format_check(const CheckResult& r);

}  // namespace oco
