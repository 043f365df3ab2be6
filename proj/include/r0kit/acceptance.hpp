#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace r0kit {

struct CriterionInfo {
  int id = 0;
  std::string title;
  std::vector<std::string> tags;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  /// Human-readable measured values, e.g. "max |dev| = 3.1e-13".
  std::string measured;
  std::string tolerance;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::uint64_t seed = 20240917;
  /// Tag or numeric id; empty runs everything.
  std::string filter;
};

/// The twelve cross-route checks, in order.
const std::vector<CriterionInfo>& acceptance_criteria();

bool matches_filter(const CriterionInfo& info, const std::string& filter);

/// Runs one criterion. Exceptions inside a check count as a failure and are
/// reported in `measured`.
CriterionResult run_criterion(int id, std::uint64_t seed);

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options);

/// "PASS  3  step fertility ...  measured | tolerance  (0.12 s)"
std::string format_result(const CriterionResult& result);

}  // namespace r0kit
