#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace qk::report {

enum class Suite { Algebra, Geometry, CkForms, Twistor };

std::string to_string(Suite s);
/// Accepts algebra, geometry, ckforms, twistor. Throws std::invalid_argument otherwise.
Suite parse_suite(std::string_view name);
const std::vector<Suite>& all_suites();

inline constexpr double kAlgebraicTolerance = 1e-10;
inline constexpr double kFirstOrderTolerance = 1e-5;
inline constexpr double kSecondOrderTolerance = 1e-3;

struct SuiteConfig {
  int n = 2;
  int samples = 10;
  std::uint64_t seed = 1;
  double fd_step = 1e-3;
  /// Step of the twistor operators (they nest up to four difference levels).
  double twistor_fd_step = 1e-2;
  /// Per-check overrides of the default tolerances.
  std::map<std::string, double> tolerances;
  /// Empty means every suite.
  std::set<Suite> suites;

  /// Throws std::invalid_argument on n < 2, samples < 1, steps outside (1e-6, 1e-1),
  /// negative or NaN tolerances or tolerances naming unknown checks. Zero is allowed (forces a failure).
  void validate() const;
  bool selects(Suite s) const { return suites.empty() || suites.count(s) > 0; }
  double tolerance_for(const std::string& check, double fallback) const;
};

struct CheckResult {
  std::string name;
  std::string paper_ref;
  int n = 0;
  int samples_used = 0;
  /// NaN when the check could not be evaluated.
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  double elapsed = 0.0;
  /// A measured quantity reported alongside the residual (a dimension, an eigenvalue, ...).
  std::optional<double> value;
  /// Set when evaluation threw; the check then fails.
  std::optional<std::string> error;
};

struct CheckInfo {
  std::string name;
  Suite suite;
  std::string paper_ref;
  double default_tolerance;
  std::string description;
};

/// Every registered check, in execution order.
const std::vector<CheckInfo>& registered_checks();
const CheckInfo* find_check(std::string_view name);

/// Runs the selected suites. Each check draws its samples from its own stream derived from
/// (seed, check name), so results do not depend on which other checks run.
std::vector<CheckResult> run_suite(const SuiteConfig& config);
/// Runs a single named check.
CheckResult run_check(const SuiteConfig& config, std::string_view name);

/// Exit status convention: 0 iff every result passes.
int exit_code(const std::vector<CheckResult>& results);

}  // namespace qk::report
