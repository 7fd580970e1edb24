#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qkverify/suite.hpp"

namespace qk::report {

enum class Format { Json, Markdown };

/// Accepts "json" and "markdown". Throws std::invalid_argument otherwise.
Format parse_format(std::string_view name);

struct Report {
  SuiteConfig config;
  std::vector<CheckResult> results;
};

struct EmitOptions {
  /// Write elapsed as 0 so that reruns are byte-identical.
  bool omit_timing = false;
};

/// JSON: {config, results[], summary{pass_count, fail_count}}. Markdown: one table row per check.
/// Throws std::invalid_argument on an empty result list.
std::string emit_report(const Report& report, Format format, EmitOptions options = {});
/// Inverse of the JSON emitter. Throws std::invalid_argument on malformed input.
Report parse_report(std::string_view json);

/// SuiteConfig from a JSON document with optional keys n, samples, seed, fd_step,
/// twistor_fd_step, suites (array), tolerances (object). Unknown keys are rejected.
SuiteConfig config_from_json(std::string_view json, SuiteConfig base = {});
std::string config_to_json(const SuiteConfig& config);

}  // namespace qk::report
