#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "qkverify/report.hpp"
#include "qkverify/suite.hpp"

namespace {

constexpr int kUsageError = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t parse_seed(const std::string& text, const char* what) {
  std::size_t used = 0;
  const unsigned long long v = std::stoull(text, &used, 0);
  if (used != text.size()) throw std::invalid_argument(std::string("bad ") + what + ": " + text);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical verification of conformal-Killing forms on HP^n and its twistor space"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run the verification suites");
  std::string config_path, format_name = "json", out_path, seed_text;
  std::optional<int> n, samples;
  std::optional<double> fd_step, twistor_fd_step;
  std::vector<std::string> suites, tolerance_overrides;
  bool omit_timing = false;
  run->add_option("--config", config_path, "JSON config file (flags override it)");
  run->add_option("--n", n, "quaternionic dimension (>= 2)");
  run->add_option("--samples", samples, "sample points per check");
  run->add_option("--seed", seed_text, "64-bit seed (fallback: QKVERIFY_SEED)");
  run->add_option("--fd-step", fd_step, "finite-difference step on HP^n");
  run->add_option("--twistor-fd-step", twistor_fd_step, "finite-difference step on the twistor space");
  run->add_option("--suite", suites, "algebra|geometry|ckforms|twistor (repeatable)");
  run->add_option("--format", format_name, "json|markdown");
  run->add_option("--out", out_path, "write the report here instead of stdout");
  run->add_option("--tolerance", tolerance_overrides, "NAME=VALUE (repeatable)");
  run->add_flag("--omit-timing", omit_timing, "report elapsed as 0 for byte-identical reruns");

  auto* list = app.add_subcommand("list-checks", "list registered checks");

  CLI11_PARSE(app, argc, argv);

  if (list->parsed()) {
    for (const auto& c : qk::report::registered_checks())
      std::printf("%-28s %-9s %-14s tol %-8.1e %s\n", c.name.c_str(), qk::report::to_string(c.suite).c_str(),
                  c.paper_ref.c_str(), c.default_tolerance, c.description.c_str());
    return 0;
  }

  qk::report::SuiteConfig config;
  qk::report::Format format;
  try {
    if (const char* env = std::getenv("QKVERIFY_SEED"); env && *env) config.seed = parse_seed(env, "QKVERIFY_SEED");
    if (!config_path.empty()) {
      auto doc = nlohmann::json::parse(read_file(config_path));
      // Output options may live in the file too.
      if (doc.contains("format")) {
        if (run->count("--format") == 0) format_name = doc["format"].get<std::string>();
        doc.erase("format");
      }
      if (doc.contains("out")) {
        if (run->count("--out") == 0) out_path = doc["out"].get<std::string>();
        doc.erase("out");
      }
      config = qk::report::config_from_json(doc.dump(), config);
    }
    if (n) config.n = *n;
    if (samples) config.samples = *samples;
    if (!seed_text.empty()) config.seed = parse_seed(seed_text, "--seed");
    if (fd_step) config.fd_step = *fd_step;
    if (twistor_fd_step) config.twistor_fd_step = *twistor_fd_step;
    if (!suites.empty()) {
      config.suites.clear();
      for (const auto& s : suites) config.suites.insert(qk::report::parse_suite(s));
    }
    for (const auto& t : tolerance_overrides) {
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("--tolerance expects NAME=VALUE, got " + t);
      config.tolerances[t.substr(0, eq)] = std::stod(t.substr(eq + 1));
    }
    format = qk::report::parse_format(format_name);
    config.validate();
  } catch (const std::exception& e) {
    std::cerr << "qkverify: " << e.what() << "\n";
    return kUsageError;
  }

  const auto results = qk::report::run_suite(config);
  const std::string text = qk::report::emit_report({config, results}, format, {omit_timing});
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!(out << text)) {
      std::cerr << "qkverify: cannot write " << out_path << "\n";
      return kUsageError;
    }
  }
  return qk::report::exit_code(results);
}
