#include "qkverify/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace qk::report {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// NaN is not representable in JSON; it becomes null and reads back as NaN.
ordered_json number(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

double read_number(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

ordered_json config_json(const SuiteConfig& c) {
  ordered_json j;
  j["n"] = c.n;
  j["samples"] = c.samples;
  j["seed"] = c.seed;
  j["fd_step"] = c.fd_step;
  j["twistor_fd_step"] = c.twistor_fd_step;
  ordered_json suites = ordered_json::array();
  for (Suite s : all_suites())
    if (c.selects(s)) suites.push_back(to_string(s));
  j["suites"] = suites;
  ordered_json tol = ordered_json::object();
  for (const auto& [k, v] : c.tolerances) tol[k] = v;
  j["tolerances"] = tol;
  return j;
}

ordered_json result_json(const CheckResult& r, const EmitOptions& opt) {
  ordered_json j;
  j["name"] = r.name;
  j["paper_ref"] = r.paper_ref;
  j["n"] = r.n;
  j["samples_used"] = r.samples_used;
  j["max_residual"] = number(r.max_residual);
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  j["elapsed"] = opt.omit_timing ? 0.0 : r.elapsed;
  if (r.value) j["value"] = number(*r.value);
  if (r.error) j["error"] = *r.error;
  return j;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string markdown(const Report& rep, const EmitOptions& opt) {
  std::ostringstream os;
  int pass = 0;
  for (const auto& r : rep.results) pass += r.pass;
  os << "# qkverify report\n\n";
  os << "n = " << rep.config.n << ", samples = " << rep.config.samples << ", seed = " << rep.config.seed
     << ", fd_step = " << rep.config.fd_step << ", twistor_fd_step = " << rep.config.twistor_fd_step << "\n\n";
  os << "| check | ref | n | samples | max residual | tolerance | value | result | elapsed (s) |\n";
  os << "|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : rep.results) {
    os << "| " << r.name << " | " << r.paper_ref << " | " << r.n << " | " << r.samples_used << " | "
       << fmt(r.max_residual) << " | " << fmt(r.tolerance) << " | " << (r.value ? fmt(*r.value) : "") << " | "
       << (r.pass ? "PASS" : "FAIL") << " | " << (opt.omit_timing ? "-" : fmt(r.elapsed)) << " |\n";
  }
  os << "\n" << pass << " passed, " << rep.results.size() - static_cast<size_t>(pass) << " failed\n";
  for (const auto& r : rep.results)
    if (r.error) os << "\n- " << r.name << ": " << *r.error << "\n";
  return os.str();
}

void apply_config(const json& j, SuiteConfig& c) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "n") c.n = v.get<int>();
    else if (key == "samples") c.samples = v.get<int>();
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else if (key == "fd_step") c.fd_step = v.get<double>();
    else if (key == "twistor_fd_step") c.twistor_fd_step = v.get<double>();
    else if (key == "suites") {
      c.suites.clear();
      for (const auto& s : v) c.suites.insert(parse_suite(s.get<std::string>()));
    } else if (key == "tolerances") {
      for (const auto& [name, t] : v.items()) c.tolerances[name] = t.get<double>();
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
}

}  // namespace

Format parse_format(std::string_view name) {
  if (name == "json") return Format::Json;
  if (name == "markdown") return Format::Markdown;
  throw std::invalid_argument("unknown format '" + std::string(name) + "' (expected json or markdown)");
}

std::string emit_report(const Report& report, Format format, EmitOptions options) {
  if (report.results.empty()) throw std::invalid_argument("emit_report: no results");
  if (format == Format::Markdown) return markdown(report, options);
  ordered_json j;
  j["config"] = config_json(report.config);
  ordered_json results = ordered_json::array();
  int pass = 0;
  for (const auto& r : report.results) {
    results.push_back(result_json(r, options));
    pass += r.pass;
  }
  j["results"] = results;
  j["summary"] = {{"pass_count", pass}, {"fail_count", static_cast<int>(report.results.size()) - pass}};
  return j.dump(2) + "\n";
}

Report parse_report(std::string_view text) {
  try {
    const json j = json::parse(text);
    Report rep;
    apply_config(j.at("config"), rep.config);
    for (const auto& r : j.at("results")) {
      CheckResult c;
      c.name = r.at("name").get<std::string>();
      c.paper_ref = r.at("paper_ref").get<std::string>();
      c.n = r.at("n").get<int>();
      c.samples_used = r.at("samples_used").get<int>();
      c.max_residual = read_number(r.at("max_residual"));
      c.tolerance = r.at("tolerance").get<double>();
      c.pass = r.at("pass").get<bool>();
      c.elapsed = r.at("elapsed").get<double>();
      if (r.contains("value")) c.value = read_number(r.at("value"));
      if (r.contains("error")) c.error = r.at("error").get<std::string>();
      rep.results.push_back(std::move(c));
    }
    return rep;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed report: ") + e.what());
  }
}

SuiteConfig config_from_json(std::string_view text, SuiteConfig base) {
  try {
    apply_config(json::parse(text), base);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed config: ") + e.what());
  }
  return base;
}

std::string config_to_json(const SuiteConfig& config) { return config_json(config).dump(2) + "\n"; }

}  // namespace qk::report
