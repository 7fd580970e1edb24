#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <regex>

#include "json.hpp"
#include "qkverify/report.hpp"
#include "qkverify/sampling.hpp"
#include "qkverify/suite.hpp"

using namespace qk::report;

namespace {

SuiteConfig algebra_only() {
  SuiteConfig c;
  c.suites = {Suite::Algebra};
  return c;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST(Config, Validation) {
  SuiteConfig c;
  EXPECT_NO_THROW(c.validate());
  c.n = 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.samples = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.fd_step = 0.2;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.tolerances["ck_equation"] = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.tolerances["no_such_check"] = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.tolerances["ck_equation"] = 0.0;
  EXPECT_NO_THROW(c.validate());
  EXPECT_THROW(run_suite(SuiteConfig{.n = 0}), std::invalid_argument);
}

TEST(Config, ParsesNamesAndJson) {
  EXPECT_EQ(parse_suite("ckforms"), Suite::CkForms);
  EXPECT_THROW(parse_suite("topology"), std::invalid_argument);
  EXPECT_EQ(parse_format("markdown"), Format::Markdown);
  EXPECT_THROW(parse_format("xml"), std::invalid_argument);

  const auto c = config_from_json(R"({"n": 3, "samples": 4, "seed": 18446744073709551615, "fd_step": 0.002,
                                      "suites": ["twistor", "algebra"], "tolerances": {"ck_equation": 1e-4}})");
  EXPECT_EQ(c.n, 3);
  EXPECT_EQ(c.samples, 4);
  EXPECT_EQ(c.seed, 18446744073709551615ull);
  EXPECT_DOUBLE_EQ(c.fd_step, 0.002);
  EXPECT_EQ(c.suites, (std::set<Suite>{Suite::Twistor, Suite::Algebra}));
  EXPECT_DOUBLE_EQ(c.tolerances.at("ck_equation"), 1e-4);
  EXPECT_THROW(config_from_json(R"({"bogus": 1})"), std::invalid_argument);
  EXPECT_THROW(config_from_json("not json"), std::invalid_argument);
  EXPECT_EQ(config_from_json(config_to_json(c)).tolerances, c.tolerances);
}

TEST(Registry, NamesAreUniqueAndRefsAreTagged) {
  std::set<std::string> names;
  const std::regex tag(R"(^(Eq\. \([a-z0-9]+\)|Lemma [a-z0-9]+|Theorem [a-z0-9()]+|§[1-5])$)");
  for (const auto& c : registered_checks()) {
    EXPECT_TRUE(names.insert(c.name).second) << c.name;
    EXPECT_TRUE(std::regex_match(c.paper_ref, tag)) << c.name << ": " << c.paper_ref;
    EXPECT_GT(c.default_tolerance, 0.0);
  }
  EXPECT_NE(find_check("ck_dimension"), nullptr);
  EXPECT_EQ(find_check("nope"), nullptr);
}

TEST(Sampling, StreamsAreDeterministicAndIndependent) {
  auto a = qk::derive_rng(7, "x"), b = qk::derive_rng(7, "x"), c = qk::derive_rng(7, "y"), d = qk::derive_rng(8, "x");
  const auto va = a();
  EXPECT_EQ(va, b());
  EXPECT_NE(va, c());
  EXPECT_NE(va, d());
  auto r = qk::derive_rng(1, "ball");
  for (int i = 0; i < 100; ++i) EXPECT_LE(qk::sample_ball(r, 8, 0.5).norm(), 0.5);
  EXPECT_NEAR(qk::sample_unit_vector(r, 5).norm(), 1.0, 1e-15);
}

TEST(RunSuite, AlgebraPassesQuickly) {
  const auto start = std::chrono::steady_clock::now();
  const auto results = run_suite(algebra_only());
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ASSERT_FALSE(results.empty());
  for (const auto& r : results) {
    EXPECT_TRUE(r.pass) << r.name;
    EXPECT_EQ(r.pass, r.max_residual <= r.tolerance);
    EXPECT_EQ(r.n, 2);
  }
  EXPECT_EQ(exit_code(results), 0);
  EXPECT_LT(elapsed, 1.0);
}

TEST(RunSuite, ResultsDoNotDependOnSelection) {
  SuiteConfig c;
  c.suites = {Suite::Algebra, Suite::Geometry};
  const auto all = run_suite(c);
  for (const auto* name : {"decomposable_formulas", "konstant_formula", "riemann_model"}) {
    const auto alone = run_check(c, name);
    const auto it = std::find_if(all.begin(), all.end(), [&](const CheckResult& r) { return r.name == name; });
    ASSERT_NE(it, all.end());
    EXPECT_TRUE(same_bits(alone.max_residual, it->max_residual)) << name;
    EXPECT_EQ(alone.samples_used, it->samples_used);
  }
  EXPECT_THROW(run_check(c, "unknown"), std::invalid_argument);
}

TEST(RunSuite, SeedChangesSamplesButNotVerdicts) {
  SuiteConfig a = algebra_only(), b = algebra_only();
  b.seed = 99;
  const auto ra = run_suite(a), rb = run_suite(b);
  ASSERT_EQ(ra.size(), rb.size());
  bool any_different = false;
  for (size_t i = 0; i < ra.size(); ++i) {
    EXPECT_EQ(ra[i].pass, rb[i].pass);
    any_different |= !same_bits(ra[i].max_residual, rb[i].max_residual);
  }
  EXPECT_TRUE(any_different);
}

TEST(RunSuite, ZeroToleranceForcesOneFailure) {
  SuiteConfig c;
  c.suites = {Suite::Geometry};
  c.tolerances["riemann_model"] = 0.0;
  const auto results = run_suite(c);
  int failed = 0;
  for (const auto& r : results) failed += !r.pass;
  EXPECT_EQ(failed, 1);
  EXPECT_EQ(exit_code(results), 1);
  const auto j = nlohmann::json::parse(emit_report({c, results}, Format::Json));
  EXPECT_EQ(j["summary"]["fail_count"], 1);
  EXPECT_EQ(j["summary"]["pass_count"], static_cast<int>(results.size()) - 1);
}

TEST(Emit, JsonShapeAndRoundTrip) {
  const SuiteConfig c = algebra_only();
  auto results = run_suite(c);
  CheckResult odd;
  odd.name = "synthetic";
  odd.paper_ref = "§2";
  odd.n = 2;
  odd.max_residual = std::numeric_limits<double>::quiet_NaN();
  odd.tolerance = 0.1 + 0.2;
  odd.elapsed = 1.0 / 3.0;
  odd.value = std::nextafter(1.0, 2.0);
  odd.error = "boom";
  results.push_back(odd);

  const std::string text = emit_report({c, results}, Format::Json);
  const auto j = nlohmann::json::parse(text);
  ASSERT_TRUE(j.contains("config") && j.contains("results") && j.contains("summary"));
  EXPECT_EQ(j["summary"]["fail_count"], 1);
  for (const char* key : {"name", "paper_ref", "n", "samples_used", "max_residual", "tolerance", "pass", "elapsed"})
    EXPECT_TRUE(j["results"][0].contains(key)) << key;

  const Report back = parse_report(text);
  ASSERT_EQ(back.results.size(), results.size());
  for (size_t i = 0; i < results.size(); ++i) {
    const auto &a = results[i], &b = back.results[i];
    EXPECT_EQ(a.name, b.name);
    EXPECT_EQ(a.paper_ref, b.paper_ref);
    EXPECT_EQ(a.n, b.n);
    EXPECT_EQ(a.samples_used, b.samples_used);
    EXPECT_TRUE(same_bits(a.max_residual, b.max_residual) || (std::isnan(a.max_residual) && std::isnan(b.max_residual)));
    EXPECT_TRUE(same_bits(a.tolerance, b.tolerance));
    EXPECT_TRUE(same_bits(a.elapsed, b.elapsed));
    EXPECT_EQ(a.pass, b.pass);
    EXPECT_EQ(a.value.has_value(), b.value.has_value());
    if (a.value) EXPECT_TRUE(same_bits(*a.value, *b.value));
    EXPECT_EQ(a.error, b.error);
  }
  EXPECT_EQ(back.config.seed, c.seed);
  EXPECT_EQ(emit_report(back, Format::Json), text);
}

TEST(Emit, MarkdownHasOneRowPerCheck) {
  const SuiteConfig c = algebra_only();
  const auto results = run_suite(c);
  const std::string md = emit_report({c, results}, Format::Markdown);
  size_t rows = 0;
  for (const auto& r : results) {
    EXPECT_NE(md.find("| " + r.name + " |"), std::string::npos) << r.name;
    ++rows;
  }
  size_t table_lines = 0, pos = 0;
  while ((pos = md.find("\n| ", pos)) != std::string::npos) {
    ++table_lines;
    ++pos;
  }
  EXPECT_EQ(table_lines, rows + 1);  // plus the header row
}

TEST(Emit, DeterministicWithoutTiming) {
  const SuiteConfig c = algebra_only();
  const std::string a = emit_report({c, run_suite(c)}, Format::Json, {true});
  const std::string b = emit_report({c, run_suite(c)}, Format::Json, {true});
  EXPECT_EQ(a, b);
}

TEST(Emit, RejectsEmptyResults) {
  EXPECT_THROW(emit_report({SuiteConfig{}, {}}, Format::Json), std::invalid_argument);
  EXPECT_THROW(parse_report("{}"), std::invalid_argument);
}
