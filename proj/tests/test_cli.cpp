#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int status;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + QKVERIFY_CLI_PATH + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (size_t n = fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  const int raw = pclose(pipe);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("qkverify_cli_" + name); }

}  // namespace

TEST(Cli, ListChecks) {
  const auto r = run("list-checks");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("ck_dimension"), std::string::npos);
  EXPECT_NE(r.out.find("obata_equation"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_NE(run("").status, 0);
  EXPECT_EQ(run("run --suite algebra --format xml").status, 2);
  EXPECT_EQ(run("run --suite topology").status, 2);
  EXPECT_EQ(run("run --suite algebra --n 1").status, 2);
  EXPECT_EQ(run("run --suite algebra --tolerance nonsense").status, 2);
  EXPECT_EQ(run("run --suite algebra --config /nonexistent/config.json").status, 2);
}

TEST(Cli, JsonReportAndExitCode) {
  const auto ok = run("run --suite algebra");
  EXPECT_EQ(ok.status, 0);
  const auto j = nlohmann::json::parse(ok.out);
  EXPECT_EQ(j["summary"]["fail_count"], 0);

  const auto bad = run("run --suite geometry --tolerance riemann_model=0");
  EXPECT_EQ(bad.status, 1);
  EXPECT_EQ(nlohmann::json::parse(bad.out)["summary"]["fail_count"], 1);
}

TEST(Cli, ConfigFileFlagsAndEnvironment) {
  const fs::path cfg = temp_file("config.json");
  std::ofstream(cfg) << R"({"n": 3, "samples": 2, "seed": 5, "suites": ["algebra"], "format": "markdown"})";

  const auto from_file = run("run --config " + cfg.string());
  EXPECT_EQ(from_file.status, 0);
  EXPECT_NE(from_file.out.find("n = 3, samples = 2, seed = 5"), std::string::npos);

  const auto overridden = run("run --config " + cfg.string() + " --n 2 --seed 11 --format json");
  const auto j = nlohmann::json::parse(overridden.out);
  EXPECT_EQ(j["config"]["n"], 2);
  EXPECT_EQ(j["config"]["samples"], 2);
  EXPECT_EQ(j["config"]["seed"], 11);

  const auto env = run("run --suite algebra --samples 1", "QKVERIFY_SEED=77");
  EXPECT_EQ(nlohmann::json::parse(env.out)["config"]["seed"], 77);
  const auto flag_wins = run("run --suite algebra --samples 1 --seed 3", "QKVERIFY_SEED=77");
  EXPECT_EQ(nlohmann::json::parse(flag_wins.out)["config"]["seed"], 3);
  fs::remove(cfg);
}

TEST(Cli, OutPathAndDeterminism) {
  const fs::path a = temp_file("a.json"), b = temp_file("b.json");
  EXPECT_EQ(run("run --suite algebra --suite geometry --samples 3 --omit-timing --out " + a.string()).status, 0);
  EXPECT_EQ(run("run --suite geometry --suite algebra --samples 3 --omit-timing --out " + b.string()).status, 0);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string ta = slurp(a), tb = slurp(b);
  EXPECT_FALSE(ta.empty());
  EXPECT_EQ(ta, tb);
  fs::remove(a);
  fs::remove(b);
}
