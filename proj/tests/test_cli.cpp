#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "mpw/config.hpp"
#include "mpw/extreme.hpp"

namespace fs = std::filesystem;
using namespace mpw;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + MPW_BINARY + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string config(const std::string& name) {
  return std::string(MPW_CONFIG_DIR) + "/" + name;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("mpw_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string l;
  while (std::getline(in, l)) out.push_back(l);
  return out;
}

const char* kSmallMain2 = R"({
  "theorem": "MAIN2",
  "law": {"coupling": "independent", "xi": {"kind": "zeta", "alpha": 2},
          "eta": {"kind": "zeta", "alpha": 4}},
  "t": 1000, "u_grid": [0.5, 1], "primes": [2], "replicas": 300, "seed": 4
})";

}  // namespace

TEST(Cli, SampleZetaIsDeterministic) {
  const auto a = run("sample --law zeta --alpha 2 --count 3 --seed 1");
  const auto b = run("sample --law zeta --alpha 2 --count 3 --seed 1");
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const auto ls = lines(a.out);
  ASSERT_EQ(ls.size(), 3u);
  for (const auto& l : ls) EXPECT_GE(std::stoull(l), 1u);
}

TEST(Cli, SampleDegenerate) {
  const auto r = run("sample --law degenerate --value 7 --count 2");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "7\n7\n");
}

TEST(Cli, SampleInvalidAlpha) {
  const auto r = run("sample --law zeta --alpha 0.5 --count 1");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("alpha > 1"), std::string::npos);
}

TEST(Cli, SampleJsonLaw) {
  const auto r = run(R"(sample --law-json '{"kind": "table", "pmf": {"6": 1}}' --count 2 --format csv)");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "index,value\n0,6\n1,6\n");
}

TEST(Cli, SampleOverflowPrintsFactorization) {
  const auto r = run("sample --law pareto_exponent --prime 2 --alpha 0.5 --count 200 --seed 3");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("2^"), std::string::npos);
}

TEST(Cli, WalkIdenticalDegenerate) {
  const auto r = run(
      R"(walk --law-json '{"coupling": "identical", "law": {"kind": "degenerate", "value": 2}}' --n 4)");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["n"], 4);
  EXPECT_NEAR(j["log_pi"].get<double>(), 4 * std::log(2.0), 1e-14);
  EXPECT_NEAR(j["log_lcm_theta"].get<double>(), 4 * std::log(2.0), 1e-14);
  EXPECT_EQ(j["t_max"]["2"], 4);
}

TEST(Cli, WalkXiOneAndTrace) {
  const auto dir = scratch("walk");
  const auto trace = dir / "trace.csv";
  const auto r = run(
      R"(walk --law-json '{"coupling": "xi_one", "eta": {"kind": "degenerate", "value": 6}}' --n 5 --trace )" +
      trace.string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NEAR(Json::parse(r.out)["log_lcm_theta"].get<double>(), std::log(6.0), 1e-15);
  EXPECT_EQ(lines(slurp(trace)).size(), 6u);
}

TEST(Cli, WalkTraceIsNondecreasing) {
  const auto dir = scratch("walk2");
  const auto trace = dir / "trace.csv";
  const auto r = run(
      R"(walk --law-json '{"coupling": "independent", "xi": {"kind": "zeta", "alpha": 2}, "eta": {"kind": "zeta", "alpha": 1.5}}' --n 300 --seed 9 --trace )" +
      trace.string());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto ls = lines(slurp(trace));
  ASSERT_EQ(ls.size(), 301u);
  double prev = 0.0;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const double v = std::stod(ls[i].substr(ls[i].rfind(',') + 1));
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(Cli, ExperimentMain2Passes) {
  const auto dir = scratch("main2");
  const auto r = run("experiment --config " + config("main2.json") + " --out-dir " + dir.string());
  EXPECT_EQ(r.code, 0) << r.out;
  const auto j = Json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(j["status"], "pass");
  for (const auto& k : j["ks_checks"]) EXPECT_GE(k["ks_p"].get<double>(), 0.01);
  for (const char* f : {"report.txt", "plot.csv", "replicas.csv", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
}

TEST(Cli, ExperimentMain11PlotOracleIsFrechet) {
  const auto dir = scratch("main11");
  const auto r =
      run("experiment --config " + config("main11_xi_one.json") + " --out-dir " + dir.string());
  EXPECT_EQ(r.code, 0) << r.out;
  const auto ls = lines(slurp(dir / "plot.csv"));
  ASSERT_GT(ls.size(), 1u);
  EXPECT_EQ(ls[0], "statistic,p,u,x,empirical_cdf,oracle_cdf");
  std::size_t checked = 0;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    std::vector<std::string> f;
    std::istringstream in(ls[i]);
    std::string cell;
    while (std::getline(in, cell, ',')) f.push_back(cell);
    if (f[0] != "max_T/a") continue;
    const double u = std::stod(f[2]), x = std::stod(f[3]), oracle = std::stod(f[5]);
    EXPECT_EQ(oracle, frechet_cdf(x, u, 1.0, 0.5));
    ++checked;
  }
  EXPECT_GT(checked, 100u);
}

TEST(Cli, ExperimentMissingReplicas) {
  const auto dir = scratch("missing");
  auto doc = Json::parse(kSmallMain2);
  doc.erase("replicas");
  std::ofstream(dir / "c.json") << doc.dump();
  const auto r = run("experiment --config " + (dir / "c.json").string() + " --out-dir " +
                     (dir / "out").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("replicas"), std::string::npos);
}

TEST(Cli, ExperimentAdvisoryExitsZero) {
  const auto dir = scratch("advisory");
  auto doc = Json::parse(kSmallMain2);
  doc["law"]["eta"]["alpha"] = 2.2;
  std::ofstream(dir / "c.json") << doc.dump();
  const auto r = run("experiment --config " + (dir / "c.json").string() + " --out-dir " +
                     (dir / "out").string() + " --format json");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(Json::parse(slurp(dir / "out" / "report.json"))["status"], "advisory");
}

TEST(Cli, ExperimentFailureExitsOne) {
  // ks_alpha near 1 makes every KS check fail
  const auto dir = scratch("fail");
  auto doc = Json::parse(kSmallMain2);
  doc["tolerances"] = {{"ks_alpha", 0.999999}};
  std::ofstream(dir / "c.json") << doc.dump();
  const auto r = run("experiment --config " + (dir / "c.json").string() + " --out-dir " +
                     (dir / "out").string());
  EXPECT_EQ(r.code, 1);
}

TEST(Cli, ExperimentBytesIndependentOfThreads) {
  const auto dir = scratch("threads");
  std::ofstream(dir / "c.json") << kSmallMain2;
  const std::string c = (dir / "c.json").string();
  ASSERT_EQ(run("experiment --config " + c + " --threads 1 --out-dir " + (dir / "a").string()).code, 0);
  ASSERT_EQ(run("experiment --config " + c + " --threads 3 --out-dir " + (dir / "b").string()).code, 0);
  for (const char* f : {"report.json", "report.txt", "plot.csv", "replicas.csv"}) {
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
  // replay from the manifest
  ASSERT_EQ(run("replay --manifest " + (dir / "a" / "manifest.json").string() + " --out-dir " +
                (dir / "c").string())
                .code,
            0);
  for (const char* f : {"report.json", "plot.csv", "replicas.csv"}) {
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "c" / f)) << f;
  }
  const auto m = Json::parse(slurp(dir / "a" / "manifest.json"));
  EXPECT_EQ(m["seed"], 4);
  EXPECT_EQ(m["config_sha256"].get<std::string>().size(), 64u);
}

TEST(Cli, SeedOverrides) {
  const auto dir = scratch("seed");
  std::ofstream(dir / "c.json") << kSmallMain2;
  const std::string c = (dir / "c.json").string();
  run("experiment --config " + c + " --out-dir " + (dir / "env").string(), "MPW_SEED=9");
  run("experiment --config " + c + " --seed 9 --out-dir " + (dir / "flag").string(),
      "MPW_SEED=11");
  const auto env = Json::parse(slurp(dir / "env" / "report.json"));
  const auto flag = Json::parse(slurp(dir / "flag" / "report.json"));
  EXPECT_EQ(env["seed"], 9);
  EXPECT_EQ(flag["seed"], 9);
  EXPECT_EQ(slurp(dir / "env" / "replicas.csv"), slurp(dir / "flag" / "replicas.csv"));
  EXPECT_EQ(run("sample --law zeta --alpha 2 --count 1", "MPW_SEED=abc").code, 2);
}

TEST(Cli, CheckConditionsVerdicts) {
  const auto holds = run(
      R"(check-conditions --law-json '{"coupling": "independent", "xi": {"kind": "zeta", "alpha": 2}, "eta": {"kind": "zeta", "alpha": 4}}' --format json)");
  ASSERT_EQ(holds.code, 0) << holds.out;
  const auto h = Json::parse(holds.out);
  EXPECT_EQ(h["verdict"], "holds");
  for (std::size_t i = 1; i < h["rows"].size(); ++i) {
    EXPECT_LT(h["rows"][i]["ratio_eta"].get<double>(), h["rows"][i - 1]["ratio_eta"].get<double>());
  }
  const auto fails = run(
      R"(check-conditions --law-json '{"coupling": "independent", "xi": {"kind": "zeta", "alpha": 2}, "eta": {"kind": "zeta", "alpha": 2.2}}')");
  EXPECT_EQ(fails.code, 0);
  EXPECT_NE(fails.out.find("verdict     fails"), std::string::npos);
}

TEST(Cli, CheckConditionsBoundary) {
  const auto r = run("check-conditions --config " + config("main2.json") +
                     " --n-grid 100000000 --prime-limit 1000");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("100.00"), std::string::npos);
  EXPECT_NE(r.out.find(" 97 "), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("walk --n 3").code, 2);
  EXPECT_EQ(run("sample --law zeta --alpha 2 --format xml").code, 2);
  EXPECT_EQ(run("--help").code, 0);
}
