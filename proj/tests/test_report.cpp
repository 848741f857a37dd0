#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "mpw/limit_lab.hpp"
#include "mpw/report.hpp"

using namespace mpw;

namespace {

ExperimentReport sample_report() {
  ExperimentConfig c{Theorem::kMcltS,
                     JointStepLaw::independent(StepLaw::zeta(2.0), StepLaw::zeta(4.0))};
  c.t = 100;
  c.u_grid = {0.5, 1.0};
  c.primes = {2, 3};
  c.replicas = 200;
  c.seed = 3;
  return run_experiment(c);
}

}  // namespace

TEST(Report, FormatDoubleRoundTrips) {
  for (const double x : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5e17}) {
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
}

TEST(Report, JsonLeavesOutRuntime) {
  auto r = sample_report();
  const auto a = to_json(r).dump();
  r.runtime_seconds += 100.0;
  EXPECT_EQ(to_json(r).dump(), a);
  EXPECT_FALSE(to_json(r).contains("runtime_seconds"));
}

TEST(Report, JsonFields) {
  const auto j = to_json(sample_report());
  EXPECT_EQ(j["theorem"], "MCLT_S");
  EXPECT_EQ(j["status"], "pass");
  ASSERT_FALSE(j["ks_checks"].empty());
  for (const auto& k : j["ks_checks"]) {
    EXPECT_GE(k["ks_p"].get<double>(), 0.0);
    EXPECT_LE(k["ks_p"].get<double>(), 1.0);
  }
  EXPECT_TRUE(j["conditions"].is_null());
}

TEST(Report, NanBecomesNull) {
  ExperimentReport r;
  r.mu_xi = std::numeric_limits<double>::quiet_NaN();
  EXPECT_TRUE(to_json(r)["mu_xi"].is_null());
}

TEST(Report, PlotCsvHeaderAndRows) {
  const auto r = sample_report();
  std::ostringstream out;
  write_plot_csv(out, r);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "statistic,p,u,x,empirical_cdf,oracle_cdf");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 5);
  }
  std::size_t expected = 0;
  for (const auto& s : r.plots) expected += s.x.size();
  EXPECT_EQ(rows, expected);
}

TEST(Report, ReplicaCsv) {
  const auto r = sample_report();
  std::ostringstream out;
  write_replica_csv(out, r);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("replica,", 0), 0u);
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, r.replicas);
}

TEST(Report, TextMentionsEveryCheck) {
  const auto r = sample_report();
  std::ostringstream out;
  write_report_text(out, r);
  const std::string s = out.str();
  EXPECT_NE(s.find("KS checks"), std::string::npos);
  EXPECT_NE(s.find("Covariance checks"), std::string::npos);
  EXPECT_NE(s.find("status     pass"), std::string::npos);
}

TEST(Report, ConditionsText) {
  const auto law = JointStepLaw::independent(StepLaw::zeta(2.0), StepLaw::zeta(4.0));
  const auto c = check_main2_conditions(law, {100000000}, 1000);
  std::ostringstream out;
  write_conditions_text(out, c, law.xi_marginal());
  // n^{1/(2 alpha)} = 100 for alpha = 2
  EXPECT_NE(out.str().find("100.00"), std::string::npos);
  EXPECT_NE(out.str().find("verdict"), std::string::npos);
}
