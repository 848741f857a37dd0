#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mpw/extreme.hpp"
#include "mpw/limit_lab.hpp"
#include "mpw/report.hpp"

using namespace mpw;

namespace {

ExperimentConfig small(Theorem th, JointStepLaw law, double t = 1000, std::size_t m = 400) {
  ExperimentConfig c{th, std::move(law)};
  c.t = t;
  c.u_grid = {0.5, 1.0};
  c.primes = {2, 3};
  c.replicas = m;
  c.seed = 17;
  return c;
}

JointStepLaw zeta2_zeta4() {
  return JointStepLaw::independent(StepLaw::zeta(2.0), StepLaw::zeta(4.0));
}

JointStepLaw zeta2_pareto() {
  return JointStepLaw::independent(StepLaw::zeta(2.0), StepLaw::pareto_exponent(2, 0.5));
}

const KsCheck* find_ks(const ExperimentReport& r, const std::string& stat, std::uint64_t p,
                       double u) {
  for (const auto& k : r.ks_checks) {
    if (k.statistic == stat && k.prime == p && k.u == u) return &k;
  }
  return nullptr;
}

std::vector<double> column(const ExperimentReport& r, const std::string& name) {
  const auto& cols = r.replica_table.columns;
  const auto it = std::find(cols.begin(), cols.end(), name);
  EXPECT_NE(it, cols.end()) << name;
  std::vector<double> out;
  if (it == cols.end()) return out;
  const std::size_t j = it - cols.begin();
  for (const auto& row : r.replica_table.rows) out.push_back(row[j]);
  return out;
}

}  // namespace

TEST(LimitLab, MclTsTargetsGeometricVariance) {
  const auto r = run_mclt_s(small(Theorem::kMcltS, zeta2_zeta4()));
  const auto* k = find_ks(r, "S", 2, 1.0);
  ASSERT_NE(k, nullptr);
  EXPECT_NEAR(k->target_variance, 4.0 / 9.0, 1e-13);
  EXPECT_EQ(k->target_mean, 0.0);
  for (const auto& c : r.covariance_checks) {
    if (c.p != c.q) {
      EXPECT_EQ(c.predicted, 0.0);
    }
  }
  for (const auto& k2 : r.ks_checks) {
    EXPECT_GE(k2.ks.p_value, 0.0);
    EXPECT_LE(k2.ks.p_value, 1.0);
  }
}

TEST(LimitLab, DegenerateVarianceIsSkipped) {
  auto c = small(Theorem::kMcltS, JointStepLaw::identical(StepLaw::degenerate(2)), 100, 100);
  c.primes = {2};
  const auto r = run_experiment(c);
  EXPECT_TRUE(r.ks_checks.empty());
  EXPECT_TRUE(std::any_of(r.notes.begin(), r.notes.end(), [](const std::string& n) {
    return n.find("Var lambda_p(xi) = 0") != std::string::npos;
  }));
  EXPECT_EQ(r.status, "pass");
}

TEST(LimitLab, IdenticalCouplingMatchesMclTs) {
  const auto law = JointStepLaw::identical(StepLaw::zeta(2.0));
  const auto s = run_experiment(small(Theorem::kMcltS, law));
  const auto t = run_experiment(small(Theorem::kMcltT, law));
  ASSERT_EQ(s.ks_checks.size(), t.ks_checks.size());
  for (std::size_t i = 0; i < s.ks_checks.size(); ++i) {
    EXPECT_EQ(s.ks_checks[i].ks.statistic, t.ks_checks[i].ks.statistic);
    EXPECT_EQ(s.ks_checks[i].sample_mean, t.ks_checks[i].sample_mean);
  }
  EXPECT_EQ(s.replica_table.rows, t.replica_table.rows);
}

TEST(LimitLab, IdenticalCouplingMain2MatchesLogPi) {
  const auto law = JointStepLaw::identical(StepLaw::zeta(2.0));
  const auto a = run_experiment(small(Theorem::kLogPiClt, law));
  const auto b = run_experiment(small(Theorem::kMain2, law));
  for (const double u : {0.5, 1.0}) {
    const auto* ka = find_ks(a, "log_pi", 0, u);
    const auto* kb = find_ks(b, "log_lcm_theta", 0, u);
    ASSERT_TRUE(ka && kb);
    EXPECT_EQ(ka->ks.statistic, kb->ks.statistic);
    EXPECT_EQ(ka->sample_mean, kb->sample_mean);
    EXPECT_EQ(column(a, "log_pi.u" + std::string(u == 1.0 ? "1" : "0.5")),
              column(b, "log_lcm_theta.u" + std::string(u == 1.0 ? "1" : "0.5")));
  }
  for (const auto& q : b.quantile_checks) EXPECT_EQ(q.value, 0.0);
  EXPECT_EQ(b.status, "pass");
}

TEST(LimitLab, ThreadCountDoesNotChangeReport) {
  auto c = small(Theorem::kMain11, zeta2_pareto(), 1000, 300);
  c.threads = 1;
  const auto one = run_experiment(c);
  c.threads = 4;
  const auto four = run_experiment(c);
  EXPECT_EQ(to_json(one).dump(), to_json(four).dump());
  EXPECT_EQ(one.replica_table.rows, four.replica_table.rows);
}

TEST(LimitLab, SeedChangesReport) {
  auto c = small(Theorem::kMcltS, zeta2_zeta4(), 100, 100);
  const auto a = run_experiment(c);
  c.seed = 18;
  const auto b = run_experiment(c);
  EXPECT_NE(a.replica_table.rows, b.replica_table.rows);
}

TEST(LimitLab, Main2ConditionFailureIsAdvisory) {
  const auto law = JointStepLaw::independent(StepLaw::zeta(2.0), StepLaw::zeta(2.2));
  const auto r = run_experiment(small(Theorem::kMain2, law));
  EXPECT_FALSE(r.hypothesis_met);
  EXPECT_EQ(r.status, "advisory");
  ASSERT_TRUE(r.conditions);
  EXPECT_EQ(r.conditions->verdict, "fails");
  for (const auto& k : r.ks_checks) EXPECT_FALSE(k.asserted);
  EXPECT_TRUE(r.passed());
}

TEST(LimitLab, Main2RecordsConditionsWhenTheyHold) {
  const auto r = run_experiment(small(Theorem::kMain2, zeta2_zeta4()));
  ASSERT_TRUE(r.conditions);
  EXPECT_EQ(r.conditions->verdict, "holds");
  EXPECT_TRUE(r.hypothesis_met);
  EXPECT_EQ(r.quantile_checks.size(), 3u);
}

TEST(LimitLab, LogPiRejectsDegenerateXi) {
  EXPECT_THROW(
      run_experiment(small(Theorem::kLogPiClt, JointStepLaw::identical(StepLaw::degenerate(5)))),
      std::invalid_argument);
}

TEST(LimitLab, Main11PlotUsesFrechetOracle) {
  const auto r = run_experiment(small(Theorem::kMain11, zeta2_pareto(), 1000, 300));
  bool seen = false;
  for (const auto& s : r.plots) {
    if (s.statistic != "max_T/a") continue;
    seen = true;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      EXPECT_DOUBLE_EQ(s.oracle_cdf[i], frechet_cdf(s.x[i], s.u, 1.0, 0.5));
    }
  }
  EXPECT_TRUE(seen);
  // p = 3 is off the heavy-tailed set: its scaled maxima collapse.
  for (const auto& q : r.quantile_checks) {
    EXPECT_EQ(q.prime, 3u);
    EXPECT_LT(q.value, 0.01);
  }
}

TEST(LimitLab, Main11RequiresRegularVariation) {
  EXPECT_THROW(run_experiment(small(Theorem::kMain11, zeta2_zeta4())), std::invalid_argument);
}

TEST(LimitLab, CorollaryRequiresXiOne) {
  auto c = small(Theorem::kIidLcmCorollary, zeta2_pareto());
  EXPECT_THROW(run_experiment(c), std::invalid_argument);
  c.law = JointStepLaw::xi_degenerate_one(StepLaw::pareto_exponent(2, 0.5));
  c.primes = {2};
  const auto r = run_experiment(c);
  EXPECT_EQ(r.ks_checks.size(), 4u);  // Frechet and oracle per u
}

TEST(LimitLab, TwoHeavyPrimesUseJointOracle) {
  const auto eta =
      StepLaw::product({StepLaw::pareto_exponent(2, 0.5), StepLaw::pareto_exponent(3, 0.5)});
  auto c = small(Theorem::kMain11, JointStepLaw::xi_degenerate_one(eta), 1000, 300);
  c.u_grid = {1.0};
  const auto r = run_experiment(c);
  EXPECT_TRUE(std::any_of(r.ks_checks.begin(), r.ks_checks.end(), [](const KsCheck& k) {
    return k.statistic.find("max") != std::string::npos && k.prime == 0;
  }));
  auto lc = c;
  lc.theorem = Theorem::kMain21;
  const auto l = run_experiment(lc);
  ASSERT_EQ(l.ks_checks.size(), 1u);  // oracle only when two primes are heavy
  EXPECT_NE(l.ks_checks[0].target.find("oracle"), std::string::npos);
}

TEST(LimitLab, XiOnePerturbationOnlyShrinks) {
  // T_n(p)/sqrt(t) = lambda_p(eta_n)/sqrt(t): the 99th percentile falls with t.
  const auto law = JointStepLaw::xi_degenerate_one(StepLaw::zeta(2.0));
  auto c = small(Theorem::kMcltT, law, 100, 400);
  c.primes = {2};
  c.u_grid = {1.0};
  const auto lo = run_experiment(c);
  c.t = 10000;
  const auto hi = run_experiment(c);
  ASSERT_EQ(lo.quantile_checks.size(), 1u);
  EXPECT_LT(hi.quantile_checks[0].value, lo.quantile_checks[0].value);
  EXPECT_EQ(lo.status, "pass");
}

TEST(LimitLab, HeavyXiIsHypothesisUnmet) {
  const auto law = JointStepLaw::identical(StepLaw::pareto_exponent(2, 0.5));
  auto c = small(Theorem::kMcltS, law, 100, 100);
  c.primes = {2};
  const auto r = run_experiment(c);
  EXPECT_FALSE(r.hypothesis_met);
  EXPECT_EQ(r.status, "advisory");
}

TEST(LimitLab, ValidateRejectsBadConfigs) {
  auto c = small(Theorem::kMcltS, zeta2_zeta4());
  c.replicas = 99;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = small(Theorem::kMcltS, zeta2_zeta4());
  c.u_grid = {1.0, 0.5};
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = small(Theorem::kMcltS, zeta2_zeta4());
  c.primes = {4};
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = small(Theorem::kMcltS, zeta2_zeta4());
  c.t = 0.5;
  EXPECT_THROW(validate(c), std::invalid_argument);
}

TEST(LimitLab, TheoremNamesRoundTrip) {
  for (const auto t : {Theorem::kMcltS, Theorem::kMcltT, Theorem::kMain1, Theorem::kMain11,
                       Theorem::kLogPiClt, Theorem::kMain2, Theorem::kMain21,
                       Theorem::kIidLcmCorollary}) {
    EXPECT_EQ(theorem_from_string(to_string(t)), t);
  }
  EXPECT_THROW(theorem_from_string("MAIN3"), std::invalid_argument);
}

TEST(LimitLab, EmpiricalQuantile) {
  EXPECT_EQ(empirical_quantile({3, 1, 2}, 0.5), 2.0);
  EXPECT_EQ(empirical_quantile({1, 2, 3, 4}, 0.5), 2.5);
  EXPECT_EQ(empirical_quantile({1, 2, 3, 4}, 1.0), 4.0);
}

// Exact oracle draws in place of simulated statistics: rejections at 1%
// over 100 reseeded runs stay at or below 3%.
TEST(LimitLab, NullCalibrationWithOracleDraws) {
  const std::size_t m = 2000;
  int normal_rej = 0, frechet_rej = 0, two_sample_rej = 0;
  for (std::uint64_t run = 0; run < 100; ++run) {
    RandomStream rng = RandomStream::derive(500, run);
    std::normal_distribution<double> z(0.0, std::sqrt(4.0 / 9.0));
    std::vector<double> x(m);
    for (auto& v : x) v = z(rng.engine());
    normal_rej += ks_normal(x, 0.0, 4.0 / 9.0).p_value < 0.01;

    std::vector<double> f(m), g(10 * m);
    for (auto& v : f) v = simulate_extreme(1.0, 0.5, 1, 1.0, 1e-3, rng).sup_at(1.0)[0];
    for (auto& v : g) v = simulate_extreme(1.0, 0.5, 1, 1.0, 1e-3, rng).sup_at(1.0)[0];
    frechet_rej +=
        ks_one_sample(f, [](double v) { return frechet_cdf(v, 1.0, 1.0, 0.5); }).p_value < 0.01;
    two_sample_rej += ks_two_sample(f, g).p_value < 0.01;
  }
  EXPECT_LE(normal_rej, 3);
  EXPECT_LE(frechet_rej, 3);
  EXPECT_LE(two_sample_rej, 3);
}

// Median KS distance over 20 seeds does not grow with t.
TEST(LimitLabSlow, ConsistencyAcrossT) {
  // One large sample per t so the KS distance is not swamped by its own noise
  // floor (about 0.006 at M = 20000).
  for (const Theorem th : {Theorem::kMain1, Theorem::kMain2}) {
    std::vector<double> d;
    for (const double t : {1e1, 1e2, 1e3}) {
      auto c = small(th, zeta2_zeta4(), t, 20000);
      c.u_grid = {1.0};
      c.primes = {2};
      c.seed = 5;
      d.push_back(run_experiment(c).ks_checks.front().ks.statistic);
    }
    EXPECT_GT(d[0], d[1]) << to_string(th);
    EXPECT_GT(d[1], d[2]) << to_string(th);
  }
}
