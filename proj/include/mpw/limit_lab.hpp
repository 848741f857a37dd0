#pragma once

// Monte Carlo experiments for the limit theorems of prime counts and
// log-LCM of multiplicative perturbed random walks.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mpw/distributions.hpp"
#include "mpw/ks.hpp"

namespace mpw {

enum class Theorem {
  kMcltS,
  kMcltT,
  kMain1,
  kMain11,
  kLogPiClt,
  kMain2,
  kMain21,
  kIidLcmCorollary,
};

const char* to_string(Theorem t);
/// Accepts the names printed by to_string ("MCLT_S", ...). Throws std::invalid_argument.
Theorem theorem_from_string(const std::string& name);

struct Tolerances {
  double ks_alpha = 0.01;
  double sigma_band = 4.0;
};

struct ExtremeSettings {
  double r_min = 0.01;
  /// Oracle sample size as a multiple of the replica count.
  double oracle_factor = 10.0;
};

struct ExperimentConfig {
  Theorem theorem;
  JointStepLaw law;
  double t = 1e4;
  std::vector<double> u_grid{1.0};
  std::vector<std::uint64_t> primes{2};
  std::size_t replicas = 2000;
  std::uint64_t seed = 1;
  Tolerances tolerances{};
  ExtremeSettings extreme{};
  std::uint64_t prime_limit = 100000;  // for moment and condition sums
  unsigned threads = 1;                // does not affect results
};

/// Throws std::invalid_argument on an inconsistent configuration.
void validate(const ExperimentConfig& config);

struct KsCheck {
  std::string statistic;  // e.g. "S", "T", "max_T", "log_pi", "log_lcm_theta"
  std::uint64_t prime = 0;  // 0 when the statistic is not per prime
  double u = 0.0;
  std::string target;  // human-readable reference law
  double sample_mean = 0.0;
  double sample_variance = 0.0;
  double target_mean = 0.0;
  double target_variance = 0.0;  // NaN when not applicable
  KsResult ks;
  bool asserted = true;
  bool passed = false;
};

struct CovarianceCheck {
  std::string statistic;
  std::uint64_t p = 0, q = 0;
  double u = 0.0, v = 0.0;
  double empirical = 0.0;
  double predicted = 0.0;
  double standard_error = 0.0;
  bool asserted = true;
  bool passed = false;
};

struct QuantileCheck {
  std::string statistic;
  std::uint64_t prime = 0;
  double u = 0.0;
  std::uint64_t steps = 0;
  double level = 0.5;
  double value = 0.0;
  double threshold = 0.0;  // pass when value < threshold (NaN: report only)
  bool asserted = true;
  bool passed = false;
};

struct PlotSeries {
  std::string statistic;
  std::uint64_t prime = 0;
  double u = 0.0;
  std::vector<double> x;
  std::vector<double> empirical_cdf;
  std::vector<double> oracle_cdf;
};

/// Raw per-replica statistics, one column per (statistic, prime, u).
struct ReplicaTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ExperimentReport {
  std::string theorem;
  std::string law;
  double t = 0.0;
  std::vector<double> u_grid;
  std::vector<std::uint64_t> primes;
  std::size_t replicas = 0;
  std::uint64_t seed = 0;
  Tolerances tolerances;
  ExtremeSettings extreme;

  bool hypothesis_met = true;
  /// "pass", "fail" or "advisory" (hypothesis unmet, nothing asserted)
  std::string status;
  double mu_xi = 0.0;
  double sigma2_xi = 0.0;
  std::vector<std::string> notes;
  std::vector<KsCheck> ks_checks;
  std::vector<CovarianceCheck> covariance_checks;
  std::vector<QuantileCheck> quantile_checks;
  std::optional<Main2ConditionReport> conditions;
  std::vector<PlotSeries> plots;
  ReplicaTable replica_table;

  double runtime_seconds = 0.0;  // not part of the reproducible output

  bool passed() const { return status != "fail"; }
};

ExperimentReport run_experiment(const ExperimentConfig& config);

ExperimentReport run_mclt_s(ExperimentConfig config);
ExperimentReport run_mclt_t(ExperimentConfig config);
ExperimentReport run_main1(ExperimentConfig config);
ExperimentReport run_main11(ExperimentConfig config);
ExperimentReport run_logpi_clt(ExperimentConfig config);
ExperimentReport run_main2(ExperimentConfig config);
ExperimentReport run_main21(ExperimentConfig config);
ExperimentReport run_iid_lcm_corollary(ExperimentConfig config);

/// KS against a Normal(mean, variance) reference.
KsResult ks_normal(const std::vector<double>& sample, double mean, double variance);

/// Empirical quantile with linear interpolation (type 7).
double empirical_quantile(std::vector<double> sample, double level);

}  // namespace mpw
