#include "mpw/limit_lab.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "mpw/extreme.hpp"
#include "mpw/walks.hpp"

namespace mpw {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kOracleStreamBit = std::uint64_t{1} << 63;

struct Plan {
  std::vector<std::uint64_t> steps;   // ascending, unique
  std::vector<std::uint64_t> primes;  // simulated primes
};

using Replica = std::vector<Snapshot>;  // aligned with Plan::steps

std::uint64_t steps_for(double t, double u) {
  return static_cast<std::uint64_t>(std::floor(t * u));
}

std::size_t index_of(const std::vector<std::uint64_t>& v, std::uint64_t x) {
  return static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), x) - v.begin());
}

std::string format_u(double u) {
  std::ostringstream os;
  os << u;
  return os.str();
}

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn fn) {
  const unsigned workers =
      static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(threads, count)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::vector<Replica> simulate(const ExperimentConfig& c, const Plan& plan) {
  std::vector<Replica> out(c.replicas);
  const std::uint64_t n = plan.steps.back();
  parallel_for(c.replicas, c.threads, [&](std::size_t r) {
    RandomStream rng = RandomStream::derive(c.seed, r);
    out[r] = run_trajectory(c.law, n, rng, plan.steps, plan.primes).snapshots;
  });
  return out;
}

Plan base_plan(const ExperimentConfig& c, std::vector<std::uint64_t> extra_primes = {},
               std::vector<std::uint64_t> extra_steps = {}) {
  Plan plan;
  std::set<std::uint64_t> steps(extra_steps.begin(), extra_steps.end());
  for (const double u : c.u_grid) steps.insert(steps_for(c.t, u));
  plan.steps.assign(steps.begin(), steps.end());
  std::set<std::uint64_t> primes(c.primes.begin(), c.primes.end());
  primes.insert(extra_primes.begin(), extra_primes.end());
  plan.primes.assign(primes.begin(), primes.end());
  return plan;
}

double mean_of(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance_of(const std::vector<double>& x) {
  const double m = mean_of(x);
  double s = 0.0;
  for (const double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

// Empirical covariance and the standard error of that estimate.
std::pair<double, double> covariance_with_error(const std::vector<double>& x,
                                                const std::vector<double>& y) {
  const double mx = mean_of(x), my = mean_of(y);
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - mx) * (y[i] - my);
  const double n = static_cast<double>(x.size());
  const double cov = std::accumulate(z.begin(), z.end(), 0.0) / (n - 1.0);
  return {cov, std::sqrt(variance_of(z) / n)};
}

PlotSeries make_plot(const std::string& statistic, std::uint64_t prime, double u,
                     std::vector<double> sample, const std::function<double(double)>& oracle) {
  PlotSeries s;
  s.statistic = statistic;
  s.prime = prime;
  s.u = u;
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  for (int i = 0; i <= 100; ++i) {
    const double x = empirical_quantile(sample, i / 100.0);
    if (!s.x.empty() && x == s.x.back()) continue;
    s.x.push_back(x);
    const auto below = std::upper_bound(sample.begin(), sample.end(), x) - sample.begin();
    s.empirical_cdf.push_back(static_cast<double>(below) / n);
    s.oracle_cdf.push_back(oracle(x));
  }
  return s;
}

std::function<double(double)> empirical_cdf_of(std::vector<double> sample) {
  std::sort(sample.begin(), sample.end());
  return [sample = std::move(sample)](double x) {
    const auto below = std::upper_bound(sample.begin(), sample.end(), x) - sample.begin();
    return static_cast<double>(below) / static_cast<double>(sample.size());
  };
}

double normal_cdf(double x, double mean, double variance) {
  return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * variance));
}

std::string normal_label(double variance) {
  std::ostringstream os;
  os.precision(10);
  os << "Normal(0, " << variance << ")";
  return os.str();
}

class Analysis {
 public:
  Analysis(const ExperimentConfig& config, ExperimentReport& report)
      : config_(config), report_(report) {}

  void column(const std::string& name, const std::vector<double>& values) {
    report_.replica_table.columns.push_back(name);
    if (report_.replica_table.rows.empty()) report_.replica_table.rows.resize(values.size());
    for (std::size_t r = 0; r < values.size(); ++r) report_.replica_table.rows[r].push_back(values[r]);
  }

  KsCheck& ks_against_normal(const std::string& statistic, std::uint64_t prime, double u,
                             const std::vector<double>& x, double variance) {
    KsCheck c;
    c.statistic = statistic;
    c.prime = prime;
    c.u = u;
    c.target = normal_label(variance);
    c.sample_mean = mean_of(x);
    c.sample_variance = variance_of(x);
    c.target_mean = 0.0;
    c.target_variance = variance;
    c.ks = ks_normal(x, 0.0, variance);
    c.passed = c.ks.p_value >= config_.tolerances.ks_alpha;
    report_.ks_checks.push_back(c);
    report_.plots.push_back(make_plot(statistic, prime, u, x, [variance](double v) {
      return normal_cdf(v, 0.0, variance);
    }));
    return report_.ks_checks.back();
  }

  KsCheck& ks_against_cdf(const std::string& statistic, std::uint64_t prime, double u,
                          const std::vector<double>& x, const std::string& target,
                          const std::function<double(double)>& cdf) {
    KsCheck c;
    c.statistic = statistic;
    c.prime = prime;
    c.u = u;
    c.target = target;
    c.sample_mean = mean_of(x);
    c.sample_variance = variance_of(x);
    c.target_mean = kNaN;
    c.target_variance = kNaN;
    c.ks = ks_one_sample(x, cdf);
    c.passed = c.ks.p_value >= config_.tolerances.ks_alpha;
    report_.ks_checks.push_back(c);
    report_.plots.push_back(make_plot(statistic, prime, u, x, cdf));
    return report_.ks_checks.back();
  }

  KsCheck& ks_against_sample(const std::string& statistic, std::uint64_t prime, double u,
                             const std::vector<double>& x, const std::string& target,
                             const std::vector<double>& reference) {
    KsCheck c;
    c.statistic = statistic;
    c.prime = prime;
    c.u = u;
    c.target = target;
    c.sample_mean = mean_of(x);
    c.sample_variance = variance_of(x);
    c.target_mean = kNaN;
    c.target_variance = kNaN;
    c.ks = ks_two_sample(x, reference);
    c.passed = c.ks.p_value >= config_.tolerances.ks_alpha;
    report_.ks_checks.push_back(c);
    report_.plots.push_back(
        make_plot(statistic + "/oracle_sample", prime, u, x, empirical_cdf_of(reference)));
    return report_.ks_checks.back();
  }

  void covariance(const std::string& statistic, std::uint64_t p, double u,
                  const std::vector<double>& x, std::uint64_t q, double v,
                  const std::vector<double>& y, double predicted) {
    CovarianceCheck c;
    c.statistic = statistic;
    c.p = p;
    c.q = q;
    c.u = u;
    c.v = v;
    std::tie(c.empirical, c.standard_error) = covariance_with_error(x, y);
    c.predicted = predicted;
    c.passed = std::abs(c.empirical - c.predicted) <=
               config_.tolerances.sigma_band * c.standard_error;
    report_.covariance_checks.push_back(c);
  }

  QuantileCheck& quantile(const std::string& statistic, std::uint64_t prime, double u,
                          std::uint64_t steps, const std::vector<double>& x, double level,
                          double threshold) {
    QuantileCheck q;
    q.statistic = statistic;
    q.prime = prime;
    q.u = u;
    q.steps = steps;
    q.level = level;
    q.value = empirical_quantile(x, level);
    q.threshold = threshold;
    q.asserted = !std::isnan(threshold);
    q.passed = !q.asserted || q.value < threshold;
    report_.quantile_checks.push_back(q);
    return report_.quantile_checks.back();
  }

  void note(std::string text) { report_.notes.push_back(std::move(text)); }

 private:
  const ExperimentConfig& config_;
  ExperimentReport& report_;
};

ExperimentReport start_report(const ExperimentConfig& c) {
  validate(c);
  ExperimentReport r;
  r.theorem = to_string(c.theorem);
  r.law = c.law.describe();
  r.t = c.t;
  r.u_grid = c.u_grid;
  r.primes = c.primes;
  r.replicas = c.replicas;
  r.seed = c.seed;
  r.tolerances = c.tolerances;
  r.extreme = c.extreme;
  return r;
}

void finish(ExperimentReport& r) {
  if (!r.hypothesis_met) {
    for (auto& c : r.ks_checks) c.asserted = false;
    for (auto& c : r.covariance_checks) c.asserted = false;
    for (auto& c : r.quantile_checks) c.asserted = false;
    r.status = "advisory";
    return;
  }
  bool ok = true;
  for (const auto& c : r.ks_checks) ok &= !c.asserted || c.passed;
  for (const auto& c : r.covariance_checks) ok &= !c.asserted || c.passed;
  for (const auto& c : r.quantile_checks) ok &= !c.asserted || c.passed;
  r.status = ok ? "pass" : "fail";
}

// ----- Gaussian families for prime counts ----------------------------------

enum class PrimeStat { kS, kT, kMaxT };

const char* stat_name(PrimeStat s) {
  switch (s) {
    case PrimeStat::kS: return "S";
    case PrimeStat::kT: return "T";
    case PrimeStat::kMaxT: return "max_T";
  }
  return "S";
}

std::uint64_t pick(const Snapshot& snap, std::size_t i, PrimeStat s) {
  switch (s) {
    case PrimeStat::kS: return snap.s[i];
    case PrimeStat::kT: return snap.t_current[i];
    case PrimeStat::kMaxT: return snap.t_max[i];
  }
  return 0;
}

ExperimentReport run_prime_gaussian(const ExperimentConfig& c, PrimeStat stat) {
  ExperimentReport report = start_report(c);
  Analysis a(c, report);
  const StepLaw xi = c.law.xi_marginal();
  const StepLaw eta = c.law.eta_marginal();

  if (!has_finite_log_second_moment(xi)) {
    report.hypothesis_met = false;
    a.note("hypothesis unmet: E[log^2 xi] is not finite");
  }
  if (stat != PrimeStat::kS) {
    for (const auto p : c.primes) {
      try {
        // Finite Var lambda_p(eta) gives t^2 P{lambda_p(eta) >= t} -> 0.
        (void)lambda_variance(eta, p);
      } catch (const TruncationError&) {
        report.hypothesis_met = false;
        a.note("hypothesis unmet: lambda_" + std::to_string(p) +
               "(eta) lacks the moment required for negligible perturbations");
      }
    }
  }

  struct Target {
    std::uint64_t p;
    double mean;
    double variance;
    bool tested;
  };
  std::vector<Target> targets;
  for (const auto p : c.primes) {
    Target tg{p, kNaN, kNaN, false};
    try {
      tg.mean = lambda_mean(xi, p);
      tg.variance = lambda_variance(xi, p);
    } catch (const TruncationError&) {
      a.note("prime " + std::to_string(p) + " skipped: moments of lambda_p(xi) diverge");
      targets.push_back(tg);
      continue;
    }
    if (stat == PrimeStat::kMaxT && lambda_tail(xi, p, 1) == 0.0) {
      a.note("prime " + std::to_string(p) + " skipped: P{p | xi} = 0 (full support fails)");
    } else if (tg.variance == 0.0) {
      a.note("prime " + std::to_string(p) +
             " skipped for the normal test: Var lambda_p(xi) = 0 (degenerate limit)");
    } else {
      tg.tested = true;
    }
    targets.push_back(tg);
  }

  const Plan plan = base_plan(c);
  const auto data = simulate(c, plan);
  const double root_t = std::sqrt(c.t);

  // stats[i][j]: prime i, u index j
  std::vector<std::vector<std::vector<double>>> stats(c.primes.size());
  for (std::size_t i = 0; i < c.primes.size(); ++i) {
    const Target& tg = targets[i];
    const std::size_t pi = index_of(plan.primes, tg.p);
    stats[i].resize(c.u_grid.size());
    if (std::isnan(tg.mean)) continue;
    for (std::size_t j = 0; j < c.u_grid.size(); ++j) {
      const double u = c.u_grid[j];
      const std::size_t si = index_of(plan.steps, steps_for(c.t, u));
      auto& x = stats[i][j];
      x.reserve(data.size());
      for (const auto& rep : data) {
        x.push_back((static_cast<double>(pick(rep[si], pi, stat)) - u * c.t * tg.mean) / root_t);
      }
      a.column(std::string(stat_name(stat)) + ".p" + std::to_string(tg.p) + ".u" + format_u(u), x);
      if (tg.tested) {
        a.ks_against_normal(stat_name(stat), tg.p, u, x, u * tg.variance);
      } else {
        std::vector<double> ax(x.size());
        std::transform(x.begin(), x.end(), ax.begin(), [](double v) { return std::abs(v); });
        a.quantile(std::string("|") + stat_name(stat) + "|", tg.p, u, steps_for(c.t, u), ax, 0.99,
                   kNaN);
      }
    }
  }
  // Wiener structure: Cov(W_p(u), W_q(v)) = min(u, v) Cov(lambda_p, lambda_q).
  for (std::size_t i = 0; i < c.primes.size(); ++i) {
    if (!targets[i].tested) continue;
    for (std::size_t j = 0; j < c.u_grid.size(); ++j) {
      for (std::size_t k = i; k < c.primes.size(); ++k) {
        if (!targets[k].tested) continue;
        for (std::size_t l = (k == i ? j + 1 : 0); l < c.u_grid.size(); ++l) {
          const double cov = lambda_covariance(xi, targets[i].p, targets[k].p);
          a.covariance(stat_name(stat), targets[i].p, c.u_grid[j], stats[i][j], targets[k].p,
                       c.u_grid[l], stats[k][l], std::min(c.u_grid[j], c.u_grid[l]) * cov);
        }
      }
    }
  }
  finish(report);
  return report;
}

// ----- log Pi / log LCM Theta ----------------------------------------------

ExperimentReport run_log_clt(const ExperimentConfig& c, bool lcm) {
  ExperimentReport report = start_report(c);
  Analysis a(c, report);
  const StepLaw xi = c.law.xi_marginal();
  const StepLaw eta = c.law.eta_marginal();

  MomentSummary m;
  try {
    m = compute_moments(xi, 1);
  } catch (const TruncationError&) {
    throw std::invalid_argument("log-CLT experiments need E[log^2 xi] < infinity");
  }
  if (m.sigma2_xi <= 0.0) {
    throw std::invalid_argument("log-CLT experiments need Var(log xi) > 0 (sigma_xi = 0)");
  }
  report.mu_xi = m.mu_xi;
  report.sigma2_xi = m.sigma2_xi;

  std::vector<std::uint64_t> diff_steps;
  const std::uint64_t n_max = steps_for(c.t, c.u_grid.back());
  if (lcm) {
    report.conditions = check_main2_conditions(c.law, {100, 1000, 10000, 100000, 1000000},
                                               c.prime_limit);
    const auto& cond = *report.conditions;
    a.note(std::string("condition check: ") + to_string(cond.trend_diff) + " diff-ratio, " +
           to_string(cond.trend_eta) + " eta-ratio, verdict " + cond.verdict);
    if (cond.verdict != "holds") {
      report.hypothesis_met = false;
      a.note("hypothesis unmet: the negligibility condition on eta is not supported");
    }
    double log_eta_mean = std::numeric_limits<double>::infinity();
    try {
      log_eta_mean = compute_moments(eta, 1).mu_xi;
    } catch (const TruncationError&) {
    }
    if (!std::isfinite(log_eta_mean)) {
      report.hypothesis_met = false;
      a.note("hypothesis unmet: E[log eta] is not finite");
    }
    bool full_support = !prime_support(xi).has_value();
    for (const auto p : sieve_primes(100)) full_support &= lambda_tail(xi, p, 1) > 0.0;
    if (!full_support) {
      report.hypothesis_met = false;
      a.note("hypothesis unmet: xi is not divisible by every prime with positive probability");
    }
    for (const std::uint64_t d : {n_max / 4, n_max / 2, n_max}) {
      if (d >= 1) diff_steps.push_back(d);
    }
  }

  const Plan plan = base_plan(c, {}, diff_steps);
  const auto data = simulate(c, plan);
  const double root_t = std::sqrt(c.t);
  const std::string name = lcm ? "log_lcm_theta" : "log_pi";

  std::vector<std::vector<double>> stats(c.u_grid.size());
  for (std::size_t j = 0; j < c.u_grid.size(); ++j) {
    const double u = c.u_grid[j];
    const std::size_t si = index_of(plan.steps, steps_for(c.t, u));
    for (const auto& rep : data) {
      const double v = lcm ? rep[si].log_lcm_theta : rep[si].log_pi;
      stats[j].push_back((v - m.mu_xi * u * c.t) / root_t);
    }
    a.column(name + ".u" + format_u(u), stats[j]);
    a.ks_against_normal(name, 0, u, stats[j], u * m.sigma2_xi);
  }
  for (std::size_t j = 0; j < c.u_grid.size(); ++j) {
    for (std::size_t l = j + 1; l < c.u_grid.size(); ++l) {
      a.covariance(name, 0, c.u_grid[j], stats[j], 0, c.u_grid[l], stats[l],
                   std::min(c.u_grid[j], c.u_grid[l]) * m.sigma2_xi);
    }
  }

  if (lcm) {
    // (log Theta_n - log Pi_n) / sqrt(n) on matched paths; its upper
    // quantile must shrink as n doubles.
    double previous = kNaN;
    for (const auto n : diff_steps) {
      const std::size_t si = index_of(plan.steps, n);
      std::vector<double> d;
      for (const auto& rep : data) {
        d.push_back(std::abs(rep[si].log_lcm_theta - rep[si].log_pi) /
                    std::sqrt(static_cast<double>(n)));
      }
      a.column("diff.n" + std::to_string(n), d);
      auto& q = a.quantile("|log_lcm_theta-log_pi|/sqrt(n)", 0, static_cast<double>(n) / c.t, n,
                           d, 0.95, previous);
      if (q.asserted && q.value == 0.0 && q.threshold == 0.0) q.passed = true;
      previous = q.value;
    }
  }
  finish(report);
  return report;
}

// ----- extreme-value experiments ---------------------------------------------

struct OracleDraws {
  // [u index][draw] -> coordinatewise sup, coordinates aligned with profile primes
  std::vector<std::vector<std::vector<double>>> sups;
};

OracleDraws draw_oracle(const ExperimentConfig& c, const RegularVariationProfile& profile,
                        double r_min) {
  const std::size_t count =
      static_cast<std::size_t>(std::ceil(c.extreme.oracle_factor * static_cast<double>(c.replicas)));
  OracleDraws o;
  o.sups.assign(c.u_grid.size(), std::vector<std::vector<double>>(count));
  parallel_for(count, c.threads, [&](std::size_t j) {
    RandomStream rng = RandomStream::derive(c.seed, kOracleStreamBit | j);
    const auto s = simulate_extreme(profile.tail_constants, profile.alpha, c.u_grid.back(), r_min, rng);
    for (std::size_t i = 0; i < c.u_grid.size(); ++i) o.sups[i][j] = s.sup_at(c.u_grid[i]);
  });
  return o;
}

RegularVariationProfile require_profile(const ExperimentConfig& c) {
  const auto profile = regular_variation_profile(c.law.eta_marginal());
  if (!profile) {
    throw std::invalid_argument(
        std::string(to_string(c.theorem)) +
        " needs eta built from ParetoExponent factors with a common alpha in (0, 1)");
  }
  return *profile;
}

// Atoms below r_min are dropped; keep the chance that a coordinate has none
// on [0, u_min] below e^{-30}.
double effective_r_min(const ExperimentConfig& c, const RegularVariationProfile& profile) {
  const double c_min = *std::min_element(profile.tail_constants.begin(), profile.tail_constants.end());
  const double bound = std::pow(c.u_grid.front() * c_min / 30.0, 1.0 / profile.alpha);
  return std::min(c.extreme.r_min, bound);
}

std::string frechet_label(double u, double c, double alpha, double scale = 1.0) {
  std::ostringstream os;
  os.precision(10);
  os << "Frechet(u=" << u << ", c=" << c << ", alpha=" << alpha << ")";
  if (scale != 1.0) os << " scaled by " << scale;
  return os.str();
}

void check_xi_finite_mean(const ExperimentConfig& c, ExperimentReport& report, Analysis& a) {
  try {
    const MomentSummary m = compute_moments(c.law.xi_marginal(), 1);
    report.mu_xi = m.mu_xi;
    report.sigma2_xi = m.sigma2_xi;
  } catch (const TruncationError&) {
    report.hypothesis_met = false;
    a.note("hypothesis unmet: E[log xi] is not finite");
  }
}

ExperimentReport run_extreme_maxima(const ExperimentConfig& c) {
  ExperimentReport report = start_report(c);
  Analysis a(c, report);
  const auto profile = require_profile(c);
  check_xi_finite_mean(c, report, a);

  const double a_t = std::pow(c.t, 1.0 / profile.alpha);
  const double r_min = effective_r_min(c, profile);
  if (r_min < c.extreme.r_min) {
    a.note("oracle r_min lowered to " + format_u(r_min) + " for the smallest u");
  }
  const Plan plan = base_plan(c, profile.primes);
  const auto data = simulate(c, plan);
  const auto oracle = draw_oracle(c, profile, r_min);
  const double threshold = 1.0 / std::sqrt(c.t);

  for (std::size_t j = 0; j < c.u_grid.size(); ++j) {
    const double u = c.u_grid[j];
    const std::uint64_t n = steps_for(c.t, u);
    const std::size_t si = index_of(plan.steps, n);
    std::vector<std::vector<double>> scaled_p0;
    for (const auto p : c.primes) {
      const std::size_t pi = index_of(plan.primes, p);
      std::vector<double> x;
      for (const auto& rep : data) x.push_back(static_cast<double>(rep[si].t_max[pi]) / a_t);
      a.column("max_T/a.p" + std::to_string(p) + ".u" + format_u(u), x);
      const auto it = std::find(profile.primes.begin(), profile.primes.end(), p);
      if (it == profile.primes.end()) {
        a.quantile("max_T/a", p, u, n, x, 0.5, threshold);
        a.quantile("max_T/a", p, u, n, x, 0.99, threshold);
        continue;
      }
      const std::size_t k = static_cast<std::size_t>(it - profile.primes.begin());
      const double ck = profile.tail_constants[k];
      a.ks_against_cdf("max_T/a", p, u, x, frechet_label(u, ck, profile.alpha),
                       [=](double v) { return frechet_cdf(v, u, ck, profile.alpha); });
      std::vector<double> ref;
      for (const auto& sup : oracle.sups[j]) ref.push_back(sup[k]);
      a.ks_against_sample("max_T/a", p, u, x, "extreme-process oracle M_p(u)", ref);
    }
    if (profile.primes.size() >= 2) {
      // Joint behaviour through the max projection; independent Frechet
      // coordinates with one alpha have a Frechet maximum.
      std::vector<double> x;
      for (const auto& rep : data) {
        double m = 0.0;
        for (const auto p : profile.primes) {
          m = std::max(m, static_cast<double>(rep[si].t_max[index_of(plan.primes, p)]) / a_t);
        }
        x.push_back(m);
      }
      std::vector<double> ref;
      for (const auto& sup : oracle.sups[j]) ref.push_back(*std::max_element(sup.begin(), sup.end()));
      const double c_total =
          std::accumulate(profile.tail_constants.begin(), profile.tail_constants.end(), 0.0);
      a.column("max_p(max_T/a).u" + format_u(u), x);
      a.ks_against_cdf("max_p(max_T/a)", 0, u, x, frechet_label(u, c_total, profile.alpha),
                       [=](double v) { return frechet_cdf(v, u, c_total, profile.alpha); });
      a.ks_against_sample("max_p(max_T/a)", 0, u, x, "extreme-process oracle max_p M_p(u)", ref);
    }
  }
  finish(report);
  return report;
}

ExperimentReport run_extreme_lcm(const ExperimentConfig& c) {
  ExperimentReport report = start_report(c);
  Analysis a(c, report);
  const auto profile = require_profile(c);
  check_xi_finite_mean(c, report, a);

  const double a_t = std::pow(c.t, 1.0 / profile.alpha);
  const double r_min = effective_r_min(c, profile);
  const Plan plan = base_plan(c, profile.primes);
  const auto data = simulate(c, plan);
  const auto oracle = draw_oracle(c, profile, r_min);

  for (std::size_t j = 0; j < c.u_grid.size(); ++j) {
    const double u = c.u_grid[j];
    const std::size_t si = index_of(plan.steps, steps_for(c.t, u));
    std::vector<double> x;
    for (const auto& rep : data) x.push_back(rep[si].log_lcm_theta / a_t);
    a.column("log_lcm_theta/a.u" + format_u(u), x);
    std::vector<double> ref;
    for (const auto& sup : oracle.sups[j]) {
      double s = 0.0;
      for (std::size_t k = 0; k < profile.primes.size(); ++k) s += sup[k] * log_prime(profile.primes[k]);
      ref.push_back(s);
    }
    if (profile.primes.size() == 1) {
      const double lp = log_prime(profile.primes[0]);
      const double ck = profile.tail_constants[0];
      a.ks_against_cdf("log_lcm_theta/a", 0, u, x, frechet_label(u, ck, profile.alpha, lp),
                       [=](double v) { return frechet_cdf(v / lp, u, ck, profile.alpha); });
    }
    a.ks_against_sample("log_lcm_theta/a", 0, u, x, "extreme-process oracle sum_p M_p(u) log p", ref);
  }
  finish(report);
  return report;
}

}  // namespace

const char* to_string(Theorem t) {
  switch (t) {
    case Theorem::kMcltS: return "MCLT_S";
    case Theorem::kMcltT: return "MCLT_T";
    case Theorem::kMain1: return "MAIN1";
    case Theorem::kMain11: return "MAIN11";
    case Theorem::kLogPiClt: return "LOGPI_CLT";
    case Theorem::kMain2: return "MAIN2";
    case Theorem::kMain21: return "MAIN21";
    case Theorem::kIidLcmCorollary: return "IID_LCM_COROLLARY";
  }
  return "MCLT_S";
}

Theorem theorem_from_string(const std::string& name) {
  for (const auto t : {Theorem::kMcltS, Theorem::kMcltT, Theorem::kMain1, Theorem::kMain11,
                       Theorem::kLogPiClt, Theorem::kMain2, Theorem::kMain21,
                       Theorem::kIidLcmCorollary}) {
    if (name == to_string(t)) return t;
  }
  throw std::invalid_argument("unknown theorem '" + name + "'");
}

void validate(const ExperimentConfig& c) {
  if (c.replicas < kKsMinSample) {
    throw std::invalid_argument("replicas must be >= " + std::to_string(kKsMinSample));
  }
  if (!(c.t >= 1.0) || !std::isfinite(c.t)) throw std::invalid_argument("t must be >= 1");
  if (c.u_grid.empty()) throw std::invalid_argument("u_grid must be nonempty");
  for (std::size_t i = 0; i < c.u_grid.size(); ++i) {
    if (!(c.u_grid[i] > 0.0) || (i > 0 && !(c.u_grid[i] > c.u_grid[i - 1]))) {
      throw std::invalid_argument("u_grid must be positive and strictly increasing");
    }
    if (steps_for(c.t, c.u_grid[i]) < 1) {
      throw std::invalid_argument("t * u must be >= 1 for every u in u_grid");
    }
  }
  for (const auto p : c.primes) {
    if (!is_prime(p)) throw std::invalid_argument("primes: not a prime: " + std::to_string(p));
  }
  if (c.primes.empty() && (c.theorem == Theorem::kMcltS || c.theorem == Theorem::kMcltT ||
                           c.theorem == Theorem::kMain1 || c.theorem == Theorem::kMain11)) {
    throw std::invalid_argument("primes must be nonempty for per-prime experiments");
  }
  if (!(c.tolerances.ks_alpha > 0.0 && c.tolerances.ks_alpha < 1.0)) {
    throw std::invalid_argument("ks_alpha must lie in (0, 1)");
  }
  if (!(c.tolerances.sigma_band > 0.0)) throw std::invalid_argument("sigma_band must be positive");
  if (!(c.extreme.r_min > 0.0)) throw std::invalid_argument("extreme.r_min must be positive");
  if (!(c.extreme.oracle_factor >= 1.0)) {
    throw std::invalid_argument("extreme.oracle_factor must be >= 1");
  }
  if (c.prime_limit < 2) throw std::invalid_argument("prime_limit must be >= 2");
}

ExperimentReport run_mclt_s(ExperimentConfig c) {
  c.theorem = Theorem::kMcltS;
  return run_prime_gaussian(c, PrimeStat::kS);
}

ExperimentReport run_mclt_t(ExperimentConfig c) {
  c.theorem = Theorem::kMcltT;
  return run_prime_gaussian(c, PrimeStat::kT);
}

ExperimentReport run_main1(ExperimentConfig c) {
  c.theorem = Theorem::kMain1;
  return run_prime_gaussian(c, PrimeStat::kMaxT);
}

ExperimentReport run_main11(ExperimentConfig c) {
  c.theorem = Theorem::kMain11;
  return run_extreme_maxima(c);
}

ExperimentReport run_logpi_clt(ExperimentConfig c) {
  c.theorem = Theorem::kLogPiClt;
  return run_log_clt(c, false);
}

ExperimentReport run_main2(ExperimentConfig c) {
  c.theorem = Theorem::kMain2;
  return run_log_clt(c, true);
}

ExperimentReport run_main21(ExperimentConfig c) {
  c.theorem = Theorem::kMain21;
  return run_extreme_lcm(c);
}

ExperimentReport run_iid_lcm_corollary(ExperimentConfig c) {
  c.theorem = Theorem::kIidLcmCorollary;
  const StepLaw xi = c.law.xi_marginal();
  const auto* d = xi.as<DegenerateLaw>();
  if (!d || d->value != 1) {
    throw std::invalid_argument("IID_LCM_COROLLARY requires xi = 1 (coupling xi_one)");
  }
  return run_extreme_lcm(c);
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport r;
  switch (config.theorem) {
    case Theorem::kMcltS: r = run_mclt_s(config); break;
    case Theorem::kMcltT: r = run_mclt_t(config); break;
    case Theorem::kMain1: r = run_main1(config); break;
    case Theorem::kMain11: r = run_main11(config); break;
    case Theorem::kLogPiClt: r = run_logpi_clt(config); break;
    case Theorem::kMain2: r = run_main2(config); break;
    case Theorem::kMain21: r = run_main21(config); break;
    case Theorem::kIidLcmCorollary: r = run_iid_lcm_corollary(config); break;
  }
  r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

KsResult ks_normal(const std::vector<double>& sample, double mean, double variance) {
  if (!(variance > 0.0)) throw std::invalid_argument("ks_normal: variance must be positive");
  return ks_one_sample(sample, [=](double x) { return normal_cdf(x, mean, variance); });
}

double empirical_quantile(std::vector<double> sample, double level) {
  if (sample.empty()) throw std::invalid_argument("empirical_quantile: empty sample");
  if (!(level >= 0.0 && level <= 1.0)) throw std::invalid_argument("quantile level must be in [0,1]");
  std::sort(sample.begin(), sample.end());
  const double h = (static_cast<double>(sample.size()) - 1.0) * level;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sample.size() - 1);
  return sample[lo] + (h - static_cast<double>(lo)) * (sample[hi] - sample[lo]);
}

}  // namespace mpw
