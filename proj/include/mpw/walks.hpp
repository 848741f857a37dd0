#pragma once

// Streaming multiplicative perturbed random walk in prime-exponent space.
//
//   Pi_k    = xi_1 ... xi_k
//   Theta_k = Pi_{k-1} * eta_k
//
// The state keeps S_n(p) = lambda_p(Pi_n), the running maxima of
// T_k(p) = lambda_p(Theta_k), and incremental log accumulators.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "mpw/distributions.hpp"
#include "mpw/prime_arith.hpp"
#include "mpw/random.hpp"

namespace mpw {

struct TraceRow {
  std::uint64_t k;
  double log_pi;
  double log_lcm_theta;
};

class WalkState {
 public:
  std::uint64_t n() const { return n_; }
  double log_pi() const { return log_pi_; }
  double log_lcm_theta() const { return log_lcm_theta_; }

  std::uint64_t s_value(std::uint64_t p) const;
  std::uint64_t t_max_value(std::uint64_t p) const;
  /// T_n(p) = S_{n-1}(p) + lambda_p(eta_n); 0 before the first step.
  std::uint64_t t_current(std::uint64_t p) const;

  PrimeExponentVector s_exponents() const;
  PrimeExponentVector t_max_exponents() const;

  /// Keep at most `max_rows` trace rows (0 disables tracing).
  void enable_trace(std::size_t max_rows);
  const std::vector<TraceRow>& trace() const { return trace_; }
  bool trace_truncated() const { return trace_truncated_; }

  /// Factorizations must be ascending by prime.
  void step(std::span<const PrimePower> xi, std::span<const PrimePower> eta);

 private:
  std::uint64_t n_ = 0;
  std::unordered_map<std::uint64_t, std::uint64_t> s_;
  std::unordered_map<std::uint64_t, std::uint64_t> t_max_;
  std::vector<PrimePower> last_xi_;
  std::vector<PrimePower> last_eta_;
  double log_pi_ = 0.0;
  double log_lcm_theta_ = 0.0;
  std::size_t trace_limit_ = 0;
  bool trace_truncated_ = false;
  std::vector<TraceRow> trace_;
};

WalkState walk_init();

/// Advances the walk by one step with integer draws xi, eta >= 1.
void walk_step(WalkState& state, std::uint64_t xi, std::uint64_t eta);

inline std::uint64_t s_value(const WalkState& s, std::uint64_t p) { return s.s_value(p); }
inline std::uint64_t t_max_value(const WalkState& s, std::uint64_t p) { return s.t_max_value(p); }

struct Snapshot {
  std::uint64_t k = 0;
  double log_pi = 0.0;
  double log_lcm_theta = 0.0;
  // Aligned with the requested prime list.
  std::vector<std::uint64_t> s;
  std::vector<std::uint64_t> t_current;
  std::vector<std::uint64_t> t_max;
};

struct Trajectory {
  WalkState state;
  std::vector<Snapshot> snapshots;
};

/// Runs n steps. `record_at` must be ascending with entries in [1, n].
Trajectory run_trajectory(const JointStepLaw& law, std::uint64_t n, RandomStream& rng,
                          std::span<const std::uint64_t> record_at,
                          std::span<const std::uint64_t> primes = {},
                          std::size_t trace_rows = 0);

/// CSV with header "k,log_pi,log_lcm_theta".
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace);

}  // namespace mpw
