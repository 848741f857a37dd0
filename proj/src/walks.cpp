#include "mpw/walks.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>
#include <stdexcept>
#include <string>

namespace mpw {
namespace {

std::uint64_t lookup(const std::unordered_map<std::uint64_t, std::uint64_t>& m, std::uint64_t p) {
  const auto it = m.find(p);
  return it == m.end() ? 0 : it->second;
}

PrimeExponentVector to_vector(const std::unordered_map<std::uint64_t, std::uint64_t>& m) {
  std::vector<PrimePower> entries;
  entries.reserve(m.size());
  for (const auto& [p, e] : m) {
    if (e > 0) entries.push_back({p, e});
  }
  std::sort(entries.begin(), entries.end(),
            [](const PrimePower& a, const PrimePower& b) { return a.prime < b.prime; });
  return PrimeExponentVector::from_sorted(std::move(entries));
}

void append_double(std::string& out, double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, r.ptr);
}

}  // namespace

std::uint64_t WalkState::s_value(std::uint64_t p) const { return lookup(s_, p); }

std::uint64_t WalkState::t_max_value(std::uint64_t p) const { return lookup(t_max_, p); }

std::uint64_t WalkState::t_current(std::uint64_t p) const {
  if (n_ == 0) return 0;
  // S_{n-1}(p) = S_n(p) - lambda_p(xi_n)
  std::uint64_t s_prev = s_value(p);
  for (const auto& e : last_xi_) {
    if (e.prime == p) s_prev -= e.exponent;
  }
  for (const auto& e : last_eta_) {
    if (e.prime == p) return s_prev + e.exponent;
  }
  return s_prev;
}

PrimeExponentVector WalkState::s_exponents() const { return to_vector(s_); }

PrimeExponentVector WalkState::t_max_exponents() const { return to_vector(t_max_); }

void WalkState::enable_trace(std::size_t max_rows) {
  trace_limit_ = max_rows;
  trace_.reserve(std::min<std::size_t>(max_rows, 1 << 20));
}

void WalkState::step(std::span<const PrimePower> xi, std::span<const PrimePower> eta) {
  // T_{n+1}(p) = S_n(p) + lambda_p(eta_{n+1}). Off the primes of eta_{n+1} this
  // is S_n(p), which can only exceed the running max where xi_n moved S.
  for (const auto& e : eta) {
    const std::uint64_t candidate = checked_add(lookup(s_, e.prime), e.exponent);
    auto& slot = t_max_[e.prime];
    if (candidate > slot) {
      log_lcm_theta_ += static_cast<double>(candidate - slot) * log_prime(e.prime);
      slot = candidate;
    }
  }
  for (const auto& e : last_xi_) {
    const std::uint64_t candidate = lookup(s_, e.prime);
    auto& slot = t_max_[e.prime];
    if (candidate > slot) {
      log_lcm_theta_ += static_cast<double>(candidate - slot) * log_prime(e.prime);
      slot = candidate;
    }
  }
  for (const auto& e : xi) {
    auto& slot = s_[e.prime];
    slot = checked_add(slot, e.exponent);
    log_pi_ += static_cast<double>(e.exponent) * log_prime(e.prime);
  }
  last_xi_.assign(xi.begin(), xi.end());
  last_eta_.assign(eta.begin(), eta.end());
  ++n_;
  if (trace_limit_ > 0) {
    if (trace_.size() < trace_limit_) {
      trace_.push_back({n_, log_pi_, log_lcm_theta_});
    } else {
      trace_truncated_ = true;
    }
  }
}

WalkState walk_init() { return WalkState{}; }

void walk_step(WalkState& state, std::uint64_t xi, std::uint64_t eta) {
  if (xi == 0 || eta == 0) throw std::invalid_argument("walk_step: steps must be >= 1");
  std::vector<PrimePower> fx, fe;
  factorize_into(xi, fx);
  factorize_into(eta, fe);
  state.step(fx, fe);
}

Trajectory run_trajectory(const JointStepLaw& law, std::uint64_t n, RandomStream& rng,
                          std::span<const std::uint64_t> record_at,
                          std::span<const std::uint64_t> primes, std::size_t trace_rows) {
  for (std::size_t i = 0; i < record_at.size(); ++i) {
    if (record_at[i] == 0 || record_at[i] > n || (i > 0 && record_at[i] < record_at[i - 1])) {
      throw std::invalid_argument("run_trajectory: record_at must be ascending within [1, n]");
    }
  }
  Trajectory out;
  out.state.enable_trace(trace_rows);
  std::vector<PrimePower> xi, eta;
  xi.reserve(16);
  eta.reserve(16);
  std::size_t next = 0;
  for (std::uint64_t k = 1; k <= n; ++k) {
    law.sample_pair(rng, xi, eta);
    out.state.step(xi, eta);
    while (next < record_at.size() && record_at[next] == k) {
      Snapshot snap;
      snap.k = k;
      snap.log_pi = out.state.log_pi();
      snap.log_lcm_theta = out.state.log_lcm_theta();
      for (const auto p : primes) {
        snap.s.push_back(out.state.s_value(p));
        snap.t_current.push_back(out.state.t_current(p));
        snap.t_max.push_back(out.state.t_max_value(p));
      }
      out.snapshots.push_back(std::move(snap));
      ++next;
    }
  }
  return out;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
  std::string buf = "k,log_pi,log_lcm_theta\n";
  for (const auto& row : trace) {
    buf += std::to_string(row.k);
    buf += ',';
    append_double(buf, row.log_pi);
    buf += ',';
    append_double(buf, row.log_lcm_theta);
    buf += '\n';
  }
  out << buf;
}

}  // namespace mpw
