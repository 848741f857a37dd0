#include "mpw/prime_arith.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mpw {
namespace {

constexpr std::uint32_t kTableLimit = 1u << 20;

struct PrimeTables {
  std::vector<std::uint32_t> smallest_factor;  // 0 for n < 2
  std::vector<std::uint64_t> primes;
  std::vector<double> log_of;  // indexed by value, set only at primes

  PrimeTables() : smallest_factor(kTableLimit, 0), log_of(kTableLimit, 0.0) {
    for (std::uint32_t i = 2; i < kTableLimit; ++i) {
      if (smallest_factor[i] != 0) continue;
      primes.push_back(i);
      log_of[i] = std::log(static_cast<double>(i));
      for (std::uint64_t j = i; j < kTableLimit; j += i) {
        if (smallest_factor[j] == 0) smallest_factor[j] = i;
      }
    }
  }
};

const PrimeTables& tables() {
  static const PrimeTables instance;
  return instance;
}

using u128 = unsigned __int128;

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
  std::uint64_t result = 1;
  base %= m;
  while (exp > 0) {
    if (exp & 1) result = mul_mod(result, base, m);
    base = mul_mod(base, base, m);
    exp >>= 1;
  }
  return result;
}

// Brent's variant of Pollard rho; n must be odd and composite.
std::uint64_t pollard_brent(std::uint64_t n) {
  for (std::uint64_t c = 1;; ++c) {
    std::uint64_t y = 2, x = 2, g = 1, q = 1, ys = 2;
    std::uint64_t r = 1;
    constexpr std::uint64_t kBatch = 128;
    auto f = [&](std::uint64_t v) { return (mul_mod(v, v, n) + c) % n; };
    do {
      x = y;
      for (std::uint64_t i = 0; i < r; ++i) y = f(y);
      std::uint64_t k = 0;
      do {
        ys = y;
        for (std::uint64_t i = 0; i < std::min(kBatch, r - k); ++i) {
          y = f(y);
          q = mul_mod(q, x > y ? x - y : y - x, n);
        }
        g = std::gcd(q, n);
        k += kBatch;
      } while (k < r && g == 1);
      r <<= 1;
    } while (g == 1);
    if (g == n) {
      do {
        ys = f(ys);
        g = std::gcd(x > ys ? x - ys : ys - x, n);
      } while (g == 1);
    }
    if (g != n) return g;
  }
}

// Appends prime factors of n (unsorted, with repetition) to out.
void split_large(std::uint64_t n, std::vector<std::uint64_t>& out) {
  if (n == 1) return;
  if (is_prime(n)) {
    out.push_back(n);
    return;
  }
  const std::uint64_t d = pollard_brent(n);
  split_large(d, out);
  split_large(n / d, out);
}

void push_factor(std::vector<PrimePower>& out, std::uint64_t p) {
  if (!out.empty() && out.back().prime == p) {
    ++out.back().exponent;
  } else {
    out.push_back({p, 1});
  }
}

void normalize(std::vector<PrimePower>& entries) {
  std::sort(entries.begin(), entries.end(),
            [](const PrimePower& a, const PrimePower& b) { return a.prime < b.prime; });
  std::vector<PrimePower> merged;
  merged.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.exponent == 0) continue;
    if (!merged.empty() && merged.back().prime == e.prime) {
      merged.back().exponent = checked_add(merged.back().exponent, e.exponent);
    } else {
      merged.push_back(e);
    }
  }
  entries = std::move(merged);
}

}  // namespace

bool is_prime(std::uint64_t n) {
  if (n < kTableLimit) {
    return n >= 2 && tables().smallest_factor[n] == n;
  }
  if (n % 2 == 0) return false;
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // Witness set proven sufficient for all n < 2^64.
  for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull,
                          23ull, 29ull, 31ull, 37ull}) {
    std::uint64_t x = pow_mod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mul_mod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

std::vector<std::uint64_t> sieve_primes(std::uint64_t limit) {
  if (limit < 2) return {};
  if (limit < kTableLimit) {
    const auto& primes = tables().primes;
    return {primes.begin(), std::upper_bound(primes.begin(), primes.end(), limit)};
  }
  std::vector<bool> composite(limit + 1, false);
  std::vector<std::uint64_t> primes;
  for (std::uint64_t i = 2; i <= limit; ++i) {
    if (composite[i]) continue;
    primes.push_back(i);
    for (std::uint64_t j = i * i; j <= limit; j += i) composite[j] = true;
  }
  return primes;
}

double log_prime(std::uint64_t p) {
  if (p < kTableLimit) return tables().log_of[p];
  return std::log(static_cast<double>(p));
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t sum = 0;
  if (__builtin_add_overflow(a, b, &sum)) {
    throw std::overflow_error("prime exponent overflow");
  }
  return sum;
}

void factorize_into(std::uint64_t n, std::vector<PrimePower>& out) {
  out.clear();
  if (n == 0) throw std::invalid_argument("factorize: zero has no prime decomposition");
  const auto& t = tables();
  if (n < kTableLimit) {
    while (n > 1) {
      const std::uint32_t p = t.smallest_factor[n];
      push_factor(out, p);
      n /= p;
    }
    return;
  }
  for (const std::uint64_t p : t.primes) {
    if (p * p > n) break;
    while (n % p == 0) {
      push_factor(out, p);
      n /= p;
    }
    if (n < kTableLimit) break;
  }
  if (n < kTableLimit) {
    while (n > 1) {
      const std::uint32_t p = t.smallest_factor[n];
      push_factor(out, p);
      n /= p;
    }
    return;
  }
  // Either n is prime (trial division passed sqrt(n)) or every factor
  // exceeds the table bound.
  std::vector<std::uint64_t> large;
  split_large(n, large);
  std::sort(large.begin(), large.end());
  for (const std::uint64_t p : large) push_factor(out, p);
}

PrimeExponentVector factorize(std::uint64_t n) {
  std::vector<PrimePower> entries;
  factorize_into(n, entries);
  return PrimeExponentVector::from_sorted(std::move(entries));
}

PrimeExponentVector::PrimeExponentVector(std::vector<PrimePower> entries)
    : entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (!is_prime(e.prime)) {
      throw std::invalid_argument("prime-exponent key is not prime: " +
                                  std::to_string(e.prime));
    }
  }
  normalize(entries_);
}

PrimeExponentVector::PrimeExponentVector(std::initializer_list<PrimePower> entries)
    : PrimeExponentVector(std::vector<PrimePower>(entries)) {}

PrimeExponentVector PrimeExponentVector::from_sorted(std::vector<PrimePower> entries) {
  PrimeExponentVector v;
  v.entries_ = std::move(entries);
  return v;
}

std::uint64_t PrimeExponentVector::multiplicity(std::uint64_t p) const {
  if (!is_prime(p)) {
    throw std::invalid_argument("multiplicity: not a prime: " + std::to_string(p));
  }
  const auto it = std::lower_bound(
      entries_.begin(), entries_.end(), p,
      [](const PrimePower& e, std::uint64_t key) { return e.prime < key; });
  return (it != entries_.end() && it->prime == p) ? it->exponent : 0;
}

double PrimeExponentVector::log_value() const {
  double sum = 0.0;
  for (const auto& e : entries_) sum += static_cast<double>(e.exponent) * log_prime(e.prime);
  return sum;
}

std::optional<std::uint64_t> PrimeExponentVector::to_integer() const {
  std::uint64_t value = 1;
  for (const auto& e : entries_) {
    for (std::uint64_t i = 0; i < e.exponent; ++i) {
      if (__builtin_mul_overflow(value, e.prime, &value)) return std::nullopt;
    }
  }
  return value;
}

double PrimeExponentVector::to_double() const {
  if (const auto exact = to_integer()) return static_cast<double>(*exact);
  return std::exp(log_value());
}

bool PrimeExponentVector::divides(const PrimeExponentVector& other) const {
  auto it = other.entries_.begin();
  for (const auto& e : entries_) {
    while (it != other.entries_.end() && it->prime < e.prime) ++it;
    if (it == other.entries_.end() || it->prime != e.prime || it->exponent < e.exponent) {
      return false;
    }
  }
  return true;
}

PrimeExponentVector pev_multiply(const PrimeExponentVector& a,
                                 const PrimeExponentVector& b) {
  std::vector<PrimePower> out;
  out.reserve(a.size() + b.size());
  auto ia = a.entries().begin(), ib = b.entries().begin();
  while (ia != a.entries().end() || ib != b.entries().end()) {
    if (ib == b.entries().end() || (ia != a.entries().end() && ia->prime < ib->prime)) {
      out.push_back(*ia++);
    } else if (ia == a.entries().end() || ib->prime < ia->prime) {
      out.push_back(*ib++);
    } else {
      out.push_back({ia->prime, checked_add(ia->exponent, ib->exponent)});
      ++ia;
      ++ib;
    }
  }
  return PrimeExponentVector::from_sorted(std::move(out));
}

PrimeExponentVector pev_lcm(std::span<const PrimeExponentVector> vs) {
  if (vs.empty()) throw std::invalid_argument("pev_lcm: empty list");
  std::vector<PrimePower> all;
  for (const auto& v : vs) all.insert(all.end(), v.entries().begin(), v.entries().end());
  std::sort(all.begin(), all.end(),
            [](const PrimePower& x, const PrimePower& y) { return x.prime < y.prime; });
  std::vector<PrimePower> out;
  for (const auto& e : all) {
    if (!out.empty() && out.back().prime == e.prime) {
      out.back().exponent = std::max(out.back().exponent, e.exponent);
    } else {
      out.push_back(e);
    }
  }
  return PrimeExponentVector::from_sorted(std::move(out));
}

PrimeExponentVector pev_gcd(std::span<const PrimeExponentVector> vs) {
  if (vs.empty()) throw std::invalid_argument("pev_gcd: empty list");
  std::vector<PrimePower> out(vs.front().entries().begin(), vs.front().entries().end());
  for (const auto& v : vs.subspan(1)) {
    std::vector<PrimePower> next;
    for (const auto& e : out) {
      const auto it = std::lower_bound(
          v.entries().begin(), v.entries().end(), e.prime,
          [](const PrimePower& x, std::uint64_t key) { return x.prime < key; });
      if (it != v.entries().end() && it->prime == e.prime) {
        next.push_back({e.prime, std::min(e.exponent, it->exponent)});
      }
    }
    out = std::move(next);
  }
  return PrimeExponentVector::from_sorted(std::move(out));
}

}  // namespace mpw
