#pragma once

// Exact arithmetic on positive integers stored as sparse prime-exponent
// vectors. Integers that would not fit in 64 bits are never materialized;
// only their exponents and logarithms are.

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace mpw {

struct PrimePower {
  std::uint64_t prime = 0;
  std::uint64_t exponent = 0;

  friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

/// Deterministic Miller-Rabin over the full 64-bit range.
bool is_prime(std::uint64_t n);

/// Primes in [2, limit], ascending.
std::vector<std::uint64_t> sieve_primes(std::uint64_t limit);

/// Natural log of a prime; memoized for primes below the sieve bound.
double log_prime(std::uint64_t p);

/// Adds with overflow detection; throws std::overflow_error.
std::uint64_t checked_add(std::uint64_t a, std::uint64_t b);

class PrimeExponentVector {
 public:
  PrimeExponentVector() = default;

  /// Entries may come in any order; repeated primes are summed and zero
  /// exponents dropped. Throws std::invalid_argument on a non-prime key.
  explicit PrimeExponentVector(std::vector<PrimePower> entries);
  PrimeExponentVector(std::initializer_list<PrimePower> entries);

  /// Trusted path for already-sorted, already-validated factorizations.
  static PrimeExponentVector from_sorted(std::vector<PrimePower> entries);

  std::span<const PrimePower> entries() const { return entries_; }
  bool is_one() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  /// Exponent of p, 0 if absent. Throws std::invalid_argument if p is not prime.
  std::uint64_t multiplicity(std::uint64_t p) const;

  double log_value() const;

  /// The represented integer if it fits in 64 bits.
  std::optional<std::uint64_t> to_integer() const;

  /// log(m) when the value is astronomically large, exact double otherwise.
  double to_double() const;

  /// True when this vector divides `other` exponent-wise.
  bool divides(const PrimeExponentVector& other) const;

  friend bool operator==(const PrimeExponentVector&,
                         const PrimeExponentVector&) = default;

 private:
  std::vector<PrimePower> entries_;  // ascending by prime, exponents >= 1
};

/// Exact factorization. Throws std::invalid_argument for n == 0.
PrimeExponentVector factorize(std::uint64_t n);

/// Appends the factorization of n (ascending primes) to `out` after clearing it.
void factorize_into(std::uint64_t n, std::vector<PrimePower>& out);

inline std::uint64_t multiplicity(const PrimeExponentVector& v, std::uint64_t p) {
  return v.multiplicity(p);
}

PrimeExponentVector pev_multiply(const PrimeExponentVector& a,
                                 const PrimeExponentVector& b);

/// Exponent-wise max. Throws std::invalid_argument on an empty list.
PrimeExponentVector pev_lcm(std::span<const PrimeExponentVector> vs);

/// Exponent-wise min. Throws std::invalid_argument on an empty list.
PrimeExponentVector pev_gcd(std::span<const PrimeExponentVector> vs);

inline double log_value(const PrimeExponentVector& v) { return v.log_value(); }

}  // namespace mpw
