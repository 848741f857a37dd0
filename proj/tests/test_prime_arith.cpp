#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "mpw/prime_arith.hpp"

using namespace mpw;

namespace {

bool trial_division_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

std::uint64_t rebuild(const PrimeExponentVector& v) {
  std::uint64_t x = 1;
  for (const auto& pp : v.entries()) {
    for (std::uint64_t e = 0; e < pp.exponent; ++e) x *= pp.prime;
  }
  return x;
}

}  // namespace

TEST(PrimeArith, IsPrimeMatchesTrialDivision) {
  for (std::uint64_t n = 0; n < 20000; ++n) EXPECT_EQ(is_prime(n), trial_division_prime(n)) << n;
}

TEST(PrimeArith, IsPrimeLargeValues) {
  EXPECT_TRUE(is_prime(18446744073709551557ULL));  // largest 64-bit prime
  EXPECT_FALSE(is_prime(18446744073709551615ULL));
  EXPECT_TRUE(is_prime(4294967291ULL));
  EXPECT_FALSE(is_prime(4294967291ULL * 3));
  // strong pseudoprimes to several small bases
  EXPECT_FALSE(is_prime(3215031751ULL));
  EXPECT_FALSE(is_prime(3825123056546413051ULL));
}

TEST(PrimeArith, SieveAgreesWithIsPrime) {
  const auto primes = sieve_primes(10000);
  std::vector<std::uint64_t> expected;
  for (std::uint64_t n = 0; n <= 10000; ++n) {
    if (trial_division_prime(n)) expected.push_back(n);
  }
  EXPECT_EQ(primes, expected);
  EXPECT_TRUE(sieve_primes(1).empty());
  EXPECT_EQ(sieve_primes(2), std::vector<std::uint64_t>{2});
}

TEST(PrimeArith, FactorizeRoundTrips) {
  std::mt19937_64 gen(7);
  for (int i = 0; i < 3000; ++i) {
    const std::uint64_t n = gen() >> (gen() % 64);
    if (n == 0) continue;
    const auto f = factorize(n);
    EXPECT_EQ(rebuild(f), n);
    for (const auto& pp : f.entries()) EXPECT_TRUE(is_prime(pp.prime));
  }
  EXPECT_TRUE(factorize(1).is_one());
  EXPECT_THROW(factorize(0), std::invalid_argument);
}

TEST(PrimeArith, FactorizeSemiprimeOfLargePrimes) {
  const std::uint64_t p = 4294967291ULL, q = 4294967279ULL;
  const auto f = factorize(p * q);
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f.multiplicity(p), 1u);
  EXPECT_EQ(f.multiplicity(q), 1u);
}

TEST(PrimeArith, MultiplicityMatchesRepeatedDivision) {
  for (std::uint64_t n = 1; n < 5000; ++n) {
    const auto f = factorize(n);
    for (const std::uint64_t p : {2, 3, 5, 7, 11}) {
      std::uint64_t m = n, k = 0;
      while (m % p == 0) m /= p, ++k;
      EXPECT_EQ(multiplicity(f, p), k);
    }
  }
  EXPECT_THROW(factorize(12).multiplicity(4), std::invalid_argument);
}

TEST(PrimeArith, LcmAndGcdMatchBruteForce) {
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<std::uint64_t> pick(1, 2000);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<PrimeExponentVector> vs;
    std::uint64_t l = 1, g = 0;
    const int count = 1 + trial % 5;
    for (int i = 0; i < count; ++i) {
      const std::uint64_t x = pick(gen);
      vs.push_back(factorize(x));
      l = std::lcm(l, x);
      g = std::gcd(g, x);
    }
    EXPECT_EQ(rebuild(pev_lcm(vs)), l);
    EXPECT_EQ(rebuild(pev_gcd(vs)), g);
  }
  EXPECT_THROW(pev_lcm({}), std::invalid_argument);
  EXPECT_THROW(pev_gcd({}), std::invalid_argument);
}

TEST(PrimeArith, MultiplyAddsExponents) {
  const auto a = factorize(360), b = factorize(84);
  EXPECT_EQ(rebuild(pev_multiply(a, b)), 360u * 84u);
  EXPECT_EQ(pev_multiply(a, PrimeExponentVector{}), a);
}

TEST(PrimeArith, ConstructorNormalizes) {
  const PrimeExponentVector v({{3, 1}, {2, 2}, {3, 2}, {5, 0}});
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v.entries()[0], (PrimePower{2, 2}));
  EXPECT_EQ(v.entries()[1], (PrimePower{3, 3}));
  EXPECT_THROW(PrimeExponentVector({{4, 1}}), std::invalid_argument);
}

TEST(PrimeArith, HugeValuesStayInExponentSpace) {
  const PrimeExponentVector v{{2, 1000}, {3, 5}};
  EXPECT_FALSE(v.to_integer().has_value());
  EXPECT_NEAR(v.log_value(), 1000 * std::log(2.0) + 5 * std::log(3.0), 1e-9);
  EXPECT_EQ(PrimeExponentVector({{2, 63}}).to_integer(), std::uint64_t{1} << 63);
  EXPECT_FALSE(PrimeExponentVector({{2, 64}}).to_integer().has_value());
}

TEST(PrimeArith, Divides) {
  EXPECT_TRUE(factorize(12).divides(factorize(360)));
  EXPECT_FALSE(factorize(16).divides(factorize(360)));
  EXPECT_TRUE(PrimeExponentVector{}.divides(factorize(7)));
}

TEST(PrimeArith, CheckedAdd) {
  EXPECT_EQ(checked_add(2, 3), 5u);
  EXPECT_THROW(checked_add(~std::uint64_t{0}, 1), std::overflow_error);
}

TEST(PrimeArith, LogPrime) {
  EXPECT_DOUBLE_EQ(log_prime(2), std::log(2.0));
  EXPECT_DOUBLE_EQ(log_prime(1000003), std::log(1000003.0));
}
