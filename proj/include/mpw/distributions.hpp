#pragma once

// Step laws on the positive integers, their couplings (xi, eta), exact
// prime-multiplicity tail queries and series-based moments.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mpw/prime_arith.hpp"
#include "mpw/random.hpp"

namespace mpw {

/// The law has no exact tail/divisibility evaluation route.
class NoClosedForm : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A series could not be summed to the requested tolerance (divergent or
/// out of iteration budget).
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sampled prime exponents are capped here so that sums along a walk stay
/// inside 64 bits. Only the heavy-tailed exponent laws can reach it.
inline constexpr std::uint64_t kMaxSampledExponent = std::uint64_t{1} << 62;

class StepLaw;

namespace detail {
struct ZetaSampler;
}

struct ZetaLaw {
  double alpha;
  double normalizer;  // zeta(alpha)
  std::shared_ptr<const detail::ZetaSampler> sampler;
};

struct GeometricLaw {
  double beta;  // P{xi = k} = beta^{k-1} (1 - beta)
};

struct TruncPoissonLaw {
  double lambda;  // Poisson(lambda) conditioned on >= 1
};

/// xi = p^K with P{prime = p} = g_p and t_k proportional to k^{-tail_exponent}.
struct PrimePowerHeavyLaw {
  std::vector<std::pair<std::uint64_t, double>> weights;  // ascending primes
  std::vector<double> cumulative;
  double tail_exponent;
  double tail_normalizer;  // zeta(tail_exponent)
};

/// xi = prime^K with P{K >= k} = k^{-alpha}, k >= 1.
struct ParetoExponentLaw {
  std::uint64_t prime;
  double alpha;
};

struct DegenerateLaw {
  std::uint64_t value;
};

struct TableLaw {
  std::vector<std::pair<std::uint64_t, double>> pmf;  // ascending support
  std::vector<double> cumulative;
  std::vector<std::vector<PrimePower>> factored;
};

/// Product of independent draws from each factor law.
struct ProductLaw {
  std::vector<StepLaw> factors;
};

class StepLaw {
 public:
  using Kind = std::variant<ZetaLaw, GeometricLaw, TruncPoissonLaw, PrimePowerHeavyLaw,
                            ParetoExponentLaw, DegenerateLaw, TableLaw, ProductLaw>;

  static StepLaw zeta(double alpha);
  static StepLaw geometric(double beta);
  static StepLaw trunc_poisson(double lambda);
  static StepLaw prime_power_heavy(std::vector<std::pair<std::uint64_t, double>> weights,
                                   double tail_exponent = 2.0);
  static StepLaw pareto_exponent(std::uint64_t prime, double alpha);
  static StepLaw degenerate(std::uint64_t value);
  static StepLaw table(std::vector<std::pair<std::uint64_t, double>> pmf,
                       double mass_tolerance = 1e-12);
  static StepLaw product(std::vector<StepLaw> factors);

  const Kind& kind() const { return *kind_; }

  template <typename T>
  const T* as() const {
    return std::get_if<T>(kind_.get());
  }

  /// P{xi = k}. Throws NoClosedForm for product laws.
  double pmf(std::uint64_t k) const;

  std::string describe() const;

 private:
  explicit StepLaw(Kind kind) : kind_(std::make_shared<const Kind>(std::move(kind))) {}
  std::shared_ptr<const Kind> kind_;
};

/// Exact draw. Throws std::overflow_error when the drawn integer does not
/// fit in 64 bits (use sample_factors for exponent-space draws).
std::uint64_t sample_step(const StepLaw& law, RandomStream& rng);

/// Exact draw in exponent space; `out` is cleared and filled ascending.
void sample_factors(const StepLaw& law, RandomStream& rng, std::vector<PrimePower>& out);

PrimeExponentVector sample_exponents(const StepLaw& law, RandomStream& rng);

/// P{m divides xi}.
double divisibility_probability(const StepLaw& law, const PrimeExponentVector& m);

/// P{lambda_p(xi) >= k}; 1 for k = 0.
double lambda_tail(const StepLaw& law, std::uint64_t p, std::uint64_t k);

/// Finite-support prime set of the law, or nullopt when every prime can occur.
std::optional<std::vector<std::uint64_t>> prime_support(const StepLaw& law);

/// E[lambda_p(xi)], Var[lambda_p(xi)], Cov[lambda_p(xi), lambda_q(xi)].
double lambda_mean(const StepLaw& law, std::uint64_t p, double tol = 1e-12);
double lambda_variance(const StepLaw& law, std::uint64_t p, double tol = 1e-12);
double lambda_covariance(const StepLaw& law, std::uint64_t p, std::uint64_t q,
                         double tol = 1e-12);

struct MomentSummary {
  double mu_xi = 0.0;      // E log xi
  double sigma2_xi = 0.0;  // Var log xi
  std::map<std::uint64_t, double> mean_lambda;
  /// Keys (p, q) with p <= q; the diagonal holds variances.
  std::map<std::pair<std::uint64_t, std::uint64_t>, double> cov_lambda;
  double truncation_error_bound = 0.0;

  double covariance(std::uint64_t p, std::uint64_t q) const {
    return cov_lambda.at(p <= q ? std::make_pair(p, q) : std::make_pair(q, p));
  }
};

/// Throws TruncationError when E[log xi] or E[log^2 xi] diverges.
MomentSummary compute_moments(const StepLaw& law, std::uint64_t prime_limit,
                              double tol = 1e-10);

/// True when E[log^2 xi] is finite.
bool has_finite_log_second_moment(const StepLaw& law);

struct PrimeSets {
  std::vector<std::uint64_t> frequent;  // P1(n): P{lambda_p(xi) > 0} >= n^{-1/2}
  std::vector<std::uint64_t> rare;      // P2(n), restricted to p <= prime_limit
};

PrimeSets p_sets(const StepLaw& law, std::uint64_t n, std::uint64_t prime_limit);

// ---------------------------------------------------------------------------
// Couplings of (xi, eta)

struct IndependentCoupling {
  StepLaw xi;
  StepLaw eta;
};
struct IdenticalCoupling {
  StepLaw law;
};
struct XiOneCoupling {
  StepLaw eta;
};
struct JointAtom {
  std::uint64_t xi;
  std::uint64_t eta;
  double mass;
};
struct JointTableCoupling {
  std::vector<JointAtom> atoms;
  std::vector<double> cumulative;
  std::vector<std::vector<PrimePower>> xi_factored;
  std::vector<std::vector<PrimePower>> eta_factored;
  StepLaw xi_marginal;
  StepLaw eta_marginal;
};

class JointStepLaw {
 public:
  using Coupling =
      std::variant<IndependentCoupling, IdenticalCoupling, XiOneCoupling, JointTableCoupling>;

  static JointStepLaw independent(StepLaw xi, StepLaw eta);
  static JointStepLaw identical(StepLaw law);
  static JointStepLaw xi_degenerate_one(StepLaw eta);
  /// Masses must sum to 1 within `mass_tolerance`.
  static JointStepLaw joint_table(std::vector<JointAtom> atoms, double mass_tolerance = 1e-9);

  const Coupling& coupling() const { return *coupling_; }

  template <typename T>
  const T* as() const {
    return std::get_if<T>(coupling_.get());
  }

  StepLaw xi_marginal() const;
  StepLaw eta_marginal() const;

  /// Draws one (xi, eta) pair in exponent space.
  void sample_pair(RandomStream& rng, std::vector<PrimePower>& xi,
                   std::vector<PrimePower>& eta) const;

  std::string describe() const;

 private:
  explicit JointStepLaw(Coupling c) : coupling_(std::make_shared<const Coupling>(std::move(c))) {}
  std::shared_ptr<const Coupling> coupling_;
};

/// Rows "xi,eta,mass"; an optional non-numeric header line is skipped.
JointStepLaw parse_joint_table_csv(std::istream& in);

/// Constraint (k_q, l_q) per prime q.
using PrimeCountConstraints = std::map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>>;

/// P{lambda_q(xi) >= k_q, lambda_q(eta) >= l_q for all constrained q}.
double joint_prime_count_tail(const JointStepLaw& law, const PrimeCountConstraints& constraints,
                              double tol = 1e-12);

enum class Trend { kDecreasing, kIncreasing, kConstant, kMixed };
const char* to_string(Trend t);

struct Main2ConditionRow {
  std::uint64_t n = 0;
  std::uint64_t frequent_max_prime = 0;  // largest prime of P1(n), 0 if empty
  std::size_t frequent_count = 0;
  double remainder_eta = 0.0;   // sum over P2(n) of E[lambda_p(eta)] log p
  double ratio_eta = 0.0;       // remainder_eta / n^{-1/2}
  double remainder_diff = 0.0;  // sum over P2(n) of E[(lambda_p(eta)-lambda_p(xi))^+] log p
  double ratio_diff = 0.0;
};

struct Main2ConditionReport {
  std::uint64_t prime_limit = 0;
  double second_moment_partial_sum = 0.0;
  bool eta_log_second_moment_finite = false;
  std::vector<Main2ConditionRow> rows;
  Trend trend_eta = Trend::kMixed;
  Trend trend_diff = Trend::kMixed;
  /// "holds", "fails" or "inconclusive"
  std::string verdict;
};

Main2ConditionReport check_main2_conditions(const JointStepLaw& law,
                                            const std::vector<std::uint64_t>& n_grid,
                                            std::uint64_t prime_limit, double tol = 1e-12);

/// Regular-variation data of the perturbation's prime counts: the primes
/// driven by ParetoExponent factors, their common index and tail constants
/// under the normalization a(t) = t^{1/alpha}.
struct RegularVariationProfile {
  std::vector<std::uint64_t> primes;
  std::vector<double> tail_constants;
  double alpha = 0.0;
};

std::optional<RegularVariationProfile> regular_variation_profile(const StepLaw& eta);

}  // namespace mpw
