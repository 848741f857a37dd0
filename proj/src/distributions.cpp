#include "mpw/distributions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "mpw/zeta.hpp"

namespace mpw {
namespace detail {

// Exact zeta draws: an alias table over k <= kBody and, with the remaining
// mass, rejection from a discretized Pareto envelope on k > kBody.
struct ZetaSampler {
  static constexpr std::uint64_t kBody = 4096;
  double tail_mass = 0.0;
  std::vector<double> keep;
  std::vector<std::uint32_t> alias;
  std::vector<std::vector<PrimePower>> factored;  // factored[k-1]

  explicit ZetaSampler(double alpha, double normalizer) : keep(kBody), alias(kBody) {
    tail_mass = hurwitz_zeta(alpha, static_cast<double>(kBody + 1)) / normalizer;
    std::vector<double> w(kBody);
    double total = 0.0;
    for (std::uint64_t k = 1; k <= kBody; ++k) total += w[k - 1] = std::pow(static_cast<double>(k), -alpha);
    // Vose's alias construction
    std::vector<std::uint32_t> small, large;
    for (std::uint32_t i = 0; i < kBody; ++i) {
      w[i] *= static_cast<double>(kBody) / total;
      (w[i] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
      const auto s = small.back();
      small.pop_back();
      const auto l = large.back();
      keep[s] = w[s];
      alias[s] = l;
      w[l] -= 1.0 - w[s];
      if (w[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (const auto i : large) keep[i] = 1.0, alias[i] = i;
    for (const auto i : small) keep[i] = 1.0, alias[i] = i;
    factored.resize(kBody);
    for (std::uint64_t k = 1; k <= kBody; ++k) factorize_into(k, factored[k - 1]);
  }
};

}  // namespace detail

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kTwo64 = 0x1.0p64;

std::string format_number(double x) {
  std::ostringstream os;
  os.precision(15);
  os << x;
  return os.str();
}

// Pull `values` up to the next multiple check while keeping masses exact.
std::vector<double> cumulative_of(const std::vector<std::pair<std::uint64_t, double>>& pmf) {
  std::vector<double> cum;
  cum.reserve(pmf.size());
  double acc = 0.0;
  for (const auto& [_, w] : pmf) cum.push_back(acc += w);
  return cum;
}

std::size_t pick_cumulative(const std::vector<double>& cumulative, double u) {
  const double target = u * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  return std::min<std::size_t>(it - cumulative.begin(), cumulative.size() - 1);
}

bool divides_factored(std::span<const PrimePower> m, std::span<const PrimePower> n) {
  auto it = n.begin();
  for (const auto& e : m) {
    while (it != n.end() && it->prime < e.prime) ++it;
    if (it == n.end() || it->prime != e.prime || it->exponent < e.exponent) return false;
  }
  return true;
}

std::uint64_t exponent_of(std::span<const PrimePower> f, std::uint64_t p) {
  for (const auto& e : f) {
    if (e.prime == p) return e.exponent;
    if (e.prime > p) break;
  }
  return 0;
}

void merge_into(std::vector<PrimePower>& acc, std::span<const PrimePower> add) {
  std::vector<PrimePower> out;
  out.reserve(acc.size() + add.size());
  auto ia = acc.begin();
  auto ib = add.begin();
  while (ia != acc.end() || ib != add.end()) {
    if (ib == add.end() || (ia != acc.end() && ia->prime < ib->prime)) {
      out.push_back(*ia++);
    } else if (ia == acc.end() || ib->prime < ia->prime) {
      out.push_back(*ib++);
    } else {
      out.push_back({ia->prime, checked_add(ia->exponent, ib->exponent)});
      ++ia;
      ++ib;
    }
  }
  acc = std::move(out);
}

std::uint64_t power_checked(std::uint64_t p, std::uint64_t k) {
  std::uint64_t v = 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    if (__builtin_mul_overflow(v, p, &v)) {
      throw std::overflow_error("sampled value exceeds 64 bits; use exponent-space sampling");
    }
  }
  return v;
}

// ----- samplers ------------------------------------------------------------

std::uint64_t sample_zeta_tail(const detail::ZetaSampler& zs, double alpha, RandomStream& rng);

std::uint64_t sample_zeta_index(const ZetaLaw& z, RandomStream& rng, std::size_t& body_index);

std::uint64_t sample_zeta(const ZetaLaw& z, RandomStream& rng) {
  std::size_t unused;
  return sample_zeta_index(z, rng, unused);
}

std::uint64_t sample_zeta_tail(const detail::ZetaSampler&, double alpha, RandomStream& rng) {
  // k = floor(Y), Y Pareto(alpha - 1) on [K1, inf). Since
  // k^{1-a} - (k+1)^{1-a} >= (a-1)(k+1)^{-a}, the ratio below is <= 1.
  constexpr double k1 = static_cast<double>(detail::ZetaSampler::kBody + 1);
  const double am1 = alpha - 1.0;
  const double scale = std::pow(k1 / (k1 + 1.0), alpha);
  for (;;) {
    const double k = std::floor(k1 * std::pow(rng.uniform_positive(), -1.0 / am1));
    const double gap = -std::expm1(-am1 * std::log1p(1.0 / k));  // 1 - (1+1/k)^{1-a}
    if (rng.uniform() * k * gap <= am1 * scale) {
      if (k >= kTwo64) throw std::overflow_error("zeta draw exceeds 64 bits");
      return static_cast<std::uint64_t>(k);
    }
  }
}

// body_index is k-1 for body draws and kBody for tail draws.
std::uint64_t sample_zeta_index(const ZetaLaw& z, RandomStream& rng, std::size_t& body_index) {
  const auto& zs = *z.sampler;
  if (zs.tail_mass > 0.0 && rng.uniform() < zs.tail_mass) {
    body_index = detail::ZetaSampler::kBody;
    return sample_zeta_tail(zs, z.alpha, rng);
  }
  const double u = rng.uniform() * static_cast<double>(detail::ZetaSampler::kBody);
  const auto i = static_cast<std::size_t>(u);
  body_index = (u - static_cast<double>(i) < zs.keep[i]) ? i : zs.alias[i];
  return body_index + 1;
}

std::uint64_t sample_geometric(const GeometricLaw& g, RandomStream& rng) {
  const double k = 1.0 + std::floor(std::log(rng.uniform_positive()) / std::log(g.beta));
  if (k >= kTwo64) throw std::overflow_error("geometric draw exceeds 64 bits");
  return static_cast<std::uint64_t>(k);
}

std::uint64_t sample_trunc_poisson(const TruncPoissonLaw& tp, RandomStream& rng) {
  std::poisson_distribution<std::uint64_t> poisson(tp.lambda);
  for (;;) {
    const std::uint64_t k = poisson(rng.engine());
    if (k > 0) return k;
  }
}

double heavy_tail(const PrimePowerHeavyLaw& h, double k) {
  if (k <= 1.0) return 1.0;
  return hurwitz_zeta(h.tail_exponent, k) / h.tail_normalizer;
}

std::uint64_t sample_heavy_exponent(const PrimePowerHeavyLaw& h, RandomStream& rng) {
  // K = max{k : P{K >= k} >= V}
  const double v = rng.uniform_positive();
  std::uint64_t lo = 1, hi = kMaxSampledExponent;
  if (heavy_tail(h, static_cast<double>(hi)) >= v) return hi;
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (heavy_tail(h, static_cast<double>(mid)) >= v) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

std::uint64_t sample_pareto_exponent(const ParetoExponentLaw& pe, RandomStream& rng) {
  const double y = std::pow(rng.uniform_positive(), -1.0 / pe.alpha);
  if (y >= static_cast<double>(kMaxSampledExponent)) return kMaxSampledExponent;
  return static_cast<std::uint64_t>(y);
}

// ----- series helpers ------------------------------------------------------

struct SeriesValue {
  double value = 0.0;
  double error_bound = 0.0;
};

// Sums term(k) for k = first, first+1, ... assuming that once the ratio of
// consecutive terms drops below 1 it never increases again.
template <typename Term>
SeriesValue sum_decreasing(Term term, std::uint64_t first, double tol,
                           std::uint64_t budget = 10'000'000) {
  SeriesValue s;
  double prev = term(first);
  s.value = prev;
  for (std::uint64_t k = first + 1; k < first + budget; ++k) {
    const double cur = term(k);
    s.value += cur;
    if (cur == 0.0) return s;
    const double ratio = cur / prev;
    if (ratio < 1.0) {
      const double bound = cur * ratio / (1.0 - ratio);
      if (bound <= tol) {
        s.error_bound = bound;
        return s;
      }
    }
    prev = cur;
  }
  throw TruncationError("series did not converge within the iteration budget");
}

SeriesValue poisson_divisibility(double lambda, double m) {
  // (e^lambda - 1)^{-1} sum_{j>=1} lambda^{mj} / (mj)!
  const double norm = std::expm1(lambda);
  double term;
  if (m <= 10000.0) {
    term = 1.0;
    for (double i = 1.0; i <= m; i += 1.0) term *= lambda / i;
  } else {
    term = std::exp(m * std::log(lambda) - std::lgamma(m + 1.0));
  }
  SeriesValue s;
  for (double j = 1.0;; j += 1.0) {
    s.value += term;
    if (term == 0.0) break;
    // term_{j+1}/term_j = lambda^m / prod_{i=1..m}(mj+i) <= (lambda/(mj+1))^m
    const double r = std::pow(lambda / (m * j + 1.0), m);
    if (r < 1.0 && term * r / (1.0 - r) <= 1e-17 * s.value) {
      s.error_bound = term * r / (1.0 - r);
      break;
    }
    if (m <= 10000.0) {
      double next = term;
      for (double i = 1.0; i <= m; i += 1.0) next *= lambda / (m * j + i);
      term = next;
    } else {
      term = std::exp(m * (j + 1.0) * std::log(lambda) - std::lgamma(m * (j + 1.0) + 1.0));
    }
  }
  return {s.value / norm, s.error_bound / norm};
}

SeriesValue divisibility(const StepLaw& law, const PrimeExponentVector& m);

SeriesValue product_divisibility(const ProductLaw& prod, const PrimeExponentVector& m) {
  std::vector<std::optional<std::vector<std::uint64_t>>> supports;
  std::optional<std::size_t> unbounded;
  for (std::size_t i = 0; i < prod.factors.size(); ++i) {
    supports.push_back(prime_support(prod.factors[i]));
    if (!supports.back()) {
      if (unbounded) throw NoClosedForm("product law: two factors with unbounded prime support");
      unbounded = i;
    }
  }
  std::vector<std::vector<PrimePower>> parts(prod.factors.size());
  for (const auto& e : m.entries()) {
    std::optional<std::size_t> owner;
    for (std::size_t i = 0; i < supports.size(); ++i) {
      if (!supports[i]) continue;
      const auto& sup = *supports[i];
      if (std::binary_search(sup.begin(), sup.end(), e.prime)) {
        if (owner || unbounded) {
          throw NoClosedForm("product law: overlapping prime supports for " +
                             std::to_string(e.prime));
        }
        owner = i;
      }
    }
    if (!owner) owner = unbounded;
    if (!owner) return {0.0, 0.0};
    parts[*owner].push_back(e);
  }
  SeriesValue s{1.0, 0.0};
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].empty()) continue;
    const auto f = divisibility(prod.factors[i], PrimeExponentVector::from_sorted(parts[i]));
    s.error_bound = s.error_bound * f.value + s.value * f.error_bound;
    s.value *= f.value;
  }
  return s;
}

SeriesValue divisibility(const StepLaw& law, const PrimeExponentVector& m) {
  if (m.is_one()) return {1.0, 0.0};
  return std::visit(
      overloaded{
          [&](const ZetaLaw& z) -> SeriesValue {
            const auto exact = m.to_integer();
            if (exact && *exact < (std::uint64_t{1} << 53)) {
              return {std::pow(static_cast<double>(*exact), -z.alpha), 0.0};
            }
            return {std::exp(-z.alpha * m.log_value()), 0.0};
          },
          [&](const GeometricLaw& g) -> SeriesValue {
            const double mv = m.to_double();
            if (!std::isfinite(mv)) return {0.0, 0.0};
            // (1-beta) beta^{m-1} / (1 - beta^m)
            return {(1.0 - g.beta) * std::pow(g.beta, mv - 1.0) / -std::expm1(mv * std::log(g.beta)),
                    0.0};
          },
          [&](const TruncPoissonLaw& tp) -> SeriesValue {
            const double mv = m.to_double();
            if (!std::isfinite(mv)) return {0.0, 0.0};
            return poisson_divisibility(tp.lambda, mv);
          },
          [&](const PrimePowerHeavyLaw& h) -> SeriesValue {
            if (m.size() != 1) return {0.0, 0.0};
            const auto& e = m.entries().front();
            const auto it = std::lower_bound(
                h.weights.begin(), h.weights.end(), e.prime,
                [](const auto& w, std::uint64_t key) { return w.first < key; });
            if (it == h.weights.end() || it->first != e.prime) return {0.0, 0.0};
            return {it->second * heavy_tail(h, static_cast<double>(e.exponent)), 0.0};
          },
          [&](const ParetoExponentLaw& pe) -> SeriesValue {
            if (m.size() != 1 || m.entries().front().prime != pe.prime) return {0.0, 0.0};
            return {std::pow(static_cast<double>(m.entries().front().exponent), -pe.alpha), 0.0};
          },
          [&](const DegenerateLaw& d) -> SeriesValue {
            return {m.divides(factorize(d.value)) ? 1.0 : 0.0, 0.0};
          },
          [&](const TableLaw& t) -> SeriesValue {
            double sum = 0.0;
            for (std::size_t i = 0; i < t.pmf.size(); ++i) {
              if (divides_factored(m.entries(), t.factored[i])) sum += t.pmf[i].second;
            }
            return {sum, 0.0};
          },
          [&](const ProductLaw& prod) -> SeriesValue { return product_divisibility(prod, m); },
      },
      law.kind());
}

// ----- log moments ---------------------------------------------------------

struct LogMoments {
  double mean = 0.0;
  double second = 0.0;  // E log^2
  double error_bound = 0.0;
};

template <typename Pmf>
LogMoments log_moments_series(Pmf pmf, double tol) {
  LogMoments lm;
  for (int power = 1; power <= 2; ++power) {
    auto term = [&](std::uint64_t k) {
      const double l = std::log(static_cast<double>(k));
      return (power == 1 ? l : l * l) * pmf(k);
    };
    // Start past the point where log^power(k) is still growing fast relative
    // to the pmf decay, by summing the first few terms directly.
    constexpr std::uint64_t kHead = 64;
    double head = 0.0;
    for (std::uint64_t k = 2; k < kHead; ++k) head += term(k);
    const SeriesValue tail = sum_decreasing(term, kHead, tol);
    (power == 1 ? lm.mean : lm.second) = head + tail.value;
    lm.error_bound += tail.error_bound;
  }
  return lm;
}

LogMoments log_moments(const StepLaw& law, double tol) {
  return std::visit(
      overloaded{
          [&](const ZetaLaw& z) -> LogMoments {
            const ZetaJet j = riemann_zeta_jet(z.alpha);
            return {-j.d1 / j.value, j.d2 / j.value, 1e-13};
          },
          [&](const GeometricLaw& g) -> LogMoments {
            return log_moments_series(
                [&](std::uint64_t k) {
                  return std::pow(g.beta, static_cast<double>(k) - 1.0) * (1.0 - g.beta);
                },
                tol);
          },
          [&](const TruncPoissonLaw& tp) -> LogMoments {
            const double norm = std::expm1(tp.lambda);
            return log_moments_series(
                [&](std::uint64_t k) {
                  const double kd = static_cast<double>(k);
                  return std::exp(kd * std::log(tp.lambda) - std::lgamma(kd + 1.0)) / norm;
                },
                tol);
          },
          [&](const PrimePowerHeavyLaw& h) -> LogMoments {
            const double s = h.tail_exponent;
            if (s <= 3.0) throw TruncationError("E[log^2 xi] diverges for this prime-power law");
            const double ek = riemann_zeta(s - 1.0) / h.tail_normalizer;
            const double ek2 = riemann_zeta(s - 2.0) / h.tail_normalizer;
            LogMoments lm;
            for (const auto& [p, g] : h.weights) {
              const double l = log_prime(p);
              lm.mean += g * l * ek;
              lm.second += g * l * l * ek2;
            }
            lm.error_bound = 1e-12;
            return lm;
          },
          [&](const ParetoExponentLaw&) -> LogMoments {
            throw TruncationError("E[log xi] diverges for the Pareto-exponent law");
          },
          [&](const DegenerateLaw& d) -> LogMoments {
            const double l = std::log(static_cast<double>(d.value));
            return {l, l * l, 0.0};
          },
          [&](const TableLaw& t) -> LogMoments {
            LogMoments lm;
            for (const auto& [k, w] : t.pmf) {
              const double l = std::log(static_cast<double>(k));
              lm.mean += w * l;
              lm.second += w * l * l;
            }
            return lm;
          },
          [&](const ProductLaw& prod) -> LogMoments {
            // Independent factors: means and variances add.
            double mean = 0.0, var = 0.0, err = 0.0;
            for (const auto& f : prod.factors) {
              const LogMoments fm = log_moments(f, tol);
              mean += fm.mean;
              var += fm.second - fm.mean * fm.mean;
              err += fm.error_bound;
            }
            return {mean, var + mean * mean, err};
          },
      },
      law.kind());
}

// ----- lambda moments ------------------------------------------------------

bool lambda_mean_diverges(const StepLaw& law, std::uint64_t p) {
  if (const auto* pe = law.as<ParetoExponentLaw>()) return pe->prime == p;
  if (const auto* h = law.as<PrimePowerHeavyLaw>()) {
    if (h->tail_exponent > 2.0) return false;
    return std::any_of(h->weights.begin(), h->weights.end(),
                       [p](const auto& w) { return w.first == p; });
  }
  if (const auto* prod = law.as<ProductLaw>()) {
    return std::any_of(prod->factors.begin(), prod->factors.end(),
                       [p](const StepLaw& f) { return lambda_mean_diverges(f, p); });
  }
  return false;
}

// sum_{k>=1} weight(k) P{lambda_p >= k}
template <typename Weight>
double lambda_tail_series(const StepLaw& law, std::uint64_t p, Weight weight, double tol) {
  if (lambda_mean_diverges(law, p)) {
    throw TruncationError("E[lambda_p] diverges for prime " + std::to_string(p));
  }
  return sum_decreasing(
             [&](std::uint64_t k) { return weight(k) * lambda_tail(law, p, k); }, 1, tol, 100000)
      .value;
}

double lambda_second_moment(const StepLaw& law, std::uint64_t p, double tol) {
  if (const auto* z = law.as<ZetaLaw>()) {
    const double q = std::pow(static_cast<double>(p), -z->alpha);
    return q * (1.0 + q) / ((1.0 - q) * (1.0 - q));
  }
  if (const auto* t = law.as<TableLaw>()) {
    double s = 0.0;
    for (std::size_t i = 0; i < t->pmf.size(); ++i) {
      const double e = static_cast<double>(exponent_of(t->factored[i], p));
      s += t->pmf[i].second * e * e;
    }
    return s;
  }
  if (const auto* prod = law.as<ProductLaw>()) {
    // Var of an independent sum plus squared mean.
    double mean = 0.0, var = 0.0;
    for (const auto& f : prod->factors) {
      mean += lambda_mean(f, p, tol);
      var += lambda_variance(f, p, tol);
    }
    return var + mean * mean;
  }
  return lambda_tail_series(
      law, p, [](std::uint64_t k) { return 2.0 * static_cast<double>(k) - 1.0; }, tol);
}

// Marginal pmf of lambda_p from tails.
double lambda_pmf(const StepLaw& law, std::uint64_t p, std::uint64_t k) {
  return lambda_tail(law, p, k) - lambda_tail(law, p, k + 1);
}

struct PositivePartMoments {
  double first = 0.0;   // E[(Y-X)^+]
  double second = 0.0;  // E[((Y-X)^+)^2]
};

// X = lambda_p(xi), Y = lambda_p(eta) independent.
PositivePartMoments independent_positive_part(const StepLaw& xi, const StepLaw& eta,
                                              std::uint64_t p, double tol) {
  PositivePartMoments out;
  double covered = 0.0;
  for (std::uint64_t a = 0; a < 100000; ++a) {
    const double px = lambda_pmf(xi, p, a);
    covered += px;
    if (px > 0.0) {
      if (lambda_tail(eta, p, a + 1) == 0.0) break;
      const SeriesValue f = sum_decreasing(
          [&](std::uint64_t m) { return lambda_tail(eta, p, a + m); }, 1, tol * 1e-3, 100000);
      const SeriesValue s = sum_decreasing(
          [&](std::uint64_t m) {
            return (2.0 * static_cast<double>(m) - 1.0) * lambda_tail(eta, p, a + m);
          },
          1, tol * 1e-3, 100000);
      out.first += px * f.value;
      out.second += px * s.value;
    }
    if (1.0 - covered <= tol * 1e-3) break;
  }
  return out;
}

PositivePartMoments positive_part(const JointStepLaw& law, std::uint64_t p, double tol) {
  return std::visit(
      overloaded{
          [&](const IndependentCoupling& c) {
            return independent_positive_part(c.xi, c.eta, p, tol);
          },
          [&](const IdenticalCoupling&) { return PositivePartMoments{}; },
          [&](const XiOneCoupling& c) {
            return PositivePartMoments{lambda_mean(c.eta, p, tol),
                                       lambda_second_moment(c.eta, p, tol)};
          },
          [&](const JointTableCoupling& c) {
            PositivePartMoments out;
            for (std::size_t i = 0; i < c.atoms.size(); ++i) {
              const auto a = exponent_of(c.xi_factored[i], p);
              const auto b = exponent_of(c.eta_factored[i], p);
              if (b > a) {
                const double d = static_cast<double>(b - a);
                out.first += c.atoms[i].mass * d;
                out.second += c.atoms[i].mass * d * d;
              }
            }
            return out;
          },
      },
      law.coupling());
}

Trend classify(const std::vector<double>& values) {
  bool dec = true, inc = true, flat = true;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] < values[i - 1])) dec = false;
    if (!(values[i] > values[i - 1])) inc = false;
    if (values[i] != values[i - 1]) flat = false;
  }
  if (flat) return Trend::kConstant;
  if (dec) return Trend::kDecreasing;
  if (inc) return Trend::kIncreasing;
  return Trend::kMixed;
}

std::uint64_t parse_u64(std::string_view text, std::size_t line) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("joint table line " + std::to_string(line) +
                                ": bad integer '" + std::string(text) + "'");
  }
  return v;
}

double parse_double(std::string_view text, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("joint table line " + std::to_string(line) + ": bad mass '" +
                                std::string(text) + "'");
  }
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// StepLaw

StepLaw StepLaw::zeta(double alpha) {
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("zeta law requires alpha > 1, got " + format_number(alpha));
  }
  const double normalizer = riemann_zeta(alpha);
  return StepLaw(
      ZetaLaw{alpha, normalizer, std::make_shared<const detail::ZetaSampler>(alpha, normalizer)});
}

StepLaw StepLaw::geometric(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("geometric law requires 0 < beta < 1, got " + format_number(beta));
  }
  return StepLaw(GeometricLaw{beta});
}

StepLaw StepLaw::trunc_poisson(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("truncated Poisson law requires lambda > 0, got " +
                                format_number(lambda));
  }
  return StepLaw(TruncPoissonLaw{lambda});
}

StepLaw StepLaw::prime_power_heavy(std::vector<std::pair<std::uint64_t, double>> weights,
                                   double tail_exponent) {
  if (weights.empty()) throw std::invalid_argument("prime-power law requires prime weights");
  if (!(tail_exponent > 1.0)) {
    throw std::invalid_argument("prime-power law requires tail exponent > 1");
  }
  std::sort(weights.begin(), weights.end());
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const auto& [p, g] = weights[i];
    if (!is_prime(p)) throw std::invalid_argument("prime-power law: not a prime: " + std::to_string(p));
    if (i > 0 && weights[i - 1].first == p) {
      throw std::invalid_argument("prime-power law: repeated prime " + std::to_string(p));
    }
    if (!(g > 0.0)) throw std::invalid_argument("prime-power law: weights must be positive");
    total += g;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("prime-power law: weights must sum to 1, got " +
                                format_number(total));
  }
  PrimePowerHeavyLaw h{std::move(weights), {}, tail_exponent, riemann_zeta(tail_exponent)};
  h.cumulative = cumulative_of(h.weights);
  return StepLaw(std::move(h));
}

StepLaw StepLaw::pareto_exponent(std::uint64_t prime, double alpha) {
  if (!is_prime(prime)) {
    throw std::invalid_argument("Pareto-exponent law: not a prime: " + std::to_string(prime));
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("Pareto-exponent law requires 0 < alpha < 1, got " +
                                format_number(alpha));
  }
  return StepLaw(ParetoExponentLaw{prime, alpha});
}

StepLaw StepLaw::degenerate(std::uint64_t value) {
  if (value == 0) throw std::invalid_argument("degenerate law requires value >= 1");
  return StepLaw(DegenerateLaw{value});
}

StepLaw StepLaw::table(std::vector<std::pair<std::uint64_t, double>> pmf, double mass_tolerance) {
  if (pmf.empty()) throw std::invalid_argument("table law requires a nonempty pmf");
  std::sort(pmf.begin(), pmf.end());
  std::vector<std::pair<std::uint64_t, double>> merged;
  double total = 0.0;
  for (const auto& [k, w] : pmf) {
    if (k == 0) throw std::invalid_argument("table law support must be positive integers");
    if (!(w >= 0.0)) throw std::invalid_argument("table law masses must be nonnegative");
    total += w;
    if (!merged.empty() && merged.back().first == k) {
      merged.back().second += w;
    } else {
      merged.emplace_back(k, w);
    }
  }
  if (std::abs(total - 1.0) > mass_tolerance) {
    throw std::invalid_argument("table law masses must sum to 1, got " + format_number(total));
  }
  TableLaw t{std::move(merged), {}, {}};
  t.cumulative = cumulative_of(t.pmf);
  for (const auto& [k, _] : t.pmf) {
    t.factored.emplace_back();
    factorize_into(k, t.factored.back());
  }
  return StepLaw(std::move(t));
}

StepLaw StepLaw::product(std::vector<StepLaw> factors) {
  if (factors.empty()) throw std::invalid_argument("product law requires at least one factor");
  return StepLaw(ProductLaw{std::move(factors)});
}

double StepLaw::pmf(std::uint64_t k) const {
  if (k == 0) return 0.0;
  const double kd = static_cast<double>(k);
  return std::visit(
      overloaded{
          [&](const ZetaLaw& z) { return std::pow(kd, -z.alpha) / z.normalizer; },
          [&](const GeometricLaw& g) { return std::pow(g.beta, kd - 1.0) * (1.0 - g.beta); },
          [&](const TruncPoissonLaw& tp) {
            return std::exp(kd * std::log(tp.lambda) - std::lgamma(kd + 1.0)) /
                   std::expm1(tp.lambda);
          },
          [&](const PrimePowerHeavyLaw& h) {
            const auto f = factorize(k);
            if (f.size() != 1) return 0.0;
            const auto& e = f.entries().front();
            for (const auto& [p, g] : h.weights) {
              if (p == e.prime) {
                return g * std::pow(static_cast<double>(e.exponent), -h.tail_exponent) /
                       h.tail_normalizer;
              }
            }
            return 0.0;
          },
          [&](const ParetoExponentLaw& pe) {
            const auto f = factorize(k);
            if (f.size() != 1 || f.entries().front().prime != pe.prime) return 0.0;
            const double j = static_cast<double>(f.entries().front().exponent);
            return std::pow(j, -pe.alpha) - std::pow(j + 1.0, -pe.alpha);
          },
          [&](const DegenerateLaw& d) { return k == d.value ? 1.0 : 0.0; },
          [&](const TableLaw& t) {
            const auto it = std::lower_bound(
                t.pmf.begin(), t.pmf.end(), k,
                [](const auto& e, std::uint64_t key) { return e.first < key; });
            return (it != t.pmf.end() && it->first == k) ? it->second : 0.0;
          },
          [&](const ProductLaw&) -> double {
            throw NoClosedForm("pmf of a product law is not available");
          },
      },
      kind());
}

std::string StepLaw::describe() const {
  return std::visit(
      overloaded{
          [](const ZetaLaw& z) { return "Zeta(alpha=" + format_number(z.alpha) + ")"; },
          [](const GeometricLaw& g) { return "Geometric(beta=" + format_number(g.beta) + ")"; },
          [](const TruncPoissonLaw& tp) {
            return "TruncPoisson(lambda=" + format_number(tp.lambda) + ")";
          },
          [](const PrimePowerHeavyLaw& h) {
            std::string s = "PrimePowerHeavy(g={";
            for (std::size_t i = 0; i < h.weights.size(); ++i) {
              if (i) s += ",";
              s += std::to_string(h.weights[i].first) + ":" + format_number(h.weights[i].second);
            }
            return s + "}, t_k~k^-" + format_number(h.tail_exponent) + ")";
          },
          [](const ParetoExponentLaw& pe) {
            return "ParetoExponent(p=" + std::to_string(pe.prime) +
                   ", alpha=" + format_number(pe.alpha) + ")";
          },
          [](const DegenerateLaw& d) { return "Degenerate(" + std::to_string(d.value) + ")"; },
          [](const TableLaw& t) { return "Table(" + std::to_string(t.pmf.size()) + " atoms)"; },
          [](const ProductLaw& prod) {
            std::string s = "Product(";
            for (std::size_t i = 0; i < prod.factors.size(); ++i) {
              if (i) s += " * ";
              s += prod.factors[i].describe();
            }
            return s + ")";
          },
      },
      kind());
}

// ---------------------------------------------------------------------------
// Sampling

std::uint64_t sample_step(const StepLaw& law, RandomStream& rng) {
  return std::visit(
      overloaded{
          [&](const ZetaLaw& z) { return sample_zeta(z, rng); },
          [&](const GeometricLaw& g) { return sample_geometric(g, rng); },
          [&](const TruncPoissonLaw& tp) { return sample_trunc_poisson(tp, rng); },
          [&](const PrimePowerHeavyLaw& h) {
            const auto& p = h.weights[pick_cumulative(h.cumulative, rng.uniform())].first;
            return power_checked(p, sample_heavy_exponent(h, rng));
          },
          [&](const ParetoExponentLaw& pe) {
            return power_checked(pe.prime, sample_pareto_exponent(pe, rng));
          },
          [&](const DegenerateLaw& d) { return d.value; },
          [&](const TableLaw& t) { return t.pmf[pick_cumulative(t.cumulative, rng.uniform())].first; },
          [&](const ProductLaw& prod) {
            std::uint64_t v = 1;
            for (const auto& f : prod.factors) {
              if (__builtin_mul_overflow(v, sample_step(f, rng), &v)) {
                throw std::overflow_error("product draw exceeds 64 bits");
              }
            }
            return v;
          },
      },
      law.kind());
}

void sample_factors(const StepLaw& law, RandomStream& rng, std::vector<PrimePower>& out) {
  std::visit(
      overloaded{
          [&](const ZetaLaw& z) {
            std::size_t i;
            const std::uint64_t k = sample_zeta_index(z, rng, i);
            if (i < detail::ZetaSampler::kBody) {
              out.assign(z.sampler->factored[i].begin(), z.sampler->factored[i].end());
            } else {
              factorize_into(k, out);
            }
          },
          [&](const GeometricLaw& g) { factorize_into(sample_geometric(g, rng), out); },
          [&](const TruncPoissonLaw& tp) { factorize_into(sample_trunc_poisson(tp, rng), out); },
          [&](const PrimePowerHeavyLaw& h) {
            const auto& p = h.weights[pick_cumulative(h.cumulative, rng.uniform())].first;
            out.assign(1, PrimePower{p, sample_heavy_exponent(h, rng)});
          },
          [&](const ParetoExponentLaw& pe) {
            out.assign(1, PrimePower{pe.prime, sample_pareto_exponent(pe, rng)});
          },
          [&](const DegenerateLaw& d) { factorize_into(d.value, out); },
          [&](const TableLaw& t) {
            const auto& f = t.factored[pick_cumulative(t.cumulative, rng.uniform())];
            out.assign(f.begin(), f.end());
          },
          [&](const ProductLaw& prod) {
            out.clear();
            std::vector<PrimePower> part;
            for (const auto& f : prod.factors) {
              sample_factors(f, rng, part);
              merge_into(out, part);
            }
          },
      },
      law.kind());
}

PrimeExponentVector sample_exponents(const StepLaw& law, RandomStream& rng) {
  std::vector<PrimePower> f;
  sample_factors(law, rng, f);
  return PrimeExponentVector::from_sorted(std::move(f));
}

// ---------------------------------------------------------------------------
// Exact queries

double divisibility_probability(const StepLaw& law, const PrimeExponentVector& m) {
  return divisibility(law, m).value;
}

double lambda_tail(const StepLaw& law, std::uint64_t p, std::uint64_t k) {
  if (k == 0) return 1.0;
  if (!is_prime(p)) throw std::invalid_argument("lambda_tail: not a prime: " + std::to_string(p));
  return divisibility(law, PrimeExponentVector::from_sorted({{p, k}})).value;
}

std::optional<std::vector<std::uint64_t>> prime_support(const StepLaw& law) {
  using Support = std::optional<std::vector<std::uint64_t>>;
  return std::visit(
      overloaded{
          [](const ZetaLaw&) -> Support { return std::nullopt; },
          [](const GeometricLaw&) -> Support { return std::nullopt; },
          [](const TruncPoissonLaw&) -> Support { return std::nullopt; },
          [](const PrimePowerHeavyLaw& h) -> Support {
            std::vector<std::uint64_t> s;
            for (const auto& [p, _] : h.weights) s.push_back(p);
            return s;
          },
          [](const ParetoExponentLaw& pe) -> Support { return std::vector{pe.prime}; },
          [](const DegenerateLaw& d) -> Support {
            std::vector<std::uint64_t> s;
            for (const auto& e : factorize(d.value).entries()) s.push_back(e.prime);
            return s;
          },
          [](const TableLaw& t) -> Support {
            std::set<std::uint64_t> s;
            for (const auto& f : t.factored) {
              for (const auto& e : f) s.insert(e.prime);
            }
            return std::vector<std::uint64_t>(s.begin(), s.end());
          },
          [](const ProductLaw& prod) -> Support {
            std::set<std::uint64_t> s;
            for (const auto& f : prod.factors) {
              const auto fs = prime_support(f);
              if (!fs) return std::nullopt;
              s.insert(fs->begin(), fs->end());
            }
            return std::vector<std::uint64_t>(s.begin(), s.end());
          },
      },
      law.kind());
}

double lambda_mean(const StepLaw& law, std::uint64_t p, double tol) {
  if (const auto* z = law.as<ZetaLaw>()) {
    const double q = std::pow(static_cast<double>(p), -z->alpha);
    return q / (1.0 - q);
  }
  if (const auto* t = law.as<TableLaw>()) {
    double s = 0.0;
    for (std::size_t i = 0; i < t->pmf.size(); ++i) {
      s += t->pmf[i].second * static_cast<double>(exponent_of(t->factored[i], p));
    }
    return s;
  }
  if (const auto* d = law.as<DegenerateLaw>()) {
    return static_cast<double>(factorize(d->value).multiplicity(p));
  }
  if (const auto* prod = law.as<ProductLaw>()) {
    double s = 0.0;
    for (const auto& f : prod->factors) s += lambda_mean(f, p, tol);
    return s;
  }
  return lambda_tail_series(law, p, [](std::uint64_t) { return 1.0; }, tol);
}

double lambda_variance(const StepLaw& law, std::uint64_t p, double tol) {
  if (const auto* z = law.as<ZetaLaw>()) {
    const double q = std::pow(static_cast<double>(p), -z->alpha);
    return q / ((1.0 - q) * (1.0 - q));
  }
  if (law.as<DegenerateLaw>()) return 0.0;
  const double m = lambda_mean(law, p, tol);
  return std::max(0.0, lambda_second_moment(law, p, tol) - m * m);
}

double lambda_covariance(const StepLaw& law, std::uint64_t p, std::uint64_t q, double tol) {
  if (p == q) return lambda_variance(law, p, tol);
  return std::visit(
      overloaded{
          [](const ZetaLaw&) { return 0.0; },
          [](const DegenerateLaw&) { return 0.0; },
          [&](const TableLaw& t) {
            double mp = 0.0, mq = 0.0, mpq = 0.0;
            for (std::size_t i = 0; i < t.pmf.size(); ++i) {
              const double a = static_cast<double>(exponent_of(t.factored[i], p));
              const double b = static_cast<double>(exponent_of(t.factored[i], q));
              mp += t.pmf[i].second * a;
              mq += t.pmf[i].second * b;
              mpq += t.pmf[i].second * a * b;
            }
            return mpq - mp * mq;
          },
          [&](const ProductLaw& prod) {
            double s = 0.0;
            for (const auto& f : prod.factors) s += lambda_covariance(f, p, q, tol);
            return s;
          },
          [&](const auto&) {
            // E[lambda_p lambda_q] = sum_{j,k>=1} P{p^j q^k | xi}
            const double mp = lambda_mean(law, p, tol);
            const double mq = lambda_mean(law, q, tol);
            const SeriesValue outer = sum_decreasing(
                [&](std::uint64_t j) {
                  return sum_decreasing(
                             [&](std::uint64_t k) {
                               return divisibility(law, PrimeExponentVector({{p, j}, {q, k}})).value;
                             },
                             1, tol * 1e-2, 100000)
                      .value;
                },
                1, tol, 100000);
            return outer.value - mp * mq;
          },
      },
      law.kind());
}

MomentSummary compute_moments(const StepLaw& law, std::uint64_t prime_limit, double tol) {
  MomentSummary out;
  const LogMoments lm = log_moments(law, tol);
  if (!std::isfinite(lm.mean) || !std::isfinite(lm.second)) {
    throw TruncationError("log moments are not finite");
  }
  out.mu_xi = lm.mean;
  out.sigma2_xi = std::max(0.0, lm.second - lm.mean * lm.mean);
  out.truncation_error_bound = lm.error_bound;
  const auto primes = sieve_primes(prime_limit);
  for (const auto p : primes) out.mean_lambda[p] = lambda_mean(law, p, tol);
  for (std::size_t i = 0; i < primes.size(); ++i) {
    for (std::size_t j = i; j < primes.size(); ++j) {
      out.cov_lambda[{primes[i], primes[j]}] = lambda_covariance(law, primes[i], primes[j], tol);
    }
  }
  return out;
}

bool has_finite_log_second_moment(const StepLaw& law) {
  return std::visit(
      overloaded{
          [](const PrimePowerHeavyLaw& h) { return h.tail_exponent > 3.0; },
          [](const ParetoExponentLaw&) { return false; },
          [](const ProductLaw& prod) {
            return std::all_of(prod.factors.begin(), prod.factors.end(),
                               [](const StepLaw& f) { return has_finite_log_second_moment(f); });
          },
          [](const auto&) { return true; },
      },
      law.kind());
}

PrimeSets p_sets(const StepLaw& law, std::uint64_t n, std::uint64_t prime_limit) {
  if (n == 0) throw std::invalid_argument("p_sets: n must be >= 1");
  const double threshold = 1.0 / std::sqrt(static_cast<double>(n));
  PrimeSets sets;
  for (const auto p : sieve_primes(prime_limit)) {
    // Relative slack absorbs rounding at exact boundary cases such as p^-alpha == n^-1/2.
    if (lambda_tail(law, p, 1) >= threshold * (1.0 - 1e-12)) {
      sets.frequent.push_back(p);
    } else {
      sets.rare.push_back(p);
    }
  }
  return sets;
}

// ---------------------------------------------------------------------------
// JointStepLaw

JointStepLaw JointStepLaw::independent(StepLaw xi, StepLaw eta) {
  return JointStepLaw(IndependentCoupling{std::move(xi), std::move(eta)});
}

JointStepLaw JointStepLaw::identical(StepLaw law) {
  return JointStepLaw(IdenticalCoupling{std::move(law)});
}

JointStepLaw JointStepLaw::xi_degenerate_one(StepLaw eta) {
  return JointStepLaw(XiOneCoupling{std::move(eta)});
}

JointStepLaw JointStepLaw::joint_table(std::vector<JointAtom> atoms, double mass_tolerance) {
  if (atoms.empty()) throw std::invalid_argument("joint table requires at least one atom");
  std::sort(atoms.begin(), atoms.end(), [](const JointAtom& a, const JointAtom& b) {
    return std::tie(a.xi, a.eta) < std::tie(b.xi, b.eta);
  });
  std::vector<JointAtom> merged;
  double total = 0.0;
  for (const auto& a : atoms) {
    if (a.xi == 0 || a.eta == 0) throw std::invalid_argument("joint table entries must be >= 1");
    if (!(a.mass >= 0.0)) throw std::invalid_argument("joint table masses must be nonnegative");
    total += a.mass;
    if (!merged.empty() && merged.back().xi == a.xi && merged.back().eta == a.eta) {
      merged.back().mass += a.mass;
    } else {
      merged.push_back(a);
    }
  }
  if (std::abs(total - 1.0) > mass_tolerance) {
    throw std::invalid_argument("joint table masses must sum to 1, got " + format_number(total));
  }
  std::map<std::uint64_t, double> u, v;
  for (const auto& a : merged) {
    u[a.xi] += a.mass;
    v[a.eta] += a.mass;
  }
  auto xi_marginal = StepLaw::table({u.begin(), u.end()}, mass_tolerance);
  auto eta_marginal = StepLaw::table({v.begin(), v.end()}, mass_tolerance);
  JointTableCoupling c{std::move(merged), {}, {}, {}, std::move(xi_marginal),
                       std::move(eta_marginal)};
  double acc = 0.0;
  for (const auto& a : c.atoms) {
    c.cumulative.push_back(acc += a.mass);
    c.xi_factored.emplace_back();
    factorize_into(a.xi, c.xi_factored.back());
    c.eta_factored.emplace_back();
    factorize_into(a.eta, c.eta_factored.back());
  }
  return JointStepLaw(std::move(c));
}

StepLaw JointStepLaw::xi_marginal() const {
  return std::visit(overloaded{
                        [](const IndependentCoupling& c) { return c.xi; },
                        [](const IdenticalCoupling& c) { return c.law; },
                        [](const XiOneCoupling&) { return StepLaw::degenerate(1); },
                        [](const JointTableCoupling& c) { return c.xi_marginal; },
                    },
                    coupling());
}

StepLaw JointStepLaw::eta_marginal() const {
  return std::visit(overloaded{
                        [](const IndependentCoupling& c) { return c.eta; },
                        [](const IdenticalCoupling& c) { return c.law; },
                        [](const XiOneCoupling& c) { return c.eta; },
                        [](const JointTableCoupling& c) { return c.eta_marginal; },
                    },
                    coupling());
}

void JointStepLaw::sample_pair(RandomStream& rng, std::vector<PrimePower>& xi,
                               std::vector<PrimePower>& eta) const {
  std::visit(overloaded{
                 [&](const IndependentCoupling& c) {
                   sample_factors(c.xi, rng, xi);
                   sample_factors(c.eta, rng, eta);
                 },
                 [&](const IdenticalCoupling& c) {
                   sample_factors(c.law, rng, xi);
                   eta.assign(xi.begin(), xi.end());
                 },
                 [&](const XiOneCoupling& c) {
                   xi.clear();
                   sample_factors(c.eta, rng, eta);
                 },
                 [&](const JointTableCoupling& c) {
                   const std::size_t i = pick_cumulative(c.cumulative, rng.uniform());
                   xi.assign(c.xi_factored[i].begin(), c.xi_factored[i].end());
                   eta.assign(c.eta_factored[i].begin(), c.eta_factored[i].end());
                 },
             },
             coupling());
}

std::string JointStepLaw::describe() const {
  return std::visit(
      overloaded{
          [](const IndependentCoupling& c) {
            return "Independent(" + c.xi.describe() + ", " + c.eta.describe() + ")";
          },
          [](const IdenticalCoupling& c) { return "Identical(" + c.law.describe() + ")"; },
          [](const XiOneCoupling& c) { return "XiDegenerateOne(" + c.eta.describe() + ")"; },
          [](const JointTableCoupling& c) {
            return "JointTable(" + std::to_string(c.atoms.size()) + " atoms)";
          },
      },
      coupling());
}

JointStepLaw parse_joint_table_csv(std::istream& in) {
  std::vector<JointAtom> atoms;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
      const auto comma = text.find(',', start);
      fields.push_back(trim(text.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 3) {
      throw std::invalid_argument("joint table line " + std::to_string(line_no) +
                                  ": expected 3 fields (xi,eta,mass)");
    }
    if (atoms.empty() && !fields[0].empty() && !std::isdigit(static_cast<unsigned char>(fields[0][0]))) {
      continue;  // header
    }
    atoms.push_back({parse_u64(fields[0], line_no), parse_u64(fields[1], line_no),
                     parse_double(fields[2], line_no)});
  }
  return JointStepLaw::joint_table(std::move(atoms), 1e-9);
}

double joint_prime_count_tail(const JointStepLaw& law, const PrimeCountConstraints& constraints,
                              double tol) {
  std::vector<PrimePower> k_parts, l_parts;
  for (const auto& [q, kl] : constraints) {
    if (!is_prime(q)) {
      throw std::invalid_argument("joint_prime_count_tail: not a prime: " + std::to_string(q));
    }
    if (kl.first > 0) k_parts.push_back({q, kl.first});
    if (kl.second > 0) l_parts.push_back({q, kl.second});
  }
  const auto big_k = PrimeExponentVector::from_sorted(std::move(k_parts));
  const auto big_l = PrimeExponentVector::from_sorted(std::move(l_parts));

  auto checked = [tol](const SeriesValue& s) {
    if (s.error_bound > tol) {
      throw TruncationError("joint tail truncation error exceeds the requested tolerance");
    }
    return s.value;
  };

  return std::visit(
      overloaded{
          [&](const IndependentCoupling& c) {
            return checked(divisibility(c.xi, big_k)) * checked(divisibility(c.eta, big_l));
          },
          [&](const IdenticalCoupling& c) {
            const PrimeExponentVector both[] = {big_k, big_l};
            return checked(divisibility(c.law, pev_lcm(both)));
          },
          [&](const XiOneCoupling& c) {
            return big_k.is_one() ? checked(divisibility(c.eta, big_l)) : 0.0;
          },
          [&](const JointTableCoupling& c) {
            double sum = 0.0;
            for (std::size_t i = 0; i < c.atoms.size(); ++i) {
              if (divides_factored(big_k.entries(), c.xi_factored[i]) &&
                  divides_factored(big_l.entries(), c.eta_factored[i])) {
                sum += c.atoms[i].mass;
              }
            }
            return sum;
          },
      },
      law.coupling());
}

const char* to_string(Trend t) {
  switch (t) {
    case Trend::kDecreasing: return "decreasing";
    case Trend::kIncreasing: return "increasing";
    case Trend::kConstant: return "constant";
    case Trend::kMixed: return "mixed";
  }
  return "mixed";
}

Main2ConditionReport check_main2_conditions(const JointStepLaw& law,
                                            const std::vector<std::uint64_t>& n_grid,
                                            std::uint64_t prime_limit, double tol) {
  Main2ConditionReport report;
  report.prime_limit = prime_limit;
  const StepLaw xi = law.xi_marginal();
  const StepLaw eta = law.eta_marginal();
  report.eta_log_second_moment_finite = has_finite_log_second_moment(eta);

  const auto primes = sieve_primes(prime_limit);
  std::vector<double> hit(primes.size()), eta_mean(primes.size()), diff_mean(primes.size());
  for (std::size_t i = 0; i < primes.size(); ++i) {
    const auto p = primes[i];
    const double lp = log_prime(p);
    hit[i] = lambda_tail(xi, p, 1);
    try {
      eta_mean[i] = lambda_mean(eta, p, tol);
      const auto pp = positive_part(law, p, tol);
      diff_mean[i] = pp.first;
      report.second_moment_partial_sum += pp.second * lp;
    } catch (const TruncationError&) {
      eta_mean[i] = std::numeric_limits<double>::infinity();
      diff_mean[i] = std::numeric_limits<double>::infinity();
      report.second_moment_partial_sum = std::numeric_limits<double>::infinity();
    }
  }

  std::vector<double> ratios_eta, ratios_diff;
  bool diff_identically_zero = true;
  for (const auto n : n_grid) {
    if (n == 0) throw std::invalid_argument("check_main2_conditions: n must be >= 1");
    Main2ConditionRow row;
    row.n = n;
    const double threshold = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t i = 0; i < primes.size(); ++i) {
      if (hit[i] >= threshold * (1.0 - 1e-12)) {
        row.frequent_max_prime = primes[i];
        ++row.frequent_count;
      } else {
        const double lp = log_prime(primes[i]);
        row.remainder_eta += eta_mean[i] * lp;
        row.remainder_diff += diff_mean[i] * lp;
      }
    }
    row.ratio_eta = row.remainder_eta / threshold;
    row.ratio_diff = row.remainder_diff / threshold;
    if (row.remainder_diff != 0.0) diff_identically_zero = false;
    ratios_eta.push_back(row.ratio_eta);
    ratios_diff.push_back(row.ratio_diff);
    report.rows.push_back(row);
  }
  report.trend_eta = classify(ratios_eta);
  report.trend_diff = classify(ratios_diff);
  if (diff_identically_zero || report.trend_diff == Trend::kDecreasing ||
      report.trend_eta == Trend::kDecreasing) {
    report.verdict = "holds";
  } else if (report.trend_diff == Trend::kIncreasing) {
    report.verdict = "fails";
  } else {
    report.verdict = "inconclusive";
  }
  return report;
}

std::optional<RegularVariationProfile> regular_variation_profile(const StepLaw& eta) {
  std::vector<const ParetoExponentLaw*> pareto;
  if (const auto* pe = eta.as<ParetoExponentLaw>()) {
    pareto.push_back(pe);
  } else if (const auto* prod = eta.as<ProductLaw>()) {
    for (const auto& f : prod->factors) {
      if (const auto* fp = f.as<ParetoExponentLaw>()) {
        pareto.push_back(fp);
      } else if (!std::isfinite(log_moments(f, 1e-10).mean)) {
        return std::nullopt;
      }
    }
  }
  if (pareto.empty()) return std::nullopt;
  RegularVariationProfile profile;
  profile.alpha = pareto.front()->alpha;
  for (const auto* pe : pareto) {
    if (pe->alpha != profile.alpha) return std::nullopt;
    if (std::find(profile.primes.begin(), profile.primes.end(), pe->prime) != profile.primes.end()) {
      return std::nullopt;
    }
    profile.primes.push_back(pe->prime);
    profile.tail_constants.push_back(1.0);
  }
  return profile;
}

}  // namespace mpw
