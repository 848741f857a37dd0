#include "mpw/extreme.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace mpw {
namespace {

void validate(double alpha, double horizon, double r_min) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("extreme process requires 0 < alpha < 1");
  }
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("extreme process requires a finite horizon >= 0");
  }
  if (!(r_min > 0.0)) throw std::invalid_argument("extreme process requires r_min > 0");
}

}  // namespace

double ExtremeProcessSample::total_tail_constant() const {
  return std::accumulate(tail_constants.begin(), tail_constants.end(), 0.0);
}

std::vector<double> ExtremeProcessSample::sup_at(double u) const {
  std::vector<double> m(dimension(), 0.0);
  for (const auto& a : atoms) {
    if (a.time > u) break;
    m[a.coordinate] = std::max(m[a.coordinate], a.magnitude);
  }
  return m;
}

ExtremeProcessSample simulate_extreme(std::span<const double> tail_constants, double alpha,
                                      double horizon, double r_min, RandomStream& rng) {
  validate(alpha, horizon, r_min);
  if (tail_constants.empty()) throw std::invalid_argument("extreme process needs d >= 1");
  for (const double c : tail_constants) {
    if (!(c > 0.0)) throw std::invalid_argument("tail constants must be positive");
  }
  ExtremeProcessSample s;
  s.horizon = horizon;
  s.tail_constants.assign(tail_constants.begin(), tail_constants.end());
  s.alpha = alpha;
  s.r_min = r_min;

  const double c = s.total_tail_constant();
  const double rate = horizon * c * std::pow(r_min, -alpha);
  std::poisson_distribution<std::uint64_t> count(rate);
  const std::uint64_t n = rate > 0.0 ? count(rng.engine()) : 0;

  std::vector<double> cumulative(tail_constants.size());
  std::partial_sum(tail_constants.begin(), tail_constants.end(), cumulative.begin());

  s.atoms.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    ExtremeAtom a;
    a.time = horizon * rng.uniform();
    const double pick = rng.uniform() * c;
    a.coordinate = std::min<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin(),
        cumulative.size() - 1);
    a.magnitude = r_min * std::pow(rng.uniform_positive(), -1.0 / alpha);
    s.atoms.push_back(a);
  }
  std::sort(s.atoms.begin(), s.atoms.end(),
            [](const ExtremeAtom& x, const ExtremeAtom& y) { return x.time < y.time; });
  return s;
}

ExtremeProcessSample simulate_extreme(double c, double alpha, std::size_t d, double horizon,
                                      double r_min, RandomStream& rng) {
  if (d == 0) throw std::invalid_argument("extreme process needs d >= 1");
  const std::vector<double> constants(d, c / static_cast<double>(d));
  return simulate_extreme(constants, alpha, horizon, r_min, rng);
}

double frechet_cdf(double x, double u, double c, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("frechet_cdf: 0 < alpha < 1");
  if (!(u > 0.0) || !(c > 0.0)) throw std::invalid_argument("frechet_cdf: u, c must be positive");
  if (std::isnan(x)) throw std::invalid_argument("frechet_cdf: x is NaN");
  if (x <= 0.0) return 0.0;
  return std::exp(-u * c * std::pow(x, -alpha));
}

}  // namespace mpw
