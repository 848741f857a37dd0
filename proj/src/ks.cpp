#include "mpw/ks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mpw {
namespace {

void require_size(std::size_t n, const char* what) {
  if (n < kKsMinSample) {
    throw std::invalid_argument(std::string(what) + ": need at least " +
                                std::to_string(kKsMinSample) + " observations, got " +
                                std::to_string(n));
  }
}

void require_finite(const std::vector<double>& v) {
  for (const double x : v) {
    if (std::isnan(x)) throw std::invalid_argument("ks test: NaN in sample");
  }
}

// Stephens' small-sample correction of the asymptotic argument.
double p_value_for(double d, double n_effective) {
  const double root = std::sqrt(n_effective);
  return kolmogorov_survival((root + 0.12 + 0.11 / root) * d);
}

}  // namespace

double kolmogorov_survival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  double p;
  if (lambda < 1.18) {
    constexpr double pi = std::numbers::pi;
    const double w = -pi * pi / (8.0 * lambda * lambda);
    double cdf = 0.0;
    for (int j = 1; j <= 20; ++j) {
      const double odd = 2.0 * j - 1.0;
      cdf += std::exp(odd * odd * w);
    }
    p = 1.0 - std::sqrt(2.0 * pi) / lambda * cdf;
  } else {
    p = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
      const double term = std::exp(-2.0 * j * j * lambda * lambda);
      p += sign * term;
      if (term < 1e-300) break;
      sign = -sign;
    }
    p *= 2.0;
  }
  return std::clamp(p, 0.0, 1.0);
}

KsResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf) {
  require_size(sample.size(), "ks_one_sample");
  require_finite(sample);
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  KsResult r;
  r.n = sample.size();
  for (std::size_t i = 0; i < sample.size();) {
    std::size_t j = i;
    while (j < sample.size() && sample[j] == sample[i]) ++j;
    const double f = cdf(sample[i]);
    const double below = static_cast<double>(i) / n;
    const double at = static_cast<double>(j) / n;
    if (j - i == 1) {
      r.statistic = std::max({r.statistic, at - f, f - below});
    } else {
      r.ties = true;
      r.statistic = std::max(r.statistic, std::abs(0.5 * (below + at) - f));
    }
    i = j;
  }
  r.p_value = p_value_for(r.statistic, n);
  return r;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  require_size(a.size(), "ks_two_sample");
  require_size(b.size(), "ks_two_sample");
  require_finite(a);
  require_finite(b);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  KsResult r;
  r.n = a.size();
  r.n_reference = b.size();
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    double v;
    if (j == b.size() || (i < a.size() && a[i] <= b[j])) {
      v = a[i];
    } else {
      v = b[j];
    }
    const std::size_t i0 = i, j0 = j;
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    if (i - i0 > 1 || j - j0 > 1 || (i > i0 && j > j0)) r.ties = true;
    r.statistic = std::max(r.statistic, std::abs(static_cast<double>(i) / na -
                                                 static_cast<double>(j) / nb));
  }
  r.p_value = p_value_for(r.statistic, na * nb / (na + nb));
  return r;
}

}  // namespace mpw
