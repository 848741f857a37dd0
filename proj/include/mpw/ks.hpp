#pragma once

// Kolmogorov-Smirnov goodness-of-fit tests with asymptotic p-values.

#include <cstddef>
#include <functional>
#include <vector>

namespace mpw {

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
  std::size_t n_reference = 0;  // two-sample only
  /// Tied observations were present. One-sample tests then compare the
  /// mid-ECDF (F(x-) + F(x))/2 with the reference at each tied value.
  bool ties = false;
};

inline constexpr std::size_t kKsMinSample = 100;

/// P{K > lambda} for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

/// Throws std::invalid_argument when the sample has fewer than 100 points.
KsResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace mpw
