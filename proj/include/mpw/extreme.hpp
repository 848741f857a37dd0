#pragma once

// Simulation of the multivariate extreme process
//   M(u) = sup_{k : t_k <= u} y_k   (coordinatewise)
// driven by a Poisson point process with intensity LEB x nu, where nu puts
// mass c_i r^{-alpha} above r on coordinate axis i.

#include <cstddef>
#include <span>
#include <vector>

#include "mpw/random.hpp"

namespace mpw {

struct ExtremeAtom {
  double time;
  std::size_t coordinate;
  double magnitude;
};

struct ExtremeProcessSample {
  std::vector<ExtremeAtom> atoms;  // ascending in time
  double horizon = 0.0;
  std::vector<double> tail_constants;
  double alpha = 0.0;
  double r_min = 0.0;

  std::size_t dimension() const { return tail_constants.size(); }
  double total_tail_constant() const;

  /// Coordinatewise sup over atoms with time <= u; 0 for an empty sup.
  std::vector<double> sup_at(double u) const;
};

/// One tail constant per coordinate. Atoms with magnitude below r_min are
/// not generated.
ExtremeProcessSample simulate_extreme(std::span<const double> tail_constants, double alpha,
                                      double horizon, double r_min, RandomStream& rng);

/// Total constant c spread evenly over d coordinates.
ExtremeProcessSample simulate_extreme(double c, double alpha, std::size_t d, double horizon,
                                      double r_min, RandomStream& rng);

/// P{M(u) <= x} = exp(-u c x^{-alpha}) for one coordinate.
double frechet_cdf(double x, double u, double c, double alpha);

}  // namespace mpw
