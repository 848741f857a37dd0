#include "mpw/zeta.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace mpw {
namespace {

// Truncated Taylor series in eps: value + d1*eps + d2*eps^2/2.
struct Jet {
  double v, d1, d2;

  Jet operator+(const Jet& o) const { return {v + o.v, d1 + o.d1, d2 + o.d2}; }
  Jet operator*(const Jet& o) const {
    return {v * o.v, v * o.d1 + d1 * o.v, d2 * o.v + 2.0 * d1 * o.d1 + v * o.d2};
  }
  Jet operator*(double c) const { return {v * c, d1 * c, d2 * c}; }
};

// x^{-(s0 + eps)}
Jet inverse_power(double x, double s0) {
  const double base = std::pow(x, -s0);
  const double l = std::log(x);
  return {base, -l * base, l * l * base};
}

// B_{2j} / (2j)! for j = 1..8
constexpr std::array<double, 8> kBernoulliOverFactorial = {
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
};

constexpr int kDirectTerms = 20;

}  // namespace

ZetaJet hurwitz_zeta_jet(double s, double a) {
  if (!(s > 1.0)) throw std::domain_error("zeta: requires s > 1");
  if (!(a > 0.0)) throw std::domain_error("zeta: requires a > 0");

  Jet sum{0.0, 0.0, 0.0};
  const int direct = a >= kDirectTerms ? 0 : kDirectTerms;
  for (int i = 0; i < direct; ++i) sum = sum + inverse_power(a + i, s);

  const double x = a + direct;
  // integral: x^{1-s} / (s-1)
  const double inv = 1.0 / (s - 1.0);
  const Jet reciprocal{inv, -inv * inv, 2.0 * inv * inv * inv};
  sum = sum + inverse_power(x, s) * x * reciprocal;
  sum = sum + inverse_power(x, s) * 0.5;

  // B_{2j}/(2j)! * s(s+1)...(s+2j-2) * x^{-s-2j+1}
  Jet pochhammer{s, 1.0, 0.0};
  for (std::size_t j = 0; j < kBernoulliOverFactorial.size(); ++j) {
    const double order = 2.0 * static_cast<double>(j) + 1.0;
    sum = sum + pochhammer * inverse_power(x, s + order) * kBernoulliOverFactorial[j];
    pochhammer = pochhammer * Jet{s + order, 1.0, 0.0} * Jet{s + order + 1.0, 1.0, 0.0};
  }
  return {sum.v, sum.d1, sum.d2};
}

}  // namespace mpw
