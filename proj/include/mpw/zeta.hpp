#pragma once

namespace mpw {

/// Value and first two derivatives in s of a function of s.
struct ZetaJet {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// Hurwitz zeta sum_{i>=0} (a+i)^{-s} with its s-derivatives, by direct
/// summation plus an Euler-Maclaurin tail. Requires s > 1, a > 0.
ZetaJet hurwitz_zeta_jet(double s, double a);

inline double hurwitz_zeta(double s, double a) { return hurwitz_zeta_jet(s, a).value; }
inline ZetaJet riemann_zeta_jet(double s) { return hurwitz_zeta_jet(s, 1.0); }
inline double riemann_zeta(double s) { return hurwitz_zeta_jet(s, 1.0).value; }

}  // namespace mpw
