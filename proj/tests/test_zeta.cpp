#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mpw/zeta.hpp"

using namespace mpw;

TEST(Zeta, ClosedForms) {
  const double pi = std::numbers::pi;
  EXPECT_NEAR(riemann_zeta(2.0), pi * pi / 6.0, 1e-14);
  EXPECT_NEAR(riemann_zeta(4.0), std::pow(pi, 4) / 90.0, 1e-14);
  EXPECT_NEAR(riemann_zeta(6.0), std::pow(pi, 6) / 945.0, 1e-14);
}

TEST(Zeta, DerivativeAtTwo) {
  // zeta'(2) = pi^2/6 (gamma + ln 2pi - 12 ln A)
  EXPECT_NEAR(riemann_zeta_jet(2.0).d1, -0.93754825431584375, 1e-12);
}

TEST(Zeta, HurwitzMatchesDirectSum) {
  for (const double s : {1.1, 1.5, 2.0, 3.7}) {
    for (const double a : {1.0, 2.5, 10.0}) {
      // direct partial sum with an integral tail estimate as oracle
      double sum = 0.0;
      const int n = 2000000;
      for (int i = 0; i < n; ++i) sum += std::pow(a + i, -s);
      const double x = a + n;
      sum += std::pow(x, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(x, -s);
      EXPECT_NEAR(hurwitz_zeta(s, a), sum, 1e-9 * sum) << s << " " << a;
    }
  }
}

TEST(Zeta, ShiftIdentity) {
  for (const double s : {1.3, 2.0, 4.5}) {
    EXPECT_NEAR(hurwitz_zeta(s, 1.0) - 1.0, hurwitz_zeta(s, 2.0), 1e-13);
  }
}

TEST(Zeta, SecondDerivativeByFiniteDifference) {
  const double s = 2.2, h = 1e-4;
  const double fd = (riemann_zeta_jet(s + h).d1 - riemann_zeta_jet(s - h).d1) / (2 * h);
  EXPECT_NEAR(riemann_zeta_jet(s).d2, fd, 1e-6);
}
