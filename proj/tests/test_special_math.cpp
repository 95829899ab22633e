#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "grf/special_math.hpp"
#include "oracles.hpp"

using namespace grf;

TEST(HalfInteger, RejectsNonPositive) {
  EXPECT_THROW(HalfInteger(0), std::domain_error);
  EXPECT_THROW(HalfInteger(-3), std::domain_error);
  EXPECT_DOUBLE_EQ(HalfInteger(3).value(), 1.5);
  EXPECT_TRUE(HalfInteger(4).is_integer());
}

TEST(Gamma, IntegerArguments) {
  EXPECT_EQ(gamma_half_int(HalfInteger(2)), 1.0);
  EXPECT_EQ(gamma_half_int(HalfInteger(4)), 1.0);
  EXPECT_EQ(gamma_half_int(HalfInteger(8)), 6.0);
}

TEST(Gamma, HalfAgainstQuadrature) {
  // Gamma(1/2) = int_0^inf t^{-1/2} e^{-t} dt = 2 int_0^inf e^{-u^2} du
  const double q =
      2.0 * oracle::simpson([](double u) { return std::exp(-u * u); }, 0.0, 12.0, 4000);
  EXPECT_NEAR(gamma_half_int(half), q, 1e-12);
  EXPECT_NEAR(gamma_half_int(half), 1.7724539, 1e-7);
  EXPECT_NEAR(gamma_half_int(three_halves), 0.5 * q, 1e-12);
  EXPECT_NEAR(gamma_half_int(three_halves), 0.8862269, 1e-7);
}

TEST(Gamma, RecurrenceIsExact) {
  for (int t = 1; t <= 9; ++t) {
    const HalfInteger a(t);
    EXPECT_EQ(gamma_half_int(a + HalfInteger(2)), a.value() * gamma_half_int(a))
        << "a = " << a.value();
  }
}

TEST(BesselK, ClosedFormHalf) {
  EXPECT_NEAR(bessel_k(half, 2.0), 0.1199377, 1e-7);
  EXPECT_NEAR(bessel_k(half, 2.0), std::sqrt(std::numbers::pi / 4) * std::exp(-2.0),
              1e-15);
}

TEST(BesselK, OrderOneSmallArgumentLimit) {
  const double x = 1e-4;
  EXPECT_NEAR(x * bessel_k(one, x), 1.0, 1e-3);
}

TEST(BesselK, OrderOneAtRootEight) {
  const double x = 2.8284271;
  EXPECT_NEAR(bessel_k(one, x), 0.0494, 2e-4);
  EXPECT_NEAR(bessel_k(one, x), oracle::bessel_k_integral(1.0, x), 1e-12);
}

TEST(BesselK, MatchesIntegralRepresentation) {
  std::vector<double> xs;
  for (double x = 1e-6; x <= 50.0; x *= 1.37)
    xs.push_back(x);
  xs.push_back(1.0);
  xs.push_back(50.0);
  for (double x : xs)
    for (auto nu : {half, one, three_halves}) {
      const double ref = oracle::bessel_k_integral(nu.value(), x);
      EXPECT_NEAR(bessel_k(nu, x) / ref, 1.0, 1e-8) << "nu=" << nu.value() << " x=" << x;
    }
}

TEST(BesselK, MatchesStandardLibrary) {
  for (double x = 1e-3; x < 40.0; x *= 1.21)
    EXPECT_NEAR(bessel_k(one, x) / std::cyl_bessel_k(1.0, x), 1.0, 1e-12) << x;
}

TEST(BesselK, HalfOddRecurrence) {
  for (double x = 0.1; x <= 20.0; x += 0.05) {
    const double lhs = bessel_k(three_halves, x);
    const double rhs = bessel_k(half, x) + bessel_k(half, x) / x;
    EXPECT_NEAR(lhs / rhs, 1.0, 1e-8) << x;
  }
}

TEST(BesselK, OrderOneDecayRate) {
  // K_1'(x) = -K_0(x) - K_1(x)/x, so the secant slope exceeds K_1/x.
  double prev = bessel_k(one, 0.05);
  for (double x = 0.06; x <= 30.0; x += 0.01) {
    const double k = bessel_k(one, x);
    EXPECT_GT((prev - k) / 0.01, k / x) << x;
    prev = k;
  }
}

TEST(BesselK, StrictlyDecreasing) {
  for (auto nu : {half, one, three_halves}) {
    double prev = bessel_k(nu, 1e-6);
    for (double x = 2e-6; x <= 50.0; x *= 1.05) {
      const double k = bessel_k(nu, x);
      EXPECT_LT(k, prev);
      prev = k;
    }
  }
}

TEST(BesselK, DomainErrors) {
  EXPECT_THROW(bessel_k(one, 0.0), std::domain_error);
  EXPECT_THROW(bessel_k(one, -1.0), std::domain_error);
  EXPECT_THROW(bessel_k(HalfInteger(5), 1.0), std::domain_error);
}
