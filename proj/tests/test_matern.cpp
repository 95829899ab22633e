#include <gtest/gtest.h>

#include <cmath>

#include "grf/matern.hpp"
#include "oracles.hpp"

using namespace grf;

namespace {
MaternParams with_kappa(HalfInteger nu, double kappa, double sigma2 = 1.0) {
  // rho chosen so that kappa comes out as requested
  return MaternParams::make(sigma2, std::sqrt(8.0 * nu.value()) / kappa, nu, 2);
}
} // namespace

TEST(Matern, KappaConvention) {
  const auto p = MaternParams::make(4.0, 0.25, one, 2);
  EXPECT_DOUBLE_EQ(p.kappa, std::sqrt(8.0) / 0.25);
  EXPECT_EQ(MaternParams::bilaplacian(1.0, 1.0, 1).nu, three_halves);
  EXPECT_EQ(MaternParams::bilaplacian(1.0, 1.0, 2).nu, one);
  EXPECT_EQ(MaternParams::bilaplacian(1.0, 1.0, 3).nu, half);
}

TEST(Matern, RejectsBadParams) {
  EXPECT_THROW(MaternParams::make(0.0, 1.0, one, 2), std::domain_error);
  EXPECT_THROW(MaternParams::make(1.0, -1.0, one, 2), std::domain_error);
  EXPECT_THROW(MaternParams::make(1.0, 1.0, one, 4), std::domain_error);
  EXPECT_THROW(matern_correlation(MaternParams::make(1, 1, one, 2), -0.1),
               std::domain_error);
}

TEST(Matern, ZeroDistance) {
  const auto p = MaternParams::make(4.0, 0.25, one, 2);
  EXPECT_EQ(matern_correlation(p, 0.0), 1.0);
  EXPECT_EQ(matern_covariance(p, 0.0), 4.0);
}

TEST(Matern, ExponentialCase) {
  const auto p = with_kappa(half, 8.0);
  EXPECT_NEAR(matern_correlation(p, 2.0 / 8.0), std::exp(-2.0), 1e-12);
  EXPECT_NEAR(matern_correlation(p, 0.25), 0.1353353, 1e-7);
  const auto p4 = with_kappa(half, 8.0, 4.0);
  EXPECT_NEAR(matern_covariance(p4, 0.25), 0.5413411, 1e-7);
  for (double r = 0.001; r < 5.0; r *= 1.3)
    EXPECT_NEAR(matern_covariance(p4, r) / (4.0 * std::exp(-8.0 * r)), 1.0, 1e-10);
}

TEST(Matern, ValueAtCorrelationLength) {
  const auto p1 = MaternParams::make(1.0, 0.25, one, 2);
  // oracle: K_1 from its integral representation at kappa r = sqrt 8
  const double x = std::sqrt(8.0);
  const double ref = x * oracle::bessel_k_integral(1.0, x);
  EXPECT_NEAR(matern_correlation(p1, 0.25), ref, 1e-10);
  EXPECT_NEAR(matern_correlation(p1, 0.25), 0.1398, 5e-4);

  const auto p32 = MaternParams::make(1.0, 0.25, three_halves, 1);
  const double y = std::sqrt(12.0);
  EXPECT_NEAR(matern_correlation(p32, 0.25), (1 + y) * std::exp(-y), 1e-12);
  EXPECT_NEAR(matern_correlation(p32, 0.25), 0.1397, 5e-4);

  for (auto nu : {half, one, three_halves}) {
    const auto p = MaternParams::make(2.0, 0.7, nu, 2);
    const double c = matern_correlation(p, p.rho);
    EXPECT_GE(c, 0.10);
    EXPECT_LE(c, 0.15);
  }
}

TEST(Matern, MonotoneAndBounded) {
  for (auto nu : {half, one, three_halves}) {
    const auto p = MaternParams::make(3.0, 0.3, nu, 2);
    double prev = matern_correlation(p, 0.0);
    for (double r = 1e-4; r < 3.0; r += 0.01) {
      const double c = matern_correlation(p, r);
      EXPECT_GT(c, 0.0);
      EXPECT_LE(c, 1.0);
      EXPECT_LT(c, prev);
      prev = c;
    }
  }
}
