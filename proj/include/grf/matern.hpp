#ifndef GRF_MATERN_HPP
#define GRF_MATERN_HPP

// Analytic Matern covariance in free space, used as the reference the
// discrete fields are compared against.

#include <cmath>
#include <stdexcept>

#include "grf/special_math.hpp"

namespace grf {

/// Continuous-model parameters.  kappa is derived from rho and nu with the
/// convention rho = sqrt(8 nu) / kappa.
struct MaternParams {
  double sigma2;
  double rho;
  HalfInteger nu;
  int dim;
  double kappa;

  static MaternParams make(double sigma2, double rho, HalfInteger nu, int dim) {
    if (!(sigma2 > 0.0))
      throw std::domain_error("MaternParams: sigma2 must be positive");
    if (!(rho > 0.0))
      throw std::domain_error("MaternParams: rho must be positive");
    if (dim < 1 || dim > 3)
      throw std::domain_error("MaternParams: dim must be 1, 2 or 3");
    return {sigma2, rho, nu, dim, std::sqrt(8.0 * nu.value()) / rho};
  }

  /// Smoothness that makes the SPDE exponent equal to 2 in dimension dim.
  static MaternParams bilaplacian(double sigma2, double rho, int dim) {
    if (dim < 1 || dim > 3)
      throw std::domain_error("MaternParams: dim must be 1, 2 or 3");
    return make(sigma2, rho, HalfInteger(4 - dim), dim);
  }
};

inline double matern_correlation(const MaternParams& p, double r) {
  if (r < 0.0)
    throw std::domain_error("matern_correlation: negative distance");
  if (r == 0.0)
    return 1.0;
  const double kr = p.kappa * r;
  const double nu = p.nu.value();
  // (kr)^nu K_nu(kr) underflows to 0 at large kr, which is the right limit.
  const double val = std::pow(kr, nu) * bessel_k(p.nu, kr) /
                     (std::pow(2.0, nu - 1.0) * gamma_half_int(p.nu));
  return val;
}

inline double matern_covariance(const MaternParams& p, double r) {
  return p.sigma2 * matern_correlation(p, r);
}

} // namespace grf

#endif // GRF_MATERN_HPP
