#ifndef GRF_SPDE_COEFFS_HPP
#define GRF_SPDE_COEFFS_HPP

// Mapping between Matern statistics (sigma2, rho) and the coefficients of
// the second-order operator  A = delta I - div(gamma grad)  whose square is
// the precision.  The smoothness is pinned to nu = 2 - d/2 so that A^2 is
// the whole precision.
//
// With s the white-noise scaling
//   s = sigma kappa^nu sqrt(Gamma(nu + d/2) (4 pi)^{d/2} / Gamma(nu)),
// dividing (kappa^2 - Laplace) u = s W by s gives gamma = 1/s and
// delta = kappa^2/s.  Closed forms:
//   d=1, nu=3/2:  s = 2 sigma kappa^{3/2}
//   d=2, nu=1:    s = 2 sigma kappa sqrt(pi)
//   d=3, nu=1/2:  s = 2 sigma sqrt(kappa) sqrt(2 pi)

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string_view>

#include "grf/matern.hpp"
#include "grf/special_math.hpp"

namespace grf {

enum class BoundaryKind { robin, neumann };

inline std::string_view to_string(BoundaryKind bc) {
  return bc == BoundaryKind::robin ? "robin" : "neumann";
}

/// Divisor in the Robin coefficient beta = sqrt(delta gamma) / divisor.
inline constexpr double default_robin_divisor = 1.42;

struct SpdeCoeffs {
  double gamma;
  double delta;
  double s;
  double beta;
  BoundaryKind bc;
};

inline HalfInteger bilaplacian_nu(int dim) {
  if (dim < 1 || dim > 3)
    throw std::domain_error("dim must be 1, 2 or 3");
  return HalfInteger(4 - dim);
}

inline double kappa_from_rho(double rho, HalfInteger nu) {
  if (!(rho > 0.0))
    throw std::domain_error("kappa_from_rho: rho must be positive");
  return std::sqrt(8.0 * nu.value()) / rho;
}

inline double rho_from_kappa(double kappa, HalfInteger nu) {
  if (!(kappa > 0.0))
    throw std::domain_error("rho_from_kappa: kappa must be positive");
  return std::sqrt(8.0 * nu.value()) / kappa;
}

inline double scaling_factor(double sigma, double kappa, HalfInteger nu,
                             int dim) {
  if (!(sigma > 0.0) || !(kappa > 0.0))
    throw std::domain_error("scaling_factor: sigma and kappa must be positive");
  if (dim < 1 || dim > 3)
    throw std::domain_error("scaling_factor: dim must be 1, 2 or 3");
  const double g_num = gamma_half_int(nu + HalfInteger(dim));
  const double g_den = gamma_half_int(nu);
  const double four_pi = 4.0 * std::numbers::pi;
  return sigma * std::pow(kappa, nu.value()) *
         std::sqrt(g_num * std::pow(four_pi, 0.5 * dim) / g_den);
}

inline double robin_beta(double gamma, double delta,
                         double divisor = default_robin_divisor) {
  if (!(divisor > 0.0))
    throw std::domain_error("robin_beta: divisor must be positive");
  return std::sqrt(delta * gamma) / divisor;
}

inline SpdeCoeffs coeffs_from_stats(double sigma2, double rho, int dim,
                                    BoundaryKind bc,
                                    double robin_divisor = default_robin_divisor) {
  if (!(sigma2 > 0.0))
    throw std::domain_error("coeffs_from_stats: sigma2 must be positive");
  const HalfInteger nu = bilaplacian_nu(dim);
  const double kappa = kappa_from_rho(rho, nu);
  const double s = scaling_factor(std::sqrt(sigma2), kappa, nu, dim);
  SpdeCoeffs c{1.0 / s, kappa * kappa / s, s, 0.0, bc};
  if (bc == BoundaryKind::robin)
    c.beta = robin_beta(c.gamma, c.delta, robin_divisor);
  return c;
}

/// Free-space statistics belonging to (gamma, delta); the inverse of
/// coeffs_from_stats.  kappa = sqrt(delta/gamma), sigma from s = 1/gamma.
inline MaternParams stats_from_coeffs(double gamma, double delta, int dim) {
  if (!(gamma > 0.0) || !(delta > 0.0))
    throw std::domain_error("stats_from_coeffs: gamma and delta must be positive");
  const HalfInteger nu = bilaplacian_nu(dim);
  const double kappa = std::sqrt(delta / gamma);
  const double s = 1.0 / gamma;
  // s is linear in sigma
  const double sigma = s / scaling_factor(1.0, kappa, nu, dim);
  MaternParams p{sigma * sigma, rho_from_kappa(kappa, nu), nu, dim, kappa};
  return p;
}

} // namespace grf

#endif // GRF_SPDE_COEFFS_HPP
