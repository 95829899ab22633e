// Build a 2D Robin prior, draw a sample and print a few diagnostics.

#include <cstdio>

#include "grf/field.hpp"

int main() {
  using namespace grf;
  const auto prior = build_prior(unit_square_mesh(32, 32), 4.0, 0.25, BoundaryKind::robin);
  const auto& c = prior.coeffs();
  std::printf("gamma = %.6g  delta = %.6g  beta = %.6g\n", c.gamma, c.delta, c.beta);

  const auto u = sample(prior, 1);
  double lo = u.values[0], hi = u.values[0];
  for (double v : u.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::printf("sample range [%.4f, %.4f] over %zu nodes\n", lo, hi, u.values.size());

  const auto var = variance_field(prior);
  std::printf("variance: center %.4f  corner %.4f\n",
              var.values[nearest_node(prior.mesh(), {0.5, 0.5})], var.values[0]);

  const auto corr = correlation_field(prior, {0.5, 0.5}, &var);
  std::printf("correlation with center at (0.75, 0.5): %.4f\n",
              corr.values[nearest_node(prior.mesh(), {0.75, 0.5})]);
}
