#ifndef GRF_FIELD_HPP
#define GRF_FIELD_HPP

// The discrete biLaplacian prior.  With M the mass matrix, K the stiffness
// matrix of gamma*Theta and B the Robin boundary mass,
//
//   A = delta M + K + B,    precision R = A M^{-1} A,    C = A^{-1} M A^{-1}.
//
// Samples are u = A^{-1} G z with G G^T = M and z standard normal.  Pointwise
// statistics are statistics of the nodal coefficients.

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "grf/assembly.hpp"
#include "grf/matern.hpp"
#include "grf/mesh.hpp"
#include "grf/parallel.hpp"
#include "grf/sparse.hpp"
#include "grf/spde_coeffs.hpp"

namespace grf {

/// Seeded normal and Rademacher variates.  The engine is mt19937_64 (fully
/// specified by the standard); uniforms take the top 53 bits and normals use
/// the Marsaglia polar method, so streams do not depend on the standard
/// library's distribution implementations.
class NormalStream {
public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  double rademacher() { return (engine_() >> 63) ? 1.0 : -1.0; }

  Vector normals(std::size_t n) {
    Vector z(n);
    for (auto& x : z)
      x = normal();
    return z;
  }

private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct PriorOptions {
  SolverKind solver = SolverKind::direct;
  double robin_divisor = default_robin_divisor;
};

class PriorOperator {
public:
  PriorOperator(std::shared_ptr<const Mesh> mesh, double sigma2, double rho,
                BoundaryKind bc, std::optional<AnisoTensor> theta,
                PriorOptions options)
      : mesh_(std::move(mesh)), sigma2_(sigma2), rho_(rho),
        coeffs_(coeffs_from_stats(sigma2, rho, mesh_->dim(), bc,
                                  options.robin_divisor)),
        theta_(std::move(theta)), mass_(mass_matrix(*mesh_)),
        stiffness_(stiffness_matrix(*mesh_, coeffs_.gamma, theta_)),
        boundary_(boundary_mass_matrix(*mesh_, coeffs_.beta)),
        a_(add_scaled(add_scaled(mass_, stiffness_, coeffs_.delta, 1.0),
                      boundary_, 1.0, 1.0)),
        a_factor_(a_, options.solver), mass_sqrt_(mass_, NoiseMode::exact) {}

  const Mesh& mesh() const noexcept { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const noexcept { return mesh_; }
  double sigma2() const noexcept { return sigma2_; }
  double rho() const noexcept { return rho_; }
  const SpdeCoeffs& coeffs() const noexcept { return coeffs_; }
  const std::optional<AnisoTensor>& theta() const noexcept { return theta_; }
  const SparseSpd& mass() const noexcept { return mass_; }
  const SparseSpd& stiffness() const noexcept { return stiffness_; }
  const SparseSpd& boundary_mass() const noexcept { return boundary_; }
  const SparseSpd& a_matrix() const noexcept { return a_; }
  const SpdFactorization& a_factorization() const noexcept { return a_factor_; }
  const MassSqrt& mass_sqrt() const noexcept { return mass_sqrt_; }

  /// Free-space Matern parameters the coefficients were built from.
  MaternParams matern() const {
    return MaternParams::bilaplacian(sigma2_, rho_, mesh_->dim());
  }

  /// C b = A^{-1} M A^{-1} b.
  Vector apply_covariance(std::span<const double> b) const {
    return a_factor_.solve(mass_.multiply(a_factor_.solve(b)));
  }

private:
  std::shared_ptr<const Mesh> mesh_;
  double sigma2_, rho_;
  SpdeCoeffs coeffs_;
  std::optional<AnisoTensor> theta_;
  SparseSpd mass_, stiffness_, boundary_, a_;
  SpdFactorization a_factor_;
  MassSqrt mass_sqrt_;
};

inline PriorOperator build_prior(Mesh mesh, double sigma2, double rho,
                                 BoundaryKind bc,
                                 std::optional<AnisoTensor> theta = {},
                                 PriorOptions options = {}) {
  return PriorOperator(std::make_shared<const Mesh>(std::move(mesh)), sigma2,
                       rho, bc, std::move(theta), options);
}

enum class FieldKind { sample, variance, correlation };

inline std::string_view to_string(FieldKind k) {
  switch (k) {
  case FieldKind::sample: return "sample";
  case FieldKind::variance: return "variance";
  case FieldKind::correlation: return "correlation";
  }
  return "";
}

struct FieldResult {
  std::shared_ptr<const Mesh> mesh;
  FieldKind kind = FieldKind::sample;
  Vector values;
  Vector standard_errors; // per-node, randomized variance estimates only
  std::optional<std::uint64_t> seed;
  std::optional<Index> collocation_node;
  std::vector<double> collocation_point;
  double sigma2 = 0.0;
  double rho = 0.0;
  BoundaryKind bc = BoundaryKind::robin;
};

namespace detail {
inline FieldResult make_result(const PriorOperator& p, FieldKind kind) {
  FieldResult r;
  r.mesh = p.mesh_ptr();
  r.kind = kind;
  r.sigma2 = p.sigma2();
  r.rho = p.rho();
  r.bc = p.coeffs().bc;
  return r;
}
} // namespace detail

inline FieldResult sample(const PriorOperator& p, std::uint64_t seed,
                          NoiseMode mode = NoiseMode::exact) {
  NormalStream rng(seed);
  const Vector z = rng.normals(p.mesh().num_nodes());
  const Vector b = mode == NoiseMode::exact
                       ? p.mass_sqrt().apply(z)
                       : MassSqrt(p.mass(), NoiseMode::lumped).apply(z);
  FieldResult r = detail::make_result(p, FieldKind::sample);
  r.values = p.a_factorization().solve(b);
  r.seed = seed;
  return r;
}

struct VarianceMethod {
  enum class Kind { exact, hutchinson } kind = Kind::exact;
  std::size_t probes = 0;
  std::uint64_t seed = 0;

  static VarianceMethod exact() { return {}; }
  static VarianceMethod hutchinson(std::size_t k, std::uint64_t seed = 0) {
    return {Kind::hutchinson, k, seed};
  }
};

/// Diagonal of C.  Exact: w = A^{-1} e_i, C_ii = w^T M w.  Hutchinson: with
/// Rademacher probes z and y = A^{-1} G z, E[y_i^2] = C_ii; the per-node
/// standard error of the mean is reported alongside.
inline FieldResult variance_field(const PriorOperator& p,
                                  VarianceMethod method = VarianceMethod::exact()) {
  const Index n = p.mesh().num_nodes();
  FieldResult r = detail::make_result(p, FieldKind::variance);
  r.values.assign(n, 0.0);

  if (method.kind == VarianceMethod::Kind::exact) {
    parallel_for_chunks(n, [&](std::size_t b, std::size_t e) {
      Vector unit(n, 0.0);
      for (std::size_t i = b; i < e; ++i) {
        unit[i] = 1.0;
        const Vector w = p.a_factorization().solve(unit);
        unit[i] = 0.0;
        r.values[i] = p.mass().quadratic_form(w);
      }
    });
    return r;
  }

  if (method.probes < 2)
    throw std::invalid_argument("variance_field: hutchinson needs at least 2 probes");
  const std::size_t k = method.probes;
  std::vector<Vector> probes(k);
  NormalStream rng(method.seed);
  for (auto& z : probes) {
    z.resize(n);
    for (auto& x : z)
      x = rng.rademacher();
  }
  std::vector<Vector> ys(k);
  parallel_for_chunks(k, [&](std::size_t b, std::size_t e) {
    for (std::size_t j = b; j < e; ++j)
      ys[j] = p.a_factorization().solve(p.mass_sqrt().apply(probes[j]));
  });
  r.standard_errors.assign(n, 0.0);
  for (Index i = 0; i < n; ++i) {
    double mean = 0.0, m2 = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double x = ys[j][i] * ys[j][i];
      const double d = x - mean;
      mean += d / static_cast<double>(j + 1);
      m2 += d * (x - mean);
    }
    r.values[i] = mean;
    r.standard_errors[i] =
        std::sqrt(m2 / static_cast<double>(k - 1) / static_cast<double>(k));
  }
  r.seed = method.seed;
  return r;
}

/// Correlation of every node with the node nearest to the collocation point.
/// A variance field computed for the same prior may be passed to avoid
/// recomputing the diagonal.
inline FieldResult correlation_field(const PriorOperator& p,
                                     std::span<const double> collocation,
                                     const FieldResult* variance = nullptr) {
  const Mesh& m = p.mesh();
  if (!inside_unit_domain(collocation, m.dim()))
    throw std::domain_error("correlation_field: collocation point outside the domain");
  if (variance && (variance->kind != FieldKind::variance ||
                   variance->values.size() != m.num_nodes()))
    throw std::invalid_argument("correlation_field: variance field does not match");

  const Index j = nearest_node(m, collocation);
  Vector unit(m.num_nodes(), 0.0);
  unit[j] = 1.0;
  const Vector v = p.apply_covariance(unit);

  FieldResult own;
  if (!variance) {
    own = variance_field(p);
    variance = &own;
  }
  FieldResult r = detail::make_result(p, FieldKind::correlation);
  r.values.resize(m.num_nodes());
  for (Index i = 0; i < m.num_nodes(); ++i)
    r.values[i] = v[i] / std::sqrt(v[j] * variance->values[i]);
  r.collocation_node = j;
  r.collocation_point.assign(collocation.begin(), collocation.end());
  return r;
}

inline FieldResult correlation_field(const PriorOperator& p,
                                     std::initializer_list<double> collocation,
                                     const FieldResult* variance = nullptr) {
  return correlation_field(
      p, std::span<const double>(collocation.begin(), collocation.size()),
      variance);
}

struct FreeSpaceRow {
  double radius;
  Index node;
  double distance; // actual distance from the collocation node
  double discrete;
  double analytic;
  double abs_error;
};

/// Compares the discrete correlation along a ray from the collocation point
/// with the free-space Matern correlation at the same node distance.  The
/// direction defaults to +x.
inline std::vector<FreeSpaceRow>
free_space_check(const PriorOperator& p, std::span<const double> collocation,
                 std::span<const double> radii,
                 std::span<const double> direction = {},
                 const FieldResult* variance = nullptr) {
  const Mesh& m = p.mesh();
  const int d = m.dim();
  if (p.theta()) {
    const Mat2 th = aniso_tensor_matrix(*p.theta());
    const double tol = 1e-14;
    if (std::abs(th.xx - 1.0) > tol || std::abs(th.yy - 1.0) > tol ||
        std::abs(th.xy) > tol)
      throw std::invalid_argument("free_space_check: prior must be isotropic");
  }
  if (!inside_unit_domain(collocation, d))
    throw std::domain_error("free_space_check: collocation point outside the domain");

  std::vector<double> dir(d, 0.0);
  if (direction.empty()) {
    dir[0] = 1.0;
  } else {
    if (static_cast<int>(direction.size()) != d)
      throw std::invalid_argument("free_space_check: direction has wrong dimension");
    const double len = norm2(direction);
    if (!(len > 0.0))
      throw std::invalid_argument("free_space_check: zero direction");
    for (int k = 0; k < d; ++k)
      dir[k] = direction[k] / len;
  }

  std::vector<std::vector<double>> targets;
  for (double r : radii) {
    if (!(r >= 0.0))
      throw std::domain_error("free_space_check: negative radius");
    std::vector<double> x(d);
    for (int k = 0; k < d; ++k)
      x[k] = collocation[k] + r * dir[k];
    if (!inside_unit_domain(x, d))
      throw std::domain_error("free_space_check: radius " + std::to_string(r) +
                              " leaves the domain");
    targets.push_back(std::move(x));
  }

  const FieldResult corr = correlation_field(p, collocation, variance);
  const MaternParams mp = p.matern();
  const auto xc = m.node(*corr.collocation_node);
  std::vector<FreeSpaceRow> rows;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const Index node = nearest_node(m, targets[i]);
    const auto xn = m.node(node);
    double dist2 = 0.0;
    for (int k = 0; k < d; ++k)
      dist2 += (xn[k] - xc[k]) * (xn[k] - xc[k]);
    const double dist = std::sqrt(dist2);
    const double analytic = matern_correlation(mp, dist);
    const double discrete = corr.values[node];
    rows.push_back({radii[i], node, dist, discrete, analytic,
                    std::abs(discrete - analytic)});
  }
  return rows;
}

} // namespace grf

#endif // GRF_FIELD_HPP
