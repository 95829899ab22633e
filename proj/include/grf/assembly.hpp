#ifndef GRF_ASSEMBLY_HPP
#define GRF_ASSEMBLY_HPP

// P1 finite-element matrices: consistent mass, (anisotropic) stiffness and
// the Robin boundary mass.  Element integrals are evaluated in closed form.

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "grf/mesh.hpp"
#include "grf/sparse.hpp"

namespace grf {

struct Mat2 {
  double xx, xy, yx, yy;

  double det() const noexcept { return xx * yy - xy * yx; }
  double trace() const noexcept { return xx + yy; }
  bool is_spd() const noexcept {
    return xy == yx && xx > 0.0 && det() > 0.0;
  }
  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
};

enum class TensorForm {
  rotation, // R(angle) diag(theta1, theta2) R(angle)^T
  literal,  // [[t1 sin^2, (t1-t2) sin cos], [(t1-t2) sin cos, t2 cos^2]]
};

/// Anisotropic diffusion tensor from two principal values and an angle in
/// radians.  The rotation form has eigenvalues {theta1, theta2}, with the
/// theta1 eigenvector at the given angle from the x axis.
struct AnisoTensor {
  double theta1;
  double theta2;
  double angle;
  TensorForm form = TensorForm::rotation;

  void validate() const {
    if (!(theta1 > 0.0) || !(theta2 > 0.0))
      throw std::invalid_argument("AnisoTensor: theta1 and theta2 must be positive");
  }
};

inline Mat2 aniso_tensor_matrix(const AnisoTensor& t) {
  t.validate();
  const double s = std::sin(t.angle), c = std::cos(t.angle);
  Mat2 m{};
  if (t.form == TensorForm::rotation) {
    m.xx = t.theta1 * c * c + t.theta2 * s * s;
    m.yy = t.theta1 * s * s + t.theta2 * c * c;
    m.xy = m.yx = (t.theta1 - t.theta2) * s * c;
  } else {
    m.xx = t.theta1 * s * s;
    m.yy = t.theta2 * c * c;
    m.xy = m.yx = (t.theta1 - t.theta2) * s * c;
    if (!m.is_spd())
      throw std::invalid_argument(
          "AnisoTensor: literal form is not positive definite for these "
          "parameters (det = " + std::to_string(m.det()) + ")");
  }
  return m;
}

inline SparseSpd mass_matrix(const Mesh& m) {
  std::vector<Triplet> t;
  const int nv = m.dim() + 1;
  t.reserve(m.num_elements() * nv * nv);
  for (Index e = 0; e < m.num_elements(); ++e) {
    const auto el = m.element(e);
    const double meas = m.element_measure(e);
    // h/6 [[2,1],[1,2]] on intervals, area/12 [[2,1,1],...] on triangles
    const double off = m.dim() == 1 ? meas / 6.0 : meas / 12.0;
    for (int a = 0; a < nv; ++a)
      for (int b = 0; b < nv; ++b)
        t.push_back({el[a], el[b], a == b ? 2.0 * off : off});
  }
  return SparseSpd::from_triplets(m.num_nodes(), t);
}

namespace detail {

// Gradients of the three barycentric functions of a triangle (constant).
inline std::array<std::array<double, 2>, 3>
p1_gradients(std::span<const double> p0, std::span<const double> p1,
             std::span<const double> p2, double& area) {
  const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) -
                     (p2[0] - p0[0]) * (p1[1] - p0[1]);
  area = 0.5 * det;
  const std::array<std::span<const double>, 3> p{p0, p1, p2};
  std::array<std::array<double, 2>, 3> g{};
  for (int i = 0; i < 3; ++i) {
    const auto& pj = p[(i + 1) % 3];
    const auto& pk = p[(i + 2) % 3];
    g[i] = {(pj[1] - pk[1]) / det, (pk[0] - pj[0]) / det};
  }
  return g;
}

} // namespace detail

/// K_ij = integral of gamma (Theta grad phi_j) . grad phi_i.
inline SparseSpd stiffness_matrix(const Mesh& m, double gamma,
                                  const std::optional<AnisoTensor>& theta = {}) {
  if (!(gamma > 0.0))
    throw std::invalid_argument("stiffness_matrix: gamma must be positive");
  if (theta && m.dim() != 2)
    throw std::invalid_argument(
        "stiffness_matrix: anisotropic tensor is only supported in 2D");
  std::vector<Triplet> t;
  if (m.dim() == 1) {
    t.reserve(4 * m.num_elements());
    for (Index e = 0; e < m.num_elements(); ++e) {
      const auto el = m.element(e);
      const double k = gamma / m.element_measure(e);
      t.push_back({el[0], el[0], k});
      t.push_back({el[1], el[1], k});
      t.push_back({el[0], el[1], -k});
      t.push_back({el[1], el[0], -k});
    }
    return SparseSpd::from_triplets(m.num_nodes(), t);
  }

  const Mat2 th = theta ? aniso_tensor_matrix(*theta) : Mat2::identity();
  t.reserve(9 * m.num_elements());
  for (Index e = 0; e < m.num_elements(); ++e) {
    const auto el = m.element(e);
    double area = 0.0;
    const auto g = detail::p1_gradients(m.node(el[0]), m.node(el[1]),
                                        m.node(el[2]), area);
    for (int a = 0; a < 3; ++a) {
      const double tgx = th.xx * g[a][0] + th.xy * g[a][1];
      const double tgy = th.yx * g[a][0] + th.yy * g[a][1];
      for (int b = 0; b < 3; ++b)
        t.push_back({el[b], el[a], gamma * area * (tgx * g[b][0] + tgy * g[b][1])});
    }
  }
  return SparseSpd::from_triplets(m.num_nodes(), t);
}

/// Weak Robin term beta * integral over the boundary of u v.
inline SparseSpd boundary_mass_matrix(const Mesh& m, double beta) {
  if (!(beta >= 0.0))
    throw std::invalid_argument("boundary_mass_matrix: beta must be nonnegative");
  if (beta == 0.0)
    return SparseSpd::zero(m.num_nodes());
  std::vector<Triplet> t;
  for (const auto& f : m.boundary_facets()) {
    if (m.dim() == 1) {
      t.push_back({f.nodes[0], f.nodes[0], beta * f.measure});
      continue;
    }
    const double off = beta * f.measure / 6.0;
    t.push_back({f.nodes[0], f.nodes[0], 2.0 * off});
    t.push_back({f.nodes[1], f.nodes[1], 2.0 * off});
    t.push_back({f.nodes[0], f.nodes[1], off});
    t.push_back({f.nodes[1], f.nodes[0], off});
  }
  return SparseSpd::from_triplets(m.num_nodes(), t);
}

} // namespace grf

#endif // GRF_ASSEMBLY_HPP
