#ifndef GRF_MESH_HPP
#define GRF_MESH_HPP

// Structured P1 meshes on the unit interval and the unit square.

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace grf {

using Index = std::size_t;

struct BoundaryFacet {
  std::array<Index, 2> nodes; // second entry unused in 1D
  double measure;             // edge length in 2D, 1 (counting) in 1D
};

/// Direction of the diagonal that splits each grid cell in two triangles.
enum class CellDiagonal {
  lower_left_to_upper_right,
  lower_right_to_upper_left,
};

class Mesh {
public:
  int dim() const noexcept { return dim_; }
  Index num_nodes() const noexcept { return coords_.size() / dim_; }
  Index num_elements() const noexcept { return elements_.size() / (dim_ + 1); }

  std::span<const double> node(Index i) const {
    return {coords_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<const Index> element(Index e) const {
    return {elements_.data() + e * (dim_ + 1),
            static_cast<std::size_t>(dim_ + 1)};
  }
  double element_measure(Index e) const { return measures_[e]; }
  const std::vector<BoundaryFacet>& boundary_facets() const noexcept {
    return facets_;
  }

  /// Grid resolution; ny() is 0 for interval meshes.
  Index nx() const noexcept { return nx_; }
  Index ny() const noexcept { return ny_; }
  CellDiagonal diagonal() const noexcept { return diagonal_; }

  /// Node index of grid vertex (i, j); j is ignored in 1D.
  Index grid_index(Index i, Index j = 0) const noexcept {
    return j * (nx_ + 1) + i;
  }

  friend Mesh interval_mesh(Index n);
  friend Mesh unit_square_mesh(Index nx, Index ny, CellDiagonal diag);

private:
  int dim_ = 1;
  Index nx_ = 0, ny_ = 0;
  CellDiagonal diagonal_ = CellDiagonal::lower_left_to_upper_right;
  std::vector<double> coords_;
  std::vector<Index> elements_;
  std::vector<double> measures_;
  std::vector<BoundaryFacet> facets_;
};

inline Mesh interval_mesh(Index n) {
  if (n == 0)
    throw std::domain_error("interval_mesh: need at least one element");
  Mesh m;
  m.dim_ = 1;
  m.nx_ = n;
  m.coords_.resize(n + 1);
  for (Index i = 0; i <= n; ++i)
    m.coords_[i] = static_cast<double>(i) / static_cast<double>(n);
  m.elements_.reserve(2 * n);
  m.measures_.reserve(n);
  for (Index e = 0; e < n; ++e) {
    m.elements_.push_back(e);
    m.elements_.push_back(e + 1);
    m.measures_.push_back(m.coords_[e + 1] - m.coords_[e]);
  }
  m.facets_ = {{{0, 0}, 1.0}, {{n, n}, 1.0}};
  return m;
}

inline Mesh unit_square_mesh(
    Index nx, Index ny,
    CellDiagonal diag = CellDiagonal::lower_left_to_upper_right) {
  if (nx == 0 || ny == 0)
    throw std::domain_error("unit_square_mesh: need at least one subdivision");
  Mesh m;
  m.dim_ = 2;
  m.nx_ = nx;
  m.ny_ = ny;
  m.diagonal_ = diag;
  m.coords_.reserve(2 * (nx + 1) * (ny + 1));
  for (Index j = 0; j <= ny; ++j)
    for (Index i = 0; i <= nx; ++i) {
      m.coords_.push_back(static_cast<double>(i) / static_cast<double>(nx));
      m.coords_.push_back(static_cast<double>(j) / static_cast<double>(ny));
    }

  const double cell_area = (1.0 / nx) * (1.0 / ny);
  auto add_tri = [&](Index a, Index b, Index c) {
    m.elements_.insert(m.elements_.end(), {a, b, c});
    m.measures_.push_back(0.5 * cell_area);
  };
  for (Index j = 0; j < ny; ++j)
    for (Index i = 0; i < nx; ++i) {
      const Index v00 = m.grid_index(i, j), v10 = m.grid_index(i + 1, j);
      const Index v01 = m.grid_index(i, j + 1), v11 = m.grid_index(i + 1, j + 1);
      // counter-clockwise vertex order
      if (diag == CellDiagonal::lower_left_to_upper_right) {
        add_tri(v00, v10, v11);
        add_tri(v00, v11, v01);
      } else {
        add_tri(v00, v10, v01);
        add_tri(v10, v11, v01);
      }
    }

  const double hx = 1.0 / nx, hy = 1.0 / ny;
  for (Index i = 0; i < nx; ++i) {
    m.facets_.push_back({{m.grid_index(i, 0), m.grid_index(i + 1, 0)}, hx});
    m.facets_.push_back({{m.grid_index(i, ny), m.grid_index(i + 1, ny)}, hx});
  }
  for (Index j = 0; j < ny; ++j) {
    m.facets_.push_back({{m.grid_index(0, j), m.grid_index(0, j + 1)}, hy});
    m.facets_.push_back({{m.grid_index(nx, j), m.grid_index(nx, j + 1)}, hy});
  }
  return m;
}

inline bool inside_unit_domain(std::span<const double> point, int dim) {
  if (static_cast<int>(point.size()) != dim)
    return false;
  for (double c : point)
    if (!(c >= 0.0 && c <= 1.0))
      return false;
  return true;
}

/// Closest node in Euclidean distance; ties go to the smallest index.
inline Index nearest_node(const Mesh& m, std::span<const double> point) {
  if (!inside_unit_domain(point, m.dim()))
    throw std::domain_error("nearest_node: point outside the unit domain");
  Index best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < m.num_nodes(); ++i) {
    const auto x = m.node(i);
    double d2 = 0.0;
    for (int k = 0; k < m.dim(); ++k)
      d2 += (x[k] - point[k]) * (x[k] - point[k]);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

inline Index nearest_node(const Mesh& m, std::initializer_list<double> point) {
  return nearest_node(m, std::span<const double>(point.begin(), point.size()));
}

} // namespace grf

#endif // GRF_MESH_HPP
