#ifndef GRF_SPARSE_HPP
#define GRF_SPARSE_HPP

// Symmetric sparse matrices in CSR form plus the SPD solvers behind every
// field computation: an envelope (profile) Cholesky factorization on a
// reverse Cuthill-McKee ordering, and Jacobi-preconditioned CG for meshes
// too large to factor.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "grf/parallel.hpp"

namespace grf {

using Index = std::size_t;
using Vector = std::vector<double>;

/// Raised when a factorization meets a nonpositive pivot.
class DefinitenessError : public std::runtime_error {
public:
  explicit DefinitenessError(Index pivot)
      : std::runtime_error("matrix is not positive definite: nonpositive "
                           "pivot at row " + std::to_string(pivot)),
        pivot_(pivot) {}
  Index pivot() const noexcept { return pivot_; }

private:
  Index pivot_;
};

struct Triplet {
  Index row;
  Index col;
  double value;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// Square sparse matrix, both triangles stored, column indices sorted per
/// row.  Exact zeros are not stored.
class SparseSpd {
public:
  SparseSpd() : offsets_{0} {}

  static SparseSpd zero(Index n) {
    SparseSpd m;
    m.n_ = n;
    m.offsets_.assign(n + 1, 0);
    return m;
  }

  static SparseSpd identity(Index n) {
    std::vector<Triplet> t;
    t.reserve(n);
    for (Index i = 0; i < n; ++i)
      t.push_back({i, i, 1.0});
    return from_triplets(n, t);
  }

  /// Duplicates are summed.
  static SparseSpd from_triplets(Index n, std::span<const Triplet> entries) {
    std::vector<Index> count(n + 1, 0);
    for (const auto& t : entries) {
      if (t.row >= n || t.col >= n)
        throw std::out_of_range("SparseSpd: triplet index out of range");
      ++count[t.row + 1];
    }
    std::partial_sum(count.begin(), count.end(), count.begin());
    std::vector<std::pair<Index, double>> sorted(entries.size());
    {
      std::vector<Index> fill(count.begin(), count.end() - 1);
      for (const auto& t : entries)
        sorted[fill[t.row]++] = {t.col, t.value};
    }
    SparseSpd m;
    m.n_ = n;
    m.offsets_.assign(1, 0);
    m.offsets_.reserve(n + 1);
    for (Index r = 0; r < n; ++r) {
      auto b = sorted.begin() + static_cast<std::ptrdiff_t>(count[r]);
      auto e = sorted.begin() + static_cast<std::ptrdiff_t>(count[r + 1]);
      std::sort(b, e, [](const auto& x, const auto& y) { return x.first < y.first; });
      for (auto it = b; it != e;) {
        const Index c = it->first;
        double v = 0.0;
        for (; it != e && it->first == c; ++it)
          v += it->second;
        if (v != 0.0) {
          m.cols_.push_back(c);
          m.vals_.push_back(v);
        }
      }
      m.offsets_.push_back(m.cols_.size());
    }
    return m;
  }

  Index size() const noexcept { return n_; }
  Index nnz() const noexcept { return vals_.size(); }
  std::span<const Index> row_offsets() const noexcept { return offsets_; }
  std::span<const Index> col_indices() const noexcept { return cols_; }
  std::span<const double> values() const noexcept { return vals_; }

  std::span<const Index> row_cols(Index r) const {
    return std::span<const Index>(cols_).subspan(offsets_[r],
                                                 offsets_[r + 1] - offsets_[r]);
  }
  std::span<const double> row_vals(Index r) const {
    return std::span<const double>(vals_).subspan(offsets_[r],
                                                  offsets_[r + 1] - offsets_[r]);
  }

  double operator()(Index r, Index c) const {
    const auto cs = row_cols(r);
    const auto it = std::lower_bound(cs.begin(), cs.end(), c);
    if (it == cs.end() || *it != c)
      return 0.0;
    return vals_[offsets_[r] + static_cast<Index>(it - cs.begin())];
  }

  void multiply(std::span<const double> x, std::span<double> y) const {
    check_dim(x.size());
    check_dim(y.size());
    for (Index r = 0; r < n_; ++r) {
      double s = 0.0;
      for (Index k = offsets_[r]; k < offsets_[r + 1]; ++k)
        s += vals_[k] * x[cols_[k]];
      y[r] = s;
    }
  }

  Vector multiply(std::span<const double> x) const {
    Vector y(n_);
    multiply(x, y);
    return y;
  }

  double quadratic_form(std::span<const double> x) const {
    return dot(x, multiply(x));
  }

  Vector diagonal() const {
    Vector d(n_);
    for (Index r = 0; r < n_; ++r)
      d[r] = (*this)(r, r);
    return d;
  }

  Vector row_sums() const {
    Vector s(n_, 0.0);
    for (Index r = 0; r < n_; ++r)
      for (double v : row_vals(r))
        s[r] += v;
    return s;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : vals_)
      m = std::max(m, std::abs(v));
    return m;
  }

  /// max |a_ij - a_ji| / max |a|, 0 for the zero matrix.
  double asymmetry() const {
    double worst = 0.0;
    for (Index r = 0; r < n_; ++r) {
      const auto cs = row_cols(r);
      const auto vs = row_vals(r);
      for (std::size_t k = 0; k < cs.size(); ++k)
        worst = std::max(worst, std::abs(vs[k] - (*this)(cs[k], r)));
    }
    const double scale = max_abs();
    return scale > 0.0 ? worst / scale : 0.0;
  }

  /// Row-major dense copy, for small-matrix checks.
  std::vector<double> to_dense() const {
    std::vector<double> d(n_ * n_, 0.0);
    for (Index r = 0; r < n_; ++r)
      for (Index k = offsets_[r]; k < offsets_[r + 1]; ++k)
        d[r * n_ + cols_[k]] = vals_[k];
    return d;
  }

private:
  void check_dim(std::size_t m) const {
    if (m != n_)
      throw std::invalid_argument("SparseSpd: vector of length " +
                                  std::to_string(m) + " for matrix of size " +
                                  std::to_string(n_));
  }

  Index n_ = 0;
  std::vector<Index> offsets_;
  std::vector<Index> cols_;
  std::vector<double> vals_;
};

/// ca*A + cb*B on the union of the two patterns.
inline SparseSpd add_scaled(const SparseSpd& a, const SparseSpd& b, double ca,
                            double cb) {
  if (a.size() != b.size())
    throw std::invalid_argument("add_scaled: dimension mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  std::vector<Triplet> t;
  t.reserve(a.nnz() + b.nnz());
  for (Index r = 0; r < a.size(); ++r) {
    const auto ac = a.row_cols(r);
    const auto av = a.row_vals(r);
    for (std::size_t k = 0; k < ac.size(); ++k)
      t.push_back({r, ac[k], ca * av[k]});
    const auto bc = b.row_cols(r);
    const auto bv = b.row_vals(r);
    for (std::size_t k = 0; k < bc.size(); ++k)
      t.push_back({r, bc[k], cb * bv[k]});
  }
  return SparseSpd::from_triplets(a.size(), t);
}

/// Reverse Cuthill-McKee ordering of the symmetric pattern.  Returns perm
/// with perm[new] = old.  Each component starts from a pseudo-peripheral
/// node found by repeated BFS.
inline std::vector<Index> rcm_ordering(const SparseSpd& a) {
  const Index n = a.size();
  std::vector<Index> degree(n);
  for (Index i = 0; i < n; ++i)
    degree[i] = a.row_cols(i).size();

  std::vector<Index> order;
  order.reserve(n);
  std::vector<char> placed(n, 0);
  std::vector<Index> level(n);

  // BFS over unplaced nodes; returns the depth of the last level
  auto bfs = [&](Index root, std::vector<Index>& comp) {
    std::fill(level.begin(), level.end(), static_cast<Index>(-1));
    comp.clear();
    comp.push_back(root);
    level[root] = 0;
    for (std::size_t h = 0; h < comp.size(); ++h) {
      const Index v = comp[h];
      for (Index w : a.row_cols(v))
        if (!placed[w] && level[w] == static_cast<Index>(-1)) {
          level[w] = level[v] + 1;
          comp.push_back(w);
        }
    }
    return level[comp.back()];
  };

  std::vector<Index> comp;
  for (Index seed = 0; seed < n; ++seed) {
    if (placed[seed])
      continue;
    Index root = seed;
    Index depth = bfs(root, comp);
    for (int iter = 0; iter < 8; ++iter) {
      // min-degree node of the deepest level
      Index cand = comp.back();
      for (Index v : comp)
        if (level[v] == depth && degree[v] < degree[cand])
          cand = v;
      const Index d2 = bfs(cand, comp);
      if (d2 <= depth)
        break;
      root = cand;
      depth = d2;
    }

    // Cuthill-McKee from root, neighbors by increasing degree
    const std::size_t start = order.size();
    order.push_back(root);
    placed[root] = 1;
    std::vector<Index> nbrs;
    for (std::size_t h = start; h < order.size(); ++h) {
      nbrs.clear();
      for (Index w : a.row_cols(order[h]))
        if (!placed[w]) {
          placed[w] = 1;
          nbrs.push_back(w);
        }
      std::stable_sort(nbrs.begin(), nbrs.end(), [&](Index x, Index y) {
        return degree[x] < degree[y];
      });
      order.insert(order.end(), nbrs.begin(), nbrs.end());
    }
  }
  std::reverse(order.begin(), order.end());
  return order;
}

/// Cholesky factor P A P^T = L L^T stored by rows inside the envelope.
class EnvelopeCholesky {
public:
  EnvelopeCholesky(const SparseSpd& a, std::vector<Index> perm)
      : n_(a.size()), perm_(std::move(perm)), iperm_(n_), first_(n_),
        start_(n_ + 1) {
    if (perm_.size() != n_)
      throw std::invalid_argument("EnvelopeCholesky: bad permutation size");
    for (Index k = 0; k < n_; ++k)
      iperm_[perm_[k]] = k;

    for (Index k = 0; k < n_; ++k) {
      Index f = k;
      for (Index c : a.row_cols(perm_[k]))
        f = std::min(f, iperm_[c]);
      first_[k] = f;
    }
    start_[0] = 0;
    for (Index k = 0; k < n_; ++k)
      start_[k + 1] = start_[k] + (k - first_[k] + 1);
    vals_.assign(start_[n_], 0.0);

    for (Index k = 0; k < n_; ++k) {
      const Index orig = perm_[k];
      const auto cs = a.row_cols(orig);
      const auto vs = a.row_vals(orig);
      for (std::size_t e = 0; e < cs.size(); ++e) {
        const Index j = iperm_[cs[e]];
        if (j <= k)
          vals_[start_[k] + (j - first_[k])] = vs[e];
      }
    }

    for (Index i = 0; i < n_; ++i) {
      double* li = vals_.data() + start_[i];
      const Index fi = first_[i];
      for (Index j = fi; j < i; ++j) {
        const double* lj = vals_.data() + start_[j];
        const Index fj = first_[j];
        const Index k0 = std::max(fi, fj);
        double s = li[j - fi];
        for (Index k = k0; k < j; ++k)
          s -= li[k - fi] * lj[k - fj];
        li[j - fi] = s / lj[j - fj];
      }
      double d = li[i - fi];
      for (Index k = fi; k < i; ++k)
        d -= li[k - fi] * li[k - fi];
      if (!(d > 0.0) || !std::isfinite(d))
        throw DefinitenessError(perm_[i]);
      li[i - fi] = std::sqrt(d);
    }
  }

  Index size() const noexcept { return n_; }
  /// Stored entries of L, including the diagonal.
  Index envelope_size() const noexcept { return vals_.size(); }
  std::span<const Index> permutation() const noexcept { return perm_; }

  /// Solves A x = b.
  Vector solve(std::span<const double> b) const {
    if (b.size() != n_)
      throw std::invalid_argument("solve: right-hand side has length " +
                                  std::to_string(b.size()) + ", expected " +
                                  std::to_string(n_));
    Vector y(n_);
    for (Index i = 0; i < n_; ++i) {
      const double* li = vals_.data() + start_[i];
      const Index fi = first_[i];
      double s = b[perm_[i]];
      for (Index k = fi; k < i; ++k)
        s -= li[k - fi] * y[k];
      y[i] = s / li[i - fi];
    }
    for (Index i = n_; i-- > 0;) {
      const double* li = vals_.data() + start_[i];
      const Index fi = first_[i];
      const double xi = y[i] / li[i - fi];
      y[i] = xi;
      for (Index k = fi; k < i; ++k)
        y[k] -= li[k - fi] * xi;
    }
    Vector x(n_);
    for (Index i = 0; i < n_; ++i)
      x[perm_[i]] = y[i];
    return x;
  }

  /// G z with G = P^T L, so that G G^T = A.
  Vector factor_apply(std::span<const double> z) const {
    if (z.size() != n_)
      throw std::invalid_argument("factor_apply: dimension mismatch");
    Vector out(n_);
    for (Index i = 0; i < n_; ++i) {
      const double* li = vals_.data() + start_[i];
      const Index fi = first_[i];
      double s = 0.0;
      for (Index k = fi; k <= i; ++k)
        s += li[k - fi] * z[k];
      out[perm_[i]] = s;
    }
    return out;
  }

  /// Dense G = P^T L (row-major), for small-matrix checks.
  std::vector<double> factor_dense() const {
    std::vector<double> g(n_ * n_, 0.0);
    for (Index i = 0; i < n_; ++i)
      for (Index k = first_[i]; k <= i; ++k)
        g[perm_[i] * n_ + k] = vals_[start_[i] + (k - first_[i])];
    return g;
  }

private:
  Index n_;
  std::vector<Index> perm_, iperm_;
  std::vector<Index> first_;
  std::vector<Index> start_;
  std::vector<double> vals_;
};

struct CgResult {
  Vector x;
  std::size_t iterations = 0;
  double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients from a zero initial guess.
inline CgResult conjugate_gradient(const SparseSpd& a, std::span<const double> b,
                                   double rel_tol, std::size_t max_iter) {
  const Index n = a.size();
  if (b.size() != n)
    throw std::invalid_argument("conjugate_gradient: dimension mismatch");
  CgResult res;
  res.x.assign(n, 0.0);
  const double bnorm = norm2(b);
  if (bnorm == 0.0)
    return res;

  Vector inv_diag = a.diagonal();
  for (Index i = 0; i < n; ++i) {
    if (!(inv_diag[i] > 0.0))
      throw DefinitenessError(i);
    inv_diag[i] = 1.0 / inv_diag[i];
  }
  Vector r(b.begin(), b.end()), z(n), p(n), q(n);
  for (Index i = 0; i < n; ++i)
    z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    a.multiply(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0))
      throw DefinitenessError(0);
    const double alpha = rz / pq;
    for (Index i = 0; i < n; ++i) {
      res.x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    res.iterations = it;
    res.relative_residual = norm2(r) / bnorm;
    if (res.relative_residual <= rel_tol)
      return res;
    for (Index i = 0; i < n; ++i)
      z[i] = inv_diag[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (Index i = 0; i < n; ++i)
      p[i] = z[i] + beta * p[i];
  }
  return res;
}

enum class SolverKind { direct, conjugate_gradient };

struct SolverStats {
  SolverKind kind = SolverKind::direct;
  Index dimension = 0;
  Index matrix_nnz = 0;
  Index factor_entries = 0; // envelope of L; 0 for CG
};

/// Reusable solver for an SPD matrix.  Immutable once built, so solve() may
/// be called concurrently.
class SpdFactorization {
public:
  static constexpr double cg_tolerance = 1e-12;

  SpdFactorization(const SparseSpd& a, SolverKind kind)
      : matrix_(std::make_shared<const SparseSpd>(a)) {
    stats_.kind = kind;
    stats_.dimension = a.size();
    stats_.matrix_nnz = a.nnz();
    if (kind == SolverKind::direct) {
      chol_.emplace(a, rcm_ordering(a));
      stats_.factor_entries = chol_->envelope_size();
    } else {
      // cheap definiteness screen; CG itself catches the rest
      const Vector d = a.diagonal();
      for (Index i = 0; i < d.size(); ++i)
        if (!(d[i] > 0.0))
          throw DefinitenessError(i);
    }
  }

  Index size() const noexcept { return stats_.dimension; }
  const SolverStats& stats() const noexcept { return stats_; }
  const SparseSpd& matrix() const noexcept { return *matrix_; }
  const EnvelopeCholesky* cholesky() const noexcept {
    return chol_ ? &*chol_ : nullptr;
  }

  Vector solve(std::span<const double> b) const {
    if (chol_)
      return chol_->solve(b);
    auto r = conjugate_gradient(*matrix_, b, cg_tolerance, 20 * size() + 100);
    if (r.relative_residual > cg_tolerance)
      throw std::runtime_error("conjugate_gradient: no convergence, residual " +
                               std::to_string(r.relative_residual));
    return std::move(r.x);
  }

private:
  std::shared_ptr<const SparseSpd> matrix_;
  std::optional<EnvelopeCholesky> chol_;
  SolverStats stats_;
};

inline SpdFactorization factorize(const SparseSpd& a,
                                  SolverKind kind = SolverKind::direct) {
  return SpdFactorization(a, kind);
}

/// Independent solves, one per right-hand side; runs in parallel.
inline std::vector<Vector> solve_many(const SpdFactorization& f,
                                      std::span<const Vector> rhs) {
  for (const auto& b : rhs)
    if (b.size() != f.size())
      throw std::invalid_argument("solve_many: right-hand side has length " +
                                  std::to_string(b.size()) + ", expected " +
                                  std::to_string(f.size()));
  std::vector<Vector> out(rhs.size());
  parallel_for_chunks(rhs.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i)
      out[i] = f.solve(rhs[i]);
  });
  return out;
}

enum class NoiseMode { exact, lumped };

/// A factor G of a mass matrix, G G^T = M (exact) or G G^T = diag(M 1)
/// (lumped).
class MassSqrt {
public:
  MassSqrt(const SparseSpd& m, NoiseMode mode) : mode_(mode), n_(m.size()) {
    if (mode == NoiseMode::exact) {
      chol_.emplace(m, rcm_ordering(m));
    } else {
      diag_ = m.row_sums();
      for (Index i = 0; i < n_; ++i) {
        if (!(diag_[i] > 0.0))
          throw DefinitenessError(i);
        diag_[i] = std::sqrt(diag_[i]);
      }
    }
  }

  NoiseMode mode() const noexcept { return mode_; }
  Index size() const noexcept { return n_; }

  Vector apply(std::span<const double> z) const {
    if (z.size() != n_)
      throw std::invalid_argument("MassSqrt: dimension mismatch");
    if (chol_)
      return chol_->factor_apply(z);
    Vector out(n_);
    for (Index i = 0; i < n_; ++i)
      out[i] = diag_[i] * z[i];
    return out;
  }

  /// Row-major dense G, for small-matrix checks.
  std::vector<double> dense() const {
    if (chol_)
      return chol_->factor_dense();
    std::vector<double> g(n_ * n_, 0.0);
    for (Index i = 0; i < n_; ++i)
      g[i * n_ + i] = diag_[i];
    return g;
  }

private:
  NoiseMode mode_;
  Index n_;
  std::optional<EnvelopeCholesky> chol_;
  Vector diag_;
};

inline Vector mass_sqrt_apply(const SparseSpd& m, std::span<const double> z,
                              NoiseMode mode) {
  return MassSqrt(m, mode).apply(z);
}

} // namespace grf

#endif // GRF_SPARSE_HPP
