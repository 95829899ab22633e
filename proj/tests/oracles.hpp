#ifndef GRF_TESTS_ORACLES_HPP
#define GRF_TESTS_ORACLES_HPP

// Reference computations for the tests.  Nothing here calls into the
// library's numerical paths; dense matrices are row-major n*n vectors.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

using Dense = std::vector<double>;

inline Dense matmul(const Dense& a, const Dense& b, std::size_t n) {
  Dense c(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a[i * n + k];
      for (std::size_t j = 0; j < n; ++j)
        c[i * n + j] += aik * b[k * n + j];
    }
  return c;
}

inline Dense transpose(const Dense& a, std::size_t n) {
  Dense t(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      t[j * n + i] = a[i * n + j];
  return t;
}

/// Gaussian elimination with partial pivoting; solves A X = B for an n*m B.
inline Dense dense_solve(Dense a, Dense b, std::size_t n, std::size_t m) {
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r * n + c]) > std::abs(a[piv * n + c]))
        piv = r;
    if (a[piv * n + c] == 0.0)
      throw std::runtime_error("dense_solve: singular");
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j)
        std::swap(a[c * n + j], a[piv * n + j]);
      for (std::size_t j = 0; j < m; ++j)
        std::swap(b[c * m + j], b[piv * m + j]);
    }
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r * n + c] / a[c * n + c];
      if (f == 0.0)
        continue;
      for (std::size_t j = c; j < n; ++j)
        a[r * n + j] -= f * a[c * n + j];
      for (std::size_t j = 0; j < m; ++j)
        b[r * m + j] -= f * b[c * m + j];
    }
  }
  for (std::size_t c = n; c-- > 0;)
    for (std::size_t j = 0; j < m; ++j) {
      double s = b[c * m + j];
      for (std::size_t k = c + 1; k < n; ++k)
        s -= a[c * n + k] * b[k * m + j];
      b[c * m + j] = s / a[c * n + c];
    }
  return b;
}

inline Dense dense_inverse(const Dense& a, std::size_t n) {
  Dense id(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    id[i * n + i] = 1.0;
  return dense_solve(a, id, n, n);
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
inline std::vector<double> symmetric_eigenvalues(Dense a, std::size_t n) {
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        off += a[i * n + j] * a[i * n + j];
    if (off < 1e-30)
      break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (std::abs(apq) < 1e-300)
          continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i)
    ev[i] = a[i * n + i];
  std::sort(ev.begin(), ev.end());
  return ev;
}

/// 3-point Gauss-Legendre on [0, 1] (exact for degree 5).
inline std::array<std::pair<double, double>, 3> gauss3_unit() {
  const double r = std::sqrt(3.0 / 5.0);
  return {{{0.5 * (1 - r), 5.0 / 18.0},
           {0.5, 8.0 / 18.0},
           {0.5 * (1 + r), 5.0 / 18.0}}};
}

/// Integral over the reference triangle {u, v >= 0, u + v <= 1} by the
/// collapsed (Duffy) tensor rule built from 3-point Gauss; exact for
/// polynomials of degree <= 4.
inline double triangle_quadrature(const std::function<double(double, double)>& f) {
  double s = 0.0;
  for (auto [a, wa] : gauss3_unit())
    for (auto [b, wb] : gauss3_unit()) {
      const double u = a, v = (1 - a) * b;
      s += wa * wb * (1 - a) * f(u, v);
    }
  return s;
}

/// Affine nodal basis of a triangle: phi_i(x, y) = c0 + c1 x + c2 y with
/// phi_i(p_j) = delta_ij, obtained by solving the 3x3 interpolation system.
inline std::array<std::array<double, 3>, 3>
affine_basis(const std::array<std::array<double, 2>, 3>& p) {
  Dense v(9);
  for (int j = 0; j < 3; ++j) {
    v[j * 3 + 0] = 1.0;
    v[j * 3 + 1] = p[j][0];
    v[j * 3 + 2] = p[j][1];
  }
  const Dense coef = dense_inverse(v, 3); // columns are basis coefficients
  std::array<std::array<double, 3>, 3> c{};
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k)
      c[i][k] = coef[k * 3 + i];
  return c;
}

/// Composite trapezoid on [0, tmax] for K_nu(x) = int_0^inf exp(-x cosh t)
/// cosh(nu t) dt.  The integrand decays doubly exponentially, so the
/// trapezoid rule converges geometrically.
inline double bessel_k_integral(double nu, double x) {
  const double tmax = std::acosh(std::max(2.0, 800.0 / x)) + 1.0;
  const int steps = 20000;
  const double h = tmax / steps;
  double s = 0.5 * std::exp(-x);
  for (int i = 1; i <= steps; ++i) {
    const double t = i * h;
    const double w = (i == steps) ? 0.5 : 1.0;
    s += w * std::exp(-x * std::cosh(t)) * std::cosh(nu * t);
  }
  return s * h;
}

/// Simpson's rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a,
                      double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i)
    s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

} // namespace oracle

#endif // GRF_TESTS_ORACLES_HPP
