#pragma once

// Pointwise evaluation of the polynomial families used by the discretization:
// Legendre P_n, Jacobi P_n^{(1,1)}, the bubble shape functions W_n, the
// spectral-Galerkin polynomials Y_n = P_n - P_{n+2}, and nodal hat functions.

#include <cmath>
#include <stdexcept>
#include <utility>

#include <Eigen/Core>

#include "hpg/mesh.hpp"

namespace hpg {

enum class BasisKind { Legendre, Jacobi11, ShapeW, SpectralY, Hat };

/// Affine bijection between a cell [left, right] and the reference interval [-1, 1].
template <typename Scalar = double>
struct AffineMap {
  Scalar left;
  Scalar right;

  Scalar width() const { return right - left; }
  Scalar to_reference(Scalar x) const { return (2 * x - left - right) / (right - left); }
  Scalar to_physical(Scalar y) const { return (left + right + y * (right - left)) / 2; }
  /// dy/dx
  Scalar jacobian() const { return Scalar(2) / (right - left); }
};

/// P_n(x) by the three-term recurrence; zero outside [-1, 1].
template <typename Scalar>
Scalar legendre_eval(int n, Scalar x) {
  if (x < Scalar(-1) || x > Scalar(1)) return Scalar(0);
  if (n == 0) return Scalar(1);
  Scalar p0(1), p1 = x;
  for (int k = 1; k < n; ++k) {
    Scalar p2 = ((2 * k + 1) * x * p1 - k * p0) / (k + 1);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

/// Values P_0(x), ..., P_n(x) (no zero extension; used on reference grids).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> legendre_all(int n, Scalar x) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v(n + 1);
  v(0) = Scalar(1);
  if (n >= 1) v(1) = x;
  for (int k = 1; k < n; ++k) v(k + 1) = ((2 * k + 1) * x * v(k) - k * v(k - 1)) / (k + 1);
  return v;
}

/// Derivatives P_0'(x), ..., P_n'(x) via P'_{k+1} = P'_{k-1} + (2k+1) P_k.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> legendre_deriv_all(int n, Scalar x) {
  auto p = legendre_all(n, x);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> d = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n + 1);
  if (n >= 1) d(1) = Scalar(1);
  for (int k = 1; k < n; ++k) d(k + 1) = d(k - 1) + (2 * k + 1) * p(k);
  return d;
}

/// Jacobi P_n^{(1,1)}(x), standard normalization P_n^{(1,1)}(1) = n + 1.
template <typename Scalar>
Scalar jacobi11_eval(int n, Scalar x) {
  if (n == 0) return Scalar(1);
  Scalar p0(1), p1 = 2 * x;
  for (int k = 1; k < n; ++k) {
    // (k+1)(k+3) P_{k+1} = (k+2)(2k+3) x P_k - (k+1)(k+2) P_{k-1}
    Scalar p2 = ((k + 2) * (2 * k + 3) * x * p1 - (k + 1) * (k + 2) * p0) / ((k + 1) * (k + 3));
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

/// W_n(x) = (1 - x^2) P_n^{(1,1)}(x) / (2(n+1)), normalized so that W_n' = -P_{n+1}.
template <typename Scalar>
Scalar wn_eval(int n, Scalar x) {
  return (1 - x * x) * jacobi11_eval(n, x) / (2 * (n + 1));
}

template <typename Scalar>
Scalar wn_deriv(int n, Scalar x) {
  return -legendre_eval(n + 1, x);
}

template <typename Scalar>
Scalar yn_eval(int n, Scalar x) {
  return legendre_eval(n, x) - legendre_eval(n + 2, x);
}

/// Hat function attached to vertex i of the mesh.
inline double hat_eval(const Mesh1D& mesh, int i, double x) {
  const int nv = mesh.num_cells() + 1;
  if (i < 0 || i >= nv) throw std::out_of_range("hat_eval: vertex index out of range");
  const auto& pts = mesh.points();
  if (i > 0 && x >= pts[i - 1] && x <= pts[i]) return (x - pts[i - 1]) / (pts[i] - pts[i - 1]);
  if (i < nv - 1 && x >= pts[i] && x <= pts[i + 1]) return (pts[i + 1] - x) / (pts[i + 1] - pts[i]);
  return 0.0;
}

inline double hat_deriv(const Mesh1D& mesh, int i, double x) {
  const int nv = mesh.num_cells() + 1;
  if (i < 0 || i >= nv) throw std::out_of_range("hat_deriv: vertex index out of range");
  const auto& pts = mesh.points();
  if (i > 0 && x > pts[i - 1] && x < pts[i]) return 1.0 / (pts[i] - pts[i - 1]);
  if (i < nv - 1 && x > pts[i] && x < pts[i + 1]) return -1.0 / (pts[i + 1] - pts[i]);
  return 0.0;
}

/// n-point Gauss-Legendre rule on [-1, 1] (nodes ascending).
template <typename Scalar = double>
std::pair<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>
gauss_legendre(int n) {
  using std::abs;
  using std::cos;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (n < 1) throw std::invalid_argument("gauss_legendre: need n >= 1");
  Vec x(n), w(n);
  const Scalar pi = Scalar(3.14159265358979323846264338327950288L);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    Scalar z = cos(pi * (i + Scalar(0.75)) / (n + Scalar(0.5)));
    Scalar dp(0);
    for (int it = 0; it < 100; ++it) {
      Scalar p0(1), p1 = z;
      for (int k = 1; k < n; ++k) {
        Scalar p2 = ((2 * k + 1) * z * p1 - k * p0) / (k + 1);
        p0 = p1;
        p1 = p2;
      }
      // p1 = P_n(z), p0 = P_{n-1}(z)
      dp = n * (z * p1 - p0) / (z * z - 1);
      Scalar dz = p1 / dp;
      z -= dz;
      if (abs(dz) < Scalar(1e-16) * 4) break;
    }
    {
      Scalar p0(1), p1 = z;
      for (int k = 1; k < n; ++k) {
        Scalar p2 = ((2 * k + 1) * z * p1 - k * p0) / (k + 1);
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1);
    }
    x(i) = -z;
    x(n - 1 - i) = z;
    w(i) = w(n - 1 - i) = 2 / ((1 - z * z) * dp * dp);
  }
  if (n % 2 == 1) x(n / 2) = Scalar(0);
  return {x, w};
}

}  // namespace hpg
