#pragma once

// Cellwise analysis (samples -> Legendre coefficients) and synthesis
// (Legendre coefficients -> samples) on Chebyshev points of the second kind.
//
// Two routes are provided:
//   * reference: Clenshaw summation for synthesis and dense O(n^2) operators
//     for analysis;
//   * fast: DCT-I (through an FFT) between samples and Chebyshev coefficients,
//     combined with a Legendre <-> Chebyshev conversion that exploits the
//     Toeplitz-times-Hankel structure of the connection matrices (low-rank
//     Hankel factor via pivoted Cholesky, Toeplitz products via FFT).
// `TransformPath::Auto` uses the dense route up to kFastDegreeThreshold and the
// fast route above it.

#include <Eigen/Core>

namespace hpg {

enum class TransformPath { Auto, Reference, Fast };

inline constexpr int kFastDegreeThreshold = 64;

/// Legendre coefficients of a polynomial restricted to one cell.
struct CellExpansion {
  int cell = 0;
  Eigen::VectorXd coeffs;

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

/// x_k = cos(pi k / (q - 1)), k = 0..q-1 (descending). The one-point grid is {0}.
Eigen::VectorXd chebyshev_points(int q);

/// Chebyshev coefficients of the degree q-1 interpolant of samples on chebyshev_points(q).
Eigen::VectorXd values_to_chebyshev(const Eigen::VectorXd& values);
/// Values of sum_j c_j T_j on chebyshev_points(q); coefficients beyond q-1 are aliased.
Eigen::VectorXd chebyshev_to_values(const Eigen::VectorXd& coeffs, int q);

/// Dense connection matrices (n x n) built from the three-term recurrences.
const Eigen::MatrixXd& legendre_to_chebyshev_matrix(int n);
const Eigen::MatrixXd& chebyshev_to_legendre_matrix(int n);

Eigen::VectorXd legendre_to_chebyshev(const Eigen::VectorXd& a, TransformPath path = TransformPath::Auto);
Eigen::VectorXd chebyshev_to_legendre(const Eigen::VectorXd& c, TransformPath path = TransformPath::Auto);

/// Values of sum_j a_j P_j at chebyshev_points(q).
Eigen::VectorXd synthesis(const Eigen::VectorXd& coeffs, int q, TransformPath path = TransformPath::Auto);
CellExpansion analysis(const Eigen::VectorXd& values, TransformPath path = TransformPath::Auto);

/// Dense q x q operator mapping samples to Legendre coefficients (cached, thread safe).
const Eigen::MatrixXd& analysis_matrix(int q);
/// q x n matrix with entries P_j(x_k) on chebyshev_points(q).
Eigen::MatrixXd synthesis_matrix(int n, int q);

}  // namespace hpg
